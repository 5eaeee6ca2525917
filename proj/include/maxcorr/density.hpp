#pragma once

// Asymptotic law of the maximum-magnitude sample correlation V for an n x p
// batch:
//
//   F(v; J) = exp(-(C/2) J T(v)),   f(v; J) = (C/2) (1 - v^2)^{(n-4)/2} J exp(-(C/2) J T(v))
//
// with C = 2 p (p - 1) / B((n-2)/2, 1/2), so (C/2) T(0) = p (p - 1) / 2, the
// number of distinct column pairs. J = 1 for uncorrelated coordinates.

#include <cmath>
#include <optional>
#include <span>

#include "maxcorr/errors.hpp"
#include "maxcorr/rng.hpp"
#include "maxcorr/special.hpp"

namespace maxcorr {

class MaxCorrModel {
public:
    /// `c_override` replaces the normalizing constant C (sensitivity studies only).
    MaxCorrModel(int n, int p, double J = 1.0, std::optional<double> c_override = std::nullopt);

    int n() const noexcept { return n_; }
    int p() const noexcept { return p_; }
    double J() const noexcept { return J_; }
    double beta_n() const noexcept { return tail_.at_zero() * 2.0; }
    double C() const noexcept { return C_; }
    double half_C() const noexcept { return 0.5 * C_; }
    const TailIntegral& tail() const noexcept { return tail_; }
    std::optional<double> c_override() const noexcept { return c_override_; }

    MaxCorrModel with_J(double J) const { return MaxCorrModel(n_, p_, J, c_override_); }

    /// (C/2) T(v), the exponent scale; Exp(J)-distributed under the model.
    double scaled_tail(double v) const { return half_C() * tail_(v); }

private:
    int n_;
    int p_;
    double J_;
    std::optional<double> c_override_;
    TailIntegral tail_;
    double C_;
};

double log_pdf(double v, const MaxCorrModel& model);
double pdf(double v, const MaxCorrModel& model);
double log_cdf(double v, const MaxCorrModel& model);
double cdf(double v, const MaxCorrModel& model);

/// log f(v; jbar) / f(v; 1) = log jbar - (C/2)(jbar - 1) T(v). The model's own J is ignored.
double robust_llr(double v, double jbar, const MaxCorrModel& model);

/// Inverse-CDF draw: solves T(V) = -log(U) / ((C/2) J). Targets beyond T(0) are redrawn.
template <typename URBG>
double sample(const MaxCorrModel& model, URBG& rng) {
    const double scale = model.half_C() * model.J();
    while (true) {
        const double t = -std::log(uniform_open(rng)) / scale;
        if (t < model.tail().at_zero()) return model.tail().inverse(t);
    }
}

/// Closed-form maximum-likelihood J: count / ((C/2) * sum T(V_m)).
double mle_J(std::span<const double> samples, const MaxCorrModel& model);
double mle_J(std::span<const double> samples, int n, int p);

/// D(f(.; J1) || f(.; J0)) = log(J1/J0) + J0/J1 - 1.
double kl_divergence(double J1, double J0);

}  // namespace maxcorr
