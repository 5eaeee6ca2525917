#pragma once

#include <vector>

namespace maxcorr {

/// B((n-2)/2, 1/2), the beta-function constant of the V density. Requires n >= 5.
double beta_const(int n);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Tail integral T(v) = \int_v^1 (1 - u^2)^{(n-4)/2} du on [0, 1].
///
/// Even n up to kMaxClosedFormN use an exact polynomial antiderivative, expanded
/// around u = 0 for v < 1/2 and around u = 1 otherwise so neither end suffers
/// cancellation. Other n go through the regularized incomplete beta identity
///   T(v) = B((n-2)/2, 1/2) / 2 * I_{1-v^2}((n-2)/2, 1/2).
class TailIntegral {
public:
    static constexpr int kMaxClosedFormN = 24;

    explicit TailIntegral(int n);

    int n() const noexcept { return n_; }
    bool closed_form() const noexcept { return closed_form_; }

    double operator()(double v) const;

    /// T(0) = B_n / 2.
    double at_zero() const noexcept { return at_zero_; }

    /// v in [0, 1] with T(v) = t: bracketed Newton, bisecting whenever a step leaves the bracket.
    double inverse(double t) const;

private:
    double eval_unchecked(double v) const;

    int n_;
    bool closed_form_;
    double beta_n_;
    double at_zero_;
    // \int_v^1 (1-u^2)^k du = sum_j near_zero_[j] * (1 - v^{2j+1})
    std::vector<double> near_zero_;
    // \int_v^1 (1-u^2)^k du = sum_j near_one_[j] * (1-v)^{k+j+1}
    std::vector<double> near_one_;
};

/// Convenience wrapper: T(v) for batch size n.
double incomplete_T(double v, int n);

}  // namespace maxcorr
