#include "maxcorr/density.hpp"

#include <cmath>
#include <limits>

namespace maxcorr {

MaxCorrModel::MaxCorrModel(int n, int p, double J, std::optional<double> c_override)
    : n_(n), p_(p), J_(J), c_override_(c_override), tail_(n), C_(0.0) {
    if (p < 2) throw InvalidArgument("MaxCorrModel: p must be >= 2");
    if (!(J > 0.0) || !std::isfinite(J)) throw InvalidArgument("MaxCorrModel: J must be positive");
    if (c_override) {
        if (!(*c_override > 0.0) || !std::isfinite(*c_override))
            throw InvalidArgument("MaxCorrModel: C override must be positive");
        C_ = *c_override;
    } else {
        C_ = 2.0 * p * (p - 1.0) / beta_n();
    }
}

double log_pdf(double v, const MaxCorrModel& model) {
    if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument("log_pdf: v outside (0, 1]");
    if (v == 1.0) return -std::numeric_limits<double>::infinity();
    const double log_shape = 0.5 * (model.n() - 4) * std::log((1.0 - v) * (1.0 + v));
    return std::log(model.half_C()) + log_shape + std::log(model.J()) - model.J() * model.scaled_tail(v);
}

double pdf(double v, const MaxCorrModel& model) { return std::exp(log_pdf(v, model)); }

double log_cdf(double v, const MaxCorrModel& model) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("cdf: v outside [0, 1]");
    return -model.J() * model.scaled_tail(v);
}

double cdf(double v, const MaxCorrModel& model) { return std::exp(log_cdf(v, model)); }

double robust_llr(double v, double jbar, const MaxCorrModel& model) {
    if (!(jbar > 1.0)) throw InvalidArgument("robust_llr: jbar must be > 1");
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("robust_llr: v outside [0, 1]");
    return std::log(jbar) - (jbar - 1.0) * model.scaled_tail(v);
}

double mle_J(std::span<const double> samples, const MaxCorrModel& model) {
    if (samples.empty()) throw InvalidArgument("mle_J: no samples");
    double sum = 0.0;
    for (double v : samples) sum += model.tail()(v);
    if (!(sum > 0.0)) throw AllSamplesAtOne();
    return static_cast<double>(samples.size()) / (model.half_C() * sum);
}

double mle_J(std::span<const double> samples, int n, int p) { return mle_J(samples, MaxCorrModel(n, p)); }

double kl_divergence(double J1, double J0) {
    if (!(J1 > 0.0) || !(J0 > 0.0)) throw InvalidArgument("kl_divergence: parameters must be positive");
    return std::log(J1 / J0) + J0 / J1 - 1.0;
}

}  // namespace maxcorr
