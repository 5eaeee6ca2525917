#include "maxcorr/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "maxcorr/errors.hpp"

namespace maxcorr {
namespace {

void require_batch_size(int n, const char* who) {
    if (n < 5) throw InvalidArgument(std::string(who) + ": n must be >= 5");
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double incomplete_beta_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) return h;
    }
    throw InternalError("regularized_incomplete_beta: continued fraction did not converge");
}

double binomial(int k, int j) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i) c = c * (k - j + i) / i;
    return c;
}

}  // namespace

double beta_const(int n) {
    require_batch_size(n, "beta_const");
    return std::beta(0.5 * (n - 2), 0.5);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("regularized_incomplete_beta: a, b must be > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("regularized_incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * incomplete_beta_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * incomplete_beta_fraction(b, a, 1.0 - x) / b;
}

TailIntegral::TailIntegral(int n)
    : n_(n), closed_form_(n % 2 == 0 && n <= kMaxClosedFormN), beta_n_(beta_const(n)), at_zero_(0.5 * beta_n_) {
    if (!closed_form_) return;
    const int k = (n - 4) / 2;
    near_zero_.resize(k + 1);
    near_one_.resize(k + 1);
    for (int j = 0; j <= k; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        const double c = binomial(k, j);
        near_zero_[j] = sign * c / (2 * j + 1);
        near_one_[j] = sign * c * std::ldexp(1.0, k - j) / (k + j + 1);
    }
}

double TailIntegral::eval_unchecked(double v) const {
    if (v >= 1.0) return 0.0;
    if (v <= 0.0) return at_zero_;
    if (!closed_form_) {
        const double w = (1.0 - v) * (1.0 + v);
        return 0.5 * beta_n_ * regularized_incomplete_beta(0.5 * (n_ - 2), 0.5, w);
    }
    if (v < 0.5) {
        const double v2 = v * v;
        double tail = 0.0;
        double sum = 0.0;
        for (auto it = near_zero_.rbegin(); it != near_zero_.rend(); ++it) {
            tail = tail * v2 + *it;
            sum += *it;
        }
        return sum - v * tail;
    }
    const double w = 1.0 - v;
    double poly = 0.0;
    for (auto it = near_one_.rbegin(); it != near_one_.rend(); ++it) poly = poly * w + *it;
    return poly * std::pow(w, static_cast<int>(near_one_.size()));
}

double TailIntegral::operator()(double v) const {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("incomplete_T: v outside [0, 1]");
    return eval_unchecked(v);
}

double TailIntegral::inverse(double t) const {
    if (std::isnan(t)) throw InvalidArgument("TailIntegral::inverse: NaN target");
    if (t <= 0.0) return 1.0;
    if (t >= at_zero_) return 0.0;
    const double exponent = 0.5 * (n_ - 4);
    // Newton on T(v) - t with T'(v) = -(1 - v^2)^{(n-4)/2}, falling back to
    // bisection whenever the step leaves the bracket [lo, hi].
    double lo = 0.0;
    double hi = 1.0;
    double v = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        const double residual = eval_unchecked(v) - t;
        if (residual == 0.0) return v;
        if (residual > 0.0) {
            lo = v;
        } else {
            hi = v;
        }
        const double slope = -std::pow((1.0 - v) * (1.0 + v), exponent);
        double next = slope < 0.0 ? v - residual / slope : lo;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next <= lo || next >= hi || std::abs(next - v) <= 1e-15 * v) return next;
        v = next;
    }
    return v;
}

double incomplete_T(double v, int n) { return TailIntegral(n)(v); }

}  // namespace maxcorr
