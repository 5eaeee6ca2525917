#include "maxcorr/detectors.hpp"

#include <cmath>
#include <sstream>

namespace maxcorr {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string DetectorSpec::id() const {
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const RobustRule& r) { out << "robust(jbar=" << r.jbar << ")"; },
                   [&](const NonRobustRule& r) { out << "nonrobust(j1=" << r.j1 << ")"; },
                   [&](const NonParametricRule& r) {
                       out << "nonparametric(m0=" << r.m0 << ";m1=" << r.m1 << ")";
                   },
               },
               rule);
    return out.str();
}

void validate(const DetectorSpec& spec) {
    if (!(spec.threshold > 0.0) || !std::isfinite(spec.threshold))
        throw InvalidArgument("detector threshold A must be positive and finite");
    std::visit(Overloaded{
                   [](const RobustRule& r) {
                       if (!(r.jbar > 1.0)) throw InvalidArgument("robust detector needs jbar > 1");
                   },
                   [](const NonRobustRule& r) {
                       if (!(r.j1 > 1.0)) throw InvalidArgument("non-robust detector needs j1 > 1");
                   },
                   [](const NonParametricRule& r) {
                       if (!std::isfinite(r.m0) || !std::isfinite(r.m1) || !(r.m1 > r.m0))
                           throw InvalidArgument("non-parametric detector needs m1 > m0");
                   },
               },
               spec.rule);
}

Increment::Increment(const DetectorSpec& spec) : kind_(Kind::kLikelihoodRatio) {
    validate(spec);
    const auto likelihood_ratio = [&](double J) {
        kind_ = Kind::kLikelihoodRatio;
        log_j_ = std::log(J);
        slope_ = J - 1.0;
        model_.emplace(spec.n, spec.p, 1.0, spec.c_override);
    };
    std::visit(Overloaded{
                   [&](const RobustRule& r) { likelihood_ratio(r.jbar); },
                   [&](const NonRobustRule& r) { likelihood_ratio(r.j1); },
                   [&](const NonParametricRule& r) {
                       kind_ = Kind::kMeanShift;
                       offset_ = 0.5 * (r.m0 + r.m1);
                   },
               },
               spec.rule);
}

double Increment::operator()(double v) const {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("increment: v outside [0, 1]");
    if (kind_ == Kind::kMeanShift) return v - offset_;
    return log_j_ - slope_ * model_->scaled_tail(v);
}

double increment(const DetectorSpec& spec, double v) { return Increment(spec)(v); }

CusumState cusum_step(const CusumState& state, double inc, double threshold) {
    CusumState next = state;
    next.W = std::max(0.0, state.W + inc);
    next.m = state.m + 1;
    if (!next.alarmed && next.W >= threshold) {
        next.alarmed = true;
        next.tau = next.m;
    }
    return next;
}

double threshold_from_beta(double beta) {
    if (!(beta > 1.0)) throw InvalidArgument("threshold_from_beta: beta must be > 1");
    return std::log(beta);
}

CusumDetector::CusumDetector(const DetectorSpec& spec) : spec_(spec), increment_(spec) {}

const CusumState& CusumDetector::update(double v) {
    state_ = cusum_step(state_, increment_(v), spec_.threshold);
    return state_;
}

StreamResult run_stream(const DetectorSpec& spec, std::span<const double> values) {
    CusumDetector detector(spec);
    StreamResult result;
    result.trajectory.reserve(values.size());
    for (double v : values) result.trajectory.push_back(detector.update(v).W);
    result.tau = detector.state().tau;
    return result;
}

}  // namespace maxcorr
