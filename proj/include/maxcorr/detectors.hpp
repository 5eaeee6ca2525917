#pragma once

// One-sided CUSUM engine. W_m = max(0, W_{m-1} + increment(V_m)); the alarm
// time is the first m with W_m >= A.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "maxcorr/density.hpp"

namespace maxcorr {

/// Likelihood-ratio increment designed against the least favorable post-change J.
struct RobustRule {
    double jbar = 2.0;
};

/// Same likelihood-ratio form, tuned to a guessed post-change J1.
struct NonRobustRule {
    double j1 = 10.0;
};

/// Distribution-free increment V - (m0 + m1) / 2.
struct NonParametricRule {
    double m0 = 0.0;
    double m1 = 0.0;
};

using IncrementRule = std::variant<RobustRule, NonRobustRule, NonParametricRule>;

struct DetectorSpec {
    IncrementRule rule;
    double threshold = 0.0;
    int n = 10;
    int p = 100;
    std::optional<double> c_override;

    /// Short identifier such as "robust(jbar=2)" for reports.
    std::string id() const;
};

/// Throws InvalidArgument unless the rule parameters and threshold are admissible.
void validate(const DetectorSpec& spec);

/// Increment evaluator with the model constants resolved once.
class Increment {
public:
    explicit Increment(const DetectorSpec& spec);

    double operator()(double v) const;

private:
    enum class Kind { kLikelihoodRatio, kMeanShift };
    Kind kind_;
    double log_j_ = 0.0;
    double slope_ = 0.0;  // (J - 1) for likelihood-ratio rules
    double offset_ = 0.0;  // (m0 + m1) / 2 for the mean-shift rule
    std::optional<MaxCorrModel> model_;
};

double increment(const DetectorSpec& spec, double v);

struct CusumState {
    double W = 0.0;
    std::int64_t m = 0;
    bool alarmed = false;
    std::optional<std::int64_t> tau;
};

/// One recursion step. After the first alarm `tau` stays frozen while W keeps updating.
CusumState cusum_step(const CusumState& state, double inc, double threshold);

/// A = log(beta); guarantees mean time to false alarm >= beta.
double threshold_from_beta(double beta);

/// Stateful wrapper pairing a CusumState with its increment rule.
class CusumDetector {
public:
    explicit CusumDetector(const DetectorSpec& spec);

    const CusumState& update(double v);
    void reset() { state_ = CusumState{}; }

    const CusumState& state() const noexcept { return state_; }
    const DetectorSpec& spec() const noexcept { return spec_; }

private:
    DetectorSpec spec_;
    Increment increment_;
    CusumState state_;
};

struct StreamResult {
    std::optional<std::int64_t> tau;
    std::vector<double> trajectory;
};

StreamResult run_stream(const DetectorSpec& spec, std::span<const double> values);

}  // namespace maxcorr
