#pragma once

// Monte Carlo operating characteristics of CUSUM detectors: detection delay
// from a change at nu = 1 (the worst case for CUSUM-type rules) and mean time
// to false alarm with explicit censoring at a horizon.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maxcorr/detectors.hpp"
#include "maxcorr/rng.hpp"
#include "maxcorr/simulation.hpp"

namespace maxcorr {

/// Produces one V value per call.
using VSampler = std::function<double(Rng&)>;

/// Direct draws from the asymptotic law f(.; J).
VSampler model_sampler(int n, int p, double J, std::optional<double> c_override = std::nullopt);

/// Gaussian batches from `cov`, reduced to V.
VSampler vector_sampler(const CovarianceSpec& cov, int n);

struct MonteCarloOptions {
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
    /// Cap on post-change run length; runs reaching it are counted as censored.
    std::int64_t max_delay = 10'000'000;
};

struct DelayEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t trials = 0;
    std::int64_t censored = 0;
};

struct FalseAlarmEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t trials = 0;
    std::int64_t censored = 0;
    /// True when censored > 0: the mean underestimates E_inf[tau].
    bool lower_bound = false;
};

DelayEstimate estimate_wadd(const DetectorSpec& spec, const VSampler& post_change, std::int64_t trials,
                            const MonteCarloOptions& options = {});
DelayEstimate estimate_wadd(const DetectorSpec& spec, double post_J, std::int64_t trials,
                            const MonteCarloOptions& options = {});

FalseAlarmEstimate estimate_mfa(const DetectorSpec& spec, const VSampler& pre_change, std::int64_t trials,
                                std::int64_t horizon, const MonteCarloOptions& options = {});
FalseAlarmEstimate estimate_mfa(const DetectorSpec& spec, std::int64_t trials, std::int64_t horizon,
                                const MonteCarloOptions& options = {});

/// Horizon policy for MFA runs: 20 * beta with beta = exp(A).
std::int64_t default_mfa_horizon(double threshold);

struct OcPoint {
    std::string spec_id;
    double A = 0.0;
    double mfa_est = 0.0;
    double mfa_se = 0.0;
    double log_mfa = 0.0;
    double log_mfa_se = 0.0;
    double wadd_est = 0.0;
    double wadd_se = 0.0;
    std::int64_t trials = 0;
    std::int64_t censored = 0;
    std::int64_t wadd_censored = 0;
};

struct OcOptions {
    std::int64_t trials = 5000;
    double post_J = 2.0;
    /// 0 selects default_mfa_horizon(A) per threshold.
    std::int64_t horizon = 0;
    MonteCarloOptions mc;
};

/// Cross product specs x thresholds; each spec's own threshold is replaced.
std::vector<OcPoint> oc_curve(std::span<const DetectorSpec> specs, std::span<const double> thresholds,
                              const OcOptions& options);

void write_oc_csv(std::ostream& out, std::span<const OcPoint> points);

/// Delay of two detectors compared at one common log-MFA level.
struct MatchedComparison {
    double log_mfa = 0.0;
    double wadd_a = 0.0;
    double se_a = 0.0;
    double wadd_b = 0.0;
    double se_b = 0.0;
    /// (wadd_b - wadd_a) / sqrt(se_a^2 + se_b^2)
    double margin_se = 0.0;
};

/// Interpolates both curves (WADD and its se, linear in log-MFA) at `points`
/// evenly spaced log-MFA levels spanning the overlap of their log-MFA ranges.
/// Returns an empty vector if the ranges do not overlap.
std::vector<MatchedComparison> compare_at_matched_mfa(std::span<const OcPoint> a, std::span<const OcPoint> b,
                                                      int points);

struct FitReport {
    std::vector<double> bin_edges;
    std::vector<double> density;  // normalized: sum(density * width) == 1
    double j_hat = 0.0;
    double ks = 0.0;
    std::int64_t sample_count = 0;
    int n = 0;
    int p = 0;
};

/// Normalized histogram on [min V, 1], closed-form MLE of J and the
/// Kolmogorov-Smirnov distance to F(.; j_hat).
FitReport histogram_fit(std::span<const double> samples, int bins, int n, int p,
                        std::optional<double> c_override = std::nullopt);

/// sup |F_empirical - F| for a continuous CDF.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace maxcorr
