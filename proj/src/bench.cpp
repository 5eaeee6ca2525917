#include "maxcorr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "maxcorr/density.hpp"
#include "maxcorr/errors.hpp"
#include "maxcorr/io.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {
namespace {

constexpr std::uint64_t kDelayTag = 0x57414444ULL;
constexpr std::uint64_t kFalseAlarmTag = 0x4d464121ULL;

struct TrialOutcome {
    std::int64_t length = 0;
    bool censored = false;
};

// Runs `trial(i)` for i in [0, count) on a small thread pool. Outcomes are
// stored by index so aggregation order never depends on scheduling.
template <typename Fn>
std::vector<TrialOutcome> run_trials(std::int64_t count, int threads, Fn&& trial) {
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(count));
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(count, 1)));

    std::atomic<std::int64_t> next{0};
    const auto worker = [&] {
        for (std::int64_t i = next++; i < count; i = next++) outcomes[static_cast<std::size_t>(i)] = trial(i);
    };
    if (threads == 1) {
        worker();
        return outcomes;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();  // joins
    return outcomes;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t censored = 0;
};

MeanSe summarize(const std::vector<TrialOutcome>& outcomes) {
    MeanSe out;
    const double count = static_cast<double>(outcomes.size());
    if (outcomes.empty()) return out;
    double sum = 0.0;
    for (const auto& o : outcomes) {
        sum += static_cast<double>(o.length);
        out.censored += o.censored ? 1 : 0;
    }
    out.mean = sum / count;
    if (outcomes.size() > 1) {
        double ss = 0.0;
        for (const auto& o : outcomes) ss += std::pow(static_cast<double>(o.length) - out.mean, 2);
        out.se = std::sqrt(ss / (count - 1.0) / count);
    }
    return out;
}

TrialOutcome run_until_alarm(const Increment& increment, double threshold, const VSampler& sampler, Rng& rng,
                             std::int64_t limit) {
    CusumState state;
    while (state.m < limit) {
        state = cusum_step(state, increment(sampler(rng)), threshold);
        if (state.alarmed) return {*state.tau, false};
    }
    return {limit, true};
}

double interpolate(const std::vector<std::pair<double, double>>& xy, double x) {
    if (x <= xy.front().first) return xy.front().second;
    if (x >= xy.back().first) return xy.back().second;
    const auto hi = std::lower_bound(xy.begin(), xy.end(), x,
                                     [](const std::pair<double, double>& p, double v) { return p.first < v; });
    const auto lo = hi - 1;
    const double span = hi->first - lo->first;
    if (span <= 0.0) return hi->second;
    const double w = (x - lo->first) / span;
    return (1.0 - w) * lo->second + w * hi->second;
}

}  // namespace

VSampler model_sampler(int n, int p, double J, std::optional<double> c_override) {
    return [model = MaxCorrModel(n, p, J, c_override)](Rng& rng) { return sample(model, rng); };
}

VSampler vector_sampler(const CovarianceSpec& cov, int n) {
    return [sampler = MvnSampler(cov), n](Rng& rng) { return max_magnitude_correlation(sampler.draw(n, rng)); };
}

DelayEstimate estimate_wadd(const DetectorSpec& spec, const VSampler& post_change, std::int64_t trials,
                            const MonteCarloOptions& options) {
    if (trials < 1) throw InvalidArgument("estimate_wadd: trials must be >= 1");
    const Increment increment(spec);
    const auto outcomes = run_trials(trials, options.threads, [&](std::int64_t i) {
        Rng rng = substream(options.seed, kDelayTag, static_cast<std::uint64_t>(i));
        return run_until_alarm(increment, spec.threshold, post_change, rng, options.max_delay);
    });
    const MeanSe s = summarize(outcomes);
    return {s.mean, s.se, trials, s.censored};
}

DelayEstimate estimate_wadd(const DetectorSpec& spec, double post_J, std::int64_t trials,
                            const MonteCarloOptions& options) {
    if (!(post_J >= 1.0)) throw InvalidArgument("estimate_wadd: post-change J must be >= 1");
    return estimate_wadd(spec, model_sampler(spec.n, spec.p, post_J, spec.c_override), trials, options);
}

FalseAlarmEstimate estimate_mfa(const DetectorSpec& spec, const VSampler& pre_change, std::int64_t trials,
                                std::int64_t horizon, const MonteCarloOptions& options) {
    if (trials < 1) throw InvalidArgument("estimate_mfa: trials must be >= 1");
    if (horizon < 1) throw InvalidArgument("estimate_mfa: horizon must be >= 1");
    const Increment increment(spec);
    const auto outcomes = run_trials(trials, options.threads, [&](std::int64_t i) {
        Rng rng = substream(options.seed, kFalseAlarmTag, static_cast<std::uint64_t>(i));
        return run_until_alarm(increment, spec.threshold, pre_change, rng, horizon);
    });
    const MeanSe s = summarize(outcomes);
    return {s.mean, s.se, trials, s.censored, s.censored > 0};
}

FalseAlarmEstimate estimate_mfa(const DetectorSpec& spec, std::int64_t trials, std::int64_t horizon,
                                const MonteCarloOptions& options) {
    return estimate_mfa(spec, model_sampler(spec.n, spec.p, 1.0, spec.c_override), trials, horizon, options);
}

std::int64_t default_mfa_horizon(double threshold) {
    constexpr double kCap = 1e12;
    return static_cast<std::int64_t>(std::ceil(std::min(20.0 * std::exp(threshold), kCap)));
}

std::vector<OcPoint> oc_curve(std::span<const DetectorSpec> specs, std::span<const double> thresholds,
                              const OcOptions& options) {
    if (specs.empty() || thresholds.empty()) throw InvalidArgument("oc_curve: need specs and thresholds");
    std::vector<OcPoint> rows;
    rows.reserve(specs.size() * thresholds.size());
    for (const DetectorSpec& base : specs) {
        const VSampler post = model_sampler(base.n, base.p, options.post_J, base.c_override);
        const VSampler pre = model_sampler(base.n, base.p, 1.0, base.c_override);
        for (double A : thresholds) {
            DetectorSpec spec = base;
            spec.threshold = A;
            const std::int64_t horizon = options.horizon > 0 ? options.horizon : default_mfa_horizon(A);
            const DelayEstimate delay = estimate_wadd(spec, post, options.trials, options.mc);
            const FalseAlarmEstimate fa = estimate_mfa(spec, pre, options.trials, horizon, options.mc);
            OcPoint row;
            row.spec_id = spec.id();
            row.A = A;
            row.mfa_est = fa.mean;
            row.mfa_se = fa.se;
            row.log_mfa = std::log(fa.mean);
            row.log_mfa_se = fa.se / fa.mean;
            row.wadd_est = delay.mean;
            row.wadd_se = delay.se;
            row.trials = options.trials;
            row.censored = fa.censored;
            row.wadd_censored = delay.censored;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_oc_csv(std::ostream& out, std::span<const OcPoint> points) {
    out << "spec_id,A,log_mfa,log_mfa_se,wadd,wadd_se,trials,censored\n";
    for (const OcPoint& r : points) {
        out << r.spec_id << ',' << format_double(r.A) << ',' << format_double(r.log_mfa) << ','
            << format_double(r.log_mfa_se) << ',' << format_double(r.wadd_est) << ',' << format_double(r.wadd_se) << ','
            << r.trials << ',' << r.censored << '\n';
    }
}

std::vector<MatchedComparison> compare_at_matched_mfa(std::span<const OcPoint> a, std::span<const OcPoint> b,
                                                      int points) {
    if (a.empty() || b.empty() || points < 1) return {};
    const auto curves = [](std::span<const OcPoint> c) {
        std::vector<OcPoint> sorted(c.begin(), c.end());
        std::sort(sorted.begin(), sorted.end(), [](const OcPoint& x, const OcPoint& y) { return x.log_mfa < y.log_mfa; });
        std::vector<std::pair<double, double>> wadd, se;
        for (const OcPoint& p : sorted) {
            wadd.emplace_back(p.log_mfa, p.wadd_est);
            se.emplace_back(p.log_mfa, p.wadd_se);
        }
        return std::pair{wadd, se};
    };
    const auto [wadd_a, se_a] = curves(a);
    const auto [wadd_b, se_b] = curves(b);
    const double lo = std::max(wadd_a.front().first, wadd_b.front().first);
    const double hi = std::min(wadd_a.back().first, wadd_b.back().first);
    if (!(lo <= hi)) return {};

    std::vector<MatchedComparison> out;
    for (int k = 0; k < points; ++k) {
        const double x = points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (points - 1);
        MatchedComparison c;
        c.log_mfa = x;
        c.wadd_a = interpolate(wadd_a, x);
        c.se_a = interpolate(se_a, x);
        c.wadd_b = interpolate(wadd_b, x);
        c.se_b = interpolate(se_b, x);
        const double pooled = std::hypot(c.se_a, c.se_b);
        c.margin_se = pooled > 0.0 ? (c.wadd_b - c.wadd_a) / pooled : std::copysign(std::numeric_limits<double>::infinity(), c.wadd_b - c.wadd_a);
        out.push_back(c);
    }
    return out;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InvalidArgument("ks_distance: no samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double count = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        d = std::max({d, F - static_cast<double>(i) / count, static_cast<double>(i + 1) / count - F});
    }
    return std::clamp(d, 0.0, 1.0);
}

FitReport histogram_fit(std::span<const double> samples, int bins, int n, int p, std::optional<double> c_override) {
    if (samples.size() < 2) throw InvalidArgument("histogram_fit: need at least 2 samples");
    if (bins < 2) throw InvalidArgument("histogram_fit: need at least 2 bins");
    for (double v : samples) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("histogram_fit: sample outside [0, 1]");
    }
    const double lo = *std::min_element(samples.begin(), samples.end());
    if (!(lo < 1.0)) throw InvalidArgument("histogram_fit: degenerate samples (all equal 1)");

    FitReport report;
    report.n = n;
    report.p = p;
    report.sample_count = static_cast<std::int64_t>(samples.size());
    const double width = (1.0 - lo) / bins;
    report.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) report.bin_edges[b] = lo + width * b;
    report.bin_edges.back() = 1.0;

    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : samples) {
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        ++counts[static_cast<std::size_t>(b)];
    }
    report.density.resize(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
        report.density[b] = static_cast<double>(counts[b]) / (static_cast<double>(samples.size()) * width);

    const MaxCorrModel base(n, p, 1.0, c_override);
    report.j_hat = mle_J(samples, base);
    const MaxCorrModel fitted = base.with_J(report.j_hat);
    report.ks = ks_distance(samples, [&](double v) { return cdf(v, fitted); });
    return report;
}

}  // namespace maxcorr
