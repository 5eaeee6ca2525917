#pragma once

// Synthetic data: Wishart covariances, row-sparse masking with PSD repair,
// Gaussian batches and change-point scenario streams of V values.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "maxcorr/rng.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {

struct CovarianceSpec {
    Eigen::MatrixXd sigma;
    Eigen::VectorXd mu;

    static CovarianceSpec identity(int p);
    int dim() const { return static_cast<int>(sigma.rows()); }
};

using MaskPattern = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct SparsityMask {
    int s = 1;
    MaskPattern pattern;

    /// Band |i - j| <= (s - 1) / 2; interior rows have degree s for odd s.
    static SparsityMask banded(int p, int s);
    static SparsityMask diagonal(int p);

    void validate() const;
};

/// One Wishart(I_p, df) draw by Bartlett decomposition. Requires df >= p.
Eigen::MatrixXd sample_wishart(int p, int df, Rng& rng);

/// Raises every eigenvalue below `floor` to `floor`; returns the input untouched
/// when none are below it.
Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& sigma, double floor);

/// Default repair floor: 1e-8 * trace / p.
double psd_floor(const Eigen::MatrixXd& sigma);

/// Entrywise sigma .* pattern followed by PSD repair.
CovarianceSpec apply_sparsity_mask(const Eigen::MatrixXd& sigma, const SparsityMask& mask);

/// Draws n x p batches with rows i.i.d. N(mu, Sigma) through a cached Cholesky factor.
class MvnSampler {
public:
    explicit MvnSampler(const CovarianceSpec& spec);

    Batch draw(int n, Rng& rng) const;
    int dim() const { return static_cast<int>(factor_.rows()); }

private:
    Eigen::MatrixXd factor_;  // lower triangular L with L L^T = Sigma
    Eigen::VectorXd mu_;
};

std::vector<Batch> mvn_batches(const CovarianceSpec& spec, int n, int count, Rng& rng);

struct ModelRegime {
    double J = 1.0;
};

using Regime = std::variant<ModelRegime, CovarianceSpec>;

/// Post-change regime held on the inclusive batch range [start, end] (1-based).
struct Segment {
    std::int64_t start = 1;
    std::int64_t end = 1;
    Regime regime;
};

enum class PreChangeMode { kModel, kVector };

struct ScenarioSchedule {
    /// First post-change batch index (1-based); nullopt means no change.
    std::optional<std::int64_t> nu;
    std::int64_t horizon = 0;
    std::vector<Segment> segments;
    PreChangeMode pre_change = PreChangeMode::kModel;

    void validate() const;

    /// 500 pre-change batches, then J = 7.23, 11.12, 3.62, 2.79 up to batch 2000.
    static ScenarioSchedule paper_fig2();
    static ScenarioSchedule null(std::int64_t horizon, PreChangeMode mode = PreChangeMode::kModel);
    static ScenarioSchedule single_j(std::int64_t nu, std::int64_t horizon, double J);
};

struct StreamSample {
    std::int64_t m = 0;
    double V = 0.0;
    std::optional<double> segment_J;
};

struct ScenarioStream {
    std::string mode;  // "model", "vector" or "mixed"
    std::vector<StreamSample> samples;
};

/// V stream for a schedule; each segment draws from its own substream of `seed`.
/// `raw_batches`, when given, receives every vector-level batch in order.
ScenarioStream scenario_stream(const ScenarioSchedule& schedule, int n, int p, std::uint64_t seed,
                               std::vector<Batch>* raw_batches = nullptr);

/// Masked-Wishart post-change covariance: sample_wishart(p, df) then banded mask of degree s.
CovarianceSpec masked_wishart_covariance(int p, int df, int s, Rng& rng);

}  // namespace maxcorr
