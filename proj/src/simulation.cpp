#include "maxcorr/simulation.hpp"

#include <cmath>
#include <random>

#include "maxcorr/density.hpp"
#include "maxcorr/errors.hpp"

namespace maxcorr {
namespace {

constexpr std::uint64_t kScenarioTag = 0x5343454eULL;

}  // namespace

CovarianceSpec CovarianceSpec::identity(int p) {
    if (p < 1) throw InvalidArgument("CovarianceSpec::identity: p must be >= 1");
    return {Eigen::MatrixXd::Identity(p, p), Eigen::VectorXd::Zero(p)};
}

SparsityMask SparsityMask::banded(int p, int s) {
    if (p < 1 || s < 1) throw InvalidArgument("SparsityMask::banded: need p >= 1 and s >= 1");
    const int half = (s - 1) / 2;
    SparsityMask mask{s, MaskPattern::Constant(p, p, false)};
    for (int i = 0; i < p; ++i) {
        for (int j = std::max(0, i - half); j <= std::min(p - 1, i + half); ++j) mask.pattern(i, j) = true;
    }
    return mask;
}

SparsityMask SparsityMask::diagonal(int p) { return banded(p, 1); }

void SparsityMask::validate() const {
    if (s < 1) throw InvalidArgument("SparsityMask: s must be >= 1");
    if (pattern.rows() != pattern.cols()) throw InvalidArgument("SparsityMask: pattern must be square");
    for (Eigen::Index i = 0; i < pattern.rows(); ++i) {
        if (!pattern(i, i)) throw InvalidArgument("SparsityMask: diagonal must be set");
        Eigen::Index degree = 0;
        for (Eigen::Index j = 0; j < pattern.cols(); ++j) {
            if (pattern(i, j) != pattern(j, i)) throw InvalidArgument("SparsityMask: pattern must be symmetric");
            degree += pattern(i, j) ? 1 : 0;
        }
        if (degree > s) throw InvalidArgument("SparsityMask: row degree exceeds s");
    }
}

Eigen::MatrixXd sample_wishart(int p, int df, Rng& rng) {
    if (p < 1) throw InvalidArgument("sample_wishart: p must be >= 1");
    if (df < p) throw InvalidArgument("sample_wishart: df must be >= p");
    std::normal_distribution<double> normal;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        std::chi_squared_distribution<double> chi2(df - i);
        A(i, i) = std::sqrt(chi2(rng));
        for (int j = 0; j < i; ++j) A(i, j) = normal(rng);
    }
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(p, p);
    W.selfadjointView<Eigen::Lower>().rankUpdate(A);
    W.triangularView<Eigen::StrictlyUpper>() = W.transpose();
    return W;
}

double psd_floor(const Eigen::MatrixXd& sigma) { return 1e-8 * sigma.trace() / static_cast<double>(sigma.rows()); }

Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& sigma, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.info() != Eigen::Success) throw InternalError("repair_psd: eigen-decomposition failed");
    if (eig.eigenvalues().minCoeff() >= floor) return sigma;
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXd repaired = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (repaired + repaired.transpose());
}

CovarianceSpec apply_sparsity_mask(const Eigen::MatrixXd& sigma, const SparsityMask& mask) {
    mask.validate();
    if (sigma.rows() != mask.pattern.rows() || sigma.cols() != mask.pattern.cols())
        throw InvalidArgument("apply_sparsity_mask: shape mismatch");
    const Eigen::MatrixXd masked = mask.pattern.select(sigma, Eigen::MatrixXd::Zero(sigma.rows(), sigma.cols()));
    return {repair_psd(masked, psd_floor(masked)), Eigen::VectorXd::Zero(sigma.rows())};
}

CovarianceSpec masked_wishart_covariance(int p, int df, int s, Rng& rng) {
    return apply_sparsity_mask(sample_wishart(p, df, rng), SparsityMask::banded(p, s));
}

MvnSampler::MvnSampler(const CovarianceSpec& spec) : mu_(spec.mu) {
    const Eigen::Index p = spec.sigma.rows();
    if (p < 1 || spec.sigma.cols() != p) throw InvalidArgument("MvnSampler: sigma must be square");
    if (mu_.size() == 0) mu_ = Eigen::VectorXd::Zero(p);
    if (mu_.size() != p) throw InvalidArgument("MvnSampler: mu has wrong length");
    Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
    if (llt.info() != Eigen::Success) throw InternalError("MvnSampler: Cholesky factorization failed");
    factor_ = llt.matrixL();
}

Batch MvnSampler::draw(int n, Rng& rng) const {
    if (n < 1) throw InvalidArgument("MvnSampler::draw: n must be >= 1");
    std::normal_distribution<double> normal;
    const Eigen::Index p = factor_.rows();
    Batch z(n, p);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
    }
    Batch x = z * factor_.transpose();
    x.rowwise() += mu_.transpose();
    return x;
}

std::vector<Batch> mvn_batches(const CovarianceSpec& spec, int n, int count, Rng& rng) {
    if (n < 5) throw InvalidArgument("mvn_batches: n must be >= 5");
    if (count < 0) throw InvalidArgument("mvn_batches: negative count");
    const MvnSampler sampler(spec);
    std::vector<Batch> out;
    out.reserve(count);
    for (int c = 0; c < count; ++c) out.push_back(sampler.draw(n, rng));
    return out;
}

void ScenarioSchedule::validate() const {
    if (horizon < 0) throw InvalidArgument("ScenarioSchedule: negative horizon");
    if (!nu) {
        if (!segments.empty()) throw InvalidArgument("ScenarioSchedule: segments given without a change point");
        return;
    }
    if (*nu < 1) throw InvalidArgument("ScenarioSchedule: nu must be >= 1");
    if (*nu > horizon) throw InvalidArgument("ScenarioSchedule: nu beyond horizon");
    if (segments.empty()) throw InvalidArgument("ScenarioSchedule: change point without segments");
    std::int64_t expected = *nu;
    for (const Segment& seg : segments) {
        if (seg.start != expected || seg.end < seg.start)
            throw InvalidArgument("ScenarioSchedule: segments must be contiguous and non-empty");
        if (const auto* model = std::get_if<ModelRegime>(&seg.regime)) {
            if (!(model->J > 0.0)) throw InvalidArgument("ScenarioSchedule: regime J must be positive");
        }
        expected = seg.end + 1;
    }
    if (expected != horizon + 1) throw InvalidArgument("ScenarioSchedule: segments must end at the horizon");
}

ScenarioSchedule ScenarioSchedule::paper_fig2() {
    ScenarioSchedule s;
    s.nu = 501;
    s.horizon = 2000;
    s.segments = {
        {501, 800, ModelRegime{7.23}},
        {801, 1300, ModelRegime{11.12}},
        {1301, 1670, ModelRegime{3.62}},
        {1671, 2000, ModelRegime{2.79}},
    };
    return s;
}

ScenarioSchedule ScenarioSchedule::null(std::int64_t horizon, PreChangeMode mode) {
    ScenarioSchedule s;
    s.horizon = horizon;
    s.pre_change = mode;
    return s;
}

ScenarioSchedule ScenarioSchedule::single_j(std::int64_t nu, std::int64_t horizon, double J) {
    ScenarioSchedule s;
    s.nu = nu;
    s.horizon = horizon;
    s.segments = {{nu, horizon, ModelRegime{J}}};
    return s;
}

ScenarioStream scenario_stream(const ScenarioSchedule& schedule, int n, int p, std::uint64_t seed,
                               std::vector<Batch>* raw_batches) {
    schedule.validate();
    const MaxCorrModel null_model(n, p, 1.0);

    bool any_model = schedule.pre_change == PreChangeMode::kModel;
    bool any_vector = !any_model;
    for (const Segment& seg : schedule.segments) {
        if (std::holds_alternative<ModelRegime>(seg.regime)) {
            any_model = true;
        } else {
            any_vector = true;
        }
    }

    ScenarioStream stream;
    stream.mode = any_model && any_vector ? "mixed" : (any_vector ? "vector" : "model");
    stream.samples.reserve(static_cast<std::size_t>(schedule.horizon));

    const auto emit_vector = [&](const MvnSampler& sampler, Rng& rng, std::int64_t m, std::optional<double> J) {
        Batch batch = sampler.draw(n, rng);
        stream.samples.push_back({m, max_magnitude_correlation(batch), J});
        if (raw_batches) raw_batches->push_back(std::move(batch));
    };

    const std::int64_t pre_end = schedule.nu ? *schedule.nu - 1 : schedule.horizon;
    {
        Rng rng = substream(seed, kScenarioTag, 0);
        if (schedule.pre_change == PreChangeMode::kModel) {
            for (std::int64_t m = 1; m <= pre_end; ++m) stream.samples.push_back({m, sample(null_model, rng), 1.0});
        } else {
            const MvnSampler sampler(CovarianceSpec::identity(p));
            for (std::int64_t m = 1; m <= pre_end; ++m) emit_vector(sampler, rng, m, 1.0);
        }
    }

    for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
        const Segment& seg = schedule.segments[k];
        Rng rng = substream(seed, kScenarioTag, k + 1);
        if (const auto* model = std::get_if<ModelRegime>(&seg.regime)) {
            const MaxCorrModel post = null_model.with_J(model->J);
            for (std::int64_t m = seg.start; m <= seg.end; ++m) stream.samples.push_back({m, sample(post, rng), model->J});
        } else {
            const auto& cov = std::get<CovarianceSpec>(seg.regime);
            if (cov.dim() != p) throw InvalidArgument("scenario_stream: covariance dimension differs from p");
            const MvnSampler sampler(cov);
            for (std::int64_t m = seg.start; m <= seg.end; ++m) emit_vector(sampler, rng, m, std::nullopt);
        }
    }
    return stream;
}

}  // namespace maxcorr
