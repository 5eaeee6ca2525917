#include <doctest.h>

#include <cmath>
#include <numeric>

#include "maxcorr/density.hpp"
#include "maxcorr/simulation.hpp"

using namespace maxcorr;

TEST_CASE("Wishart draws: mean df * I, symmetric, positive definite") {
    const int p = 5, df = 8, draws = 4000;
    Rng rng = substream(11, 1, 0);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < draws; ++k) {
        const Eigen::MatrixXd W = sample_wishart(p, df, rng);
        CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues().minCoeff() > 0.0);
        sum += W;
    }
    const Eigen::MatrixXd mean = sum / draws;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            // Var(W_ij) = df * (1 + delta_ij) for identity scale
            const double se = std::sqrt(df * (i == j ? 2.0 : 1.0) / draws);
            CHECK(std::abs(mean(i, j) - (i == j ? df : 0.0)) < 3.0 * se);
        }
    CHECK_THROWS_AS(sample_wishart(5, 4, rng), InvalidArgument);
}

TEST_CASE("Wishart draws are reproducible per seed") {
    Rng a = substream(5, 1, 2), b = substream(5, 1, 2), c = substream(5, 1, 3);
    const Eigen::MatrixXd wa = sample_wishart(6, 6, a);
    CHECK(wa == sample_wishart(6, 6, b));
    CHECK(wa != sample_wishart(6, 6, c));
}

TEST_CASE("sparsity masks") {
    const SparsityMask d = SparsityMask::diagonal(4);
    CHECK(d.pattern.count() == 4);
    const SparsityMask b = SparsityMask::banded(10, 5);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) CHECK(b.pattern(i, j) == (std::abs(i - j) <= 2));
    CHECK(b.pattern.row(5).count() == 5);
    CHECK_THROWS_AS(SparsityMask::banded(10, 0), InvalidArgument);

    Rng rng = substream(3, 1, 0);
    const Eigen::MatrixXd W = sample_wishart(10, 10, rng);
    const CovarianceSpec diag = apply_sparsity_mask(W, d.pattern.rows() == 10 ? d : SparsityMask::diagonal(10));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) CHECK(diag.sigma(i, j) == (i == j ? W(i, i) : 0.0));
}

TEST_CASE("PSD repair lifts eigenvalues to the floor") {
    Eigen::MatrixXd m(3, 3);
    m << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;  // indefinite
    const double floor = psd_floor(m);
    CHECK(floor == doctest::Approx(1e-8));
    const Eigen::MatrixXd r = repair_psd(m, floor);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r).eigenvalues();
    CHECK(ev.minCoeff() >= floor * (1 - 1e-6));
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    CHECK(repair_psd(eye, psd_floor(eye)) == eye);

    Rng rng = substream(9, 1, 0);
    const CovarianceSpec masked = masked_wishart_covariance(30, 30, 5, rng);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(masked.sigma).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("Gaussian batches: identity sample moments") {
    const int p = 4, n = 10, count = 3000;
    Rng rng = substream(21, 1, 0);
    const auto batches = mvn_batches(CovarianceSpec::identity(p), n, count, rng);
    REQUIRE(batches.size() == count);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);
    for (const Batch& b : batches) {
        CHECK(b.rows() == n);
        mean += b.colwise().sum().transpose();
        second += b.transpose() * b;
    }
    const double N = static_cast<double>(n) * count;
    mean /= N;
    second /= N;
    for (int i = 0; i < p; ++i) {
        CHECK(std::abs(mean(i)) < 3.0 / std::sqrt(N));
        for (int j = 0; j < p; ++j) CHECK(std::abs(second(i, j) - (i == j)) < 3.0 * std::sqrt((1.0 + (i == j)) / N));
    }

    Rng a = substream(1, 2, 3), b = substream(1, 2, 3);
    CHECK(mvn_batches(CovarianceSpec::identity(3), 6, 2, a)[1] == mvn_batches(CovarianceSpec::identity(3), 6, 2, b)[1]);
    CHECK_THROWS_AS(mvn_batches(CovarianceSpec::identity(3), 4, 1, a), InvalidArgument);
}

TEST_CASE("correlated batches follow their covariance") {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 2.0, 1.2, 1.2, 1.0;
    const MvnSampler s({sigma, Eigen::Vector2d(1.0, -1.0)});
    Rng rng = substream(4, 4, 4);
    const Batch x = s.draw(200000, rng);
    const Eigen::MatrixXd S = sample_covariance(x);
    CHECK((S - sigma).cwiseAbs().maxCoeff() < 0.03);
    CHECK(std::abs(x.col(0).mean() - 1.0) < 0.02);
}

TEST_CASE("schedules") {
    const ScenarioSchedule fig = ScenarioSchedule::paper_fig2();
    CHECK(*fig.nu == 501);
    CHECK(fig.horizon == 2000);
    REQUIRE(fig.segments.size() == 4);
    CHECK(std::get<ModelRegime>(fig.segments[1].regime).J == 11.12);
    CHECK_NOTHROW(fig.validate());

    ScenarioSchedule bad = fig;
    bad.segments[2].start = 1200;  // overlaps
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = fig;
    bad.segments[0].start = 400;  // before nu
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = fig;
    bad.segments[3].end = 2500;  // past horizon
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = ScenarioSchedule::single_j(10, 100, 2.0);
    std::get<ModelRegime>(bad.segments[0].regime).J = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("null schedule has no change point") {
    const ScenarioStream s = scenario_stream(ScenarioSchedule::null(300), 10, 100, 8);
    REQUIRE(s.samples.size() == 300);
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        CHECK(s.samples[i].m == static_cast<std::int64_t>(i) + 1);
        CHECK(*s.samples[i].segment_J == 1.0);
    }
    CHECK(s.mode == "model");
}

TEST_CASE("paper_fig2 stream: segments and reproducibility") {
    const auto a = scenario_stream(ScenarioSchedule::paper_fig2(), 10, 100, 42);
    const auto b = scenario_stream(ScenarioSchedule::paper_fig2(), 10, 100, 42);
    const auto c = scenario_stream(ScenarioSchedule::paper_fig2(), 10, 100, 43);
    REQUIRE(a.samples.size() == 2000);
    bool differs = false;
    for (std::size_t i = 0; i < 2000; ++i) {
        CHECK(a.samples[i].V == b.samples[i].V);
        differs |= a.samples[i].V != c.samples[i].V;
    }
    CHECK(differs);
    CHECK(*a.samples[499].segment_J == 1.0);
    CHECK(*a.samples[500].segment_J == 7.23);
    CHECK(*a.samples[800].segment_J == 11.12);
    CHECK(*a.samples[1999].segment_J == 2.79);
}

TEST_CASE("model-level segment recovers its J") {
    const auto s = scenario_stream(ScenarioSchedule::single_j(1, 5000, 3.62), 10, 100, 7);
    std::vector<double> v;
    for (const auto& x : s.samples) v.push_back(x.V);
    CHECK(std::abs(mle_J(v, 10, 100) / 3.62 - 1.0) < 0.05);
}

TEST_CASE("vector-level diagonal post-change covariance gives J close to 1") {
    ScenarioSchedule sch;
    sch.nu = 1;
    sch.horizon = 1500;
    sch.pre_change = PreChangeMode::kVector;
    Eigen::MatrixXd d = Eigen::VectorXd::LinSpaced(100, 0.5, 3.0).asDiagonal();
    sch.segments.push_back({1, 1500, CovarianceSpec{d, Eigen::VectorXd::Zero(100)}});
    std::vector<Batch> raw;
    const auto s = scenario_stream(sch, 10, 100, 3, &raw);
    REQUIRE(raw.size() == 1500);
    CHECK_FALSE(s.samples[0].segment_J);
    CHECK(max_magnitude_correlation(raw[17]) == s.samples[17].V);
    std::vector<double> v;
    for (const auto& x : s.samples) v.push_back(x.V);
    CHECK(std::abs(mle_J(v, 10, 100) - 1.0) < 0.1);
}
