#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "maxcorr/stats.hpp"

using namespace maxcorr;

namespace {

Batch random_batch(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Batch b(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) b(i, j) = normal(rng);
    return b;
}

// Textbook two-pass covariance, element by element.
Eigen::MatrixXd two_pass_covariance(const Batch& x) {
    const auto n = x.rows();
    const auto p = x.cols();
    std::vector<double> mean(p, 0.0);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) mean[j] += x(i, j);
        mean[j] /= static_cast<double>(n);
    }
    Eigen::MatrixXd S(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = 0; b < p; ++b) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            S(a, b) = s / static_cast<double>(n - 1);
        }
    return S;
}

double pearson(const Batch& x, Eigen::Index a, Eigen::Index b) {
    const auto n = x.rows();
    double ma = 0, mb = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        ma += x(i, a);
        mb += x(i, b);
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sab += (x(i, a) - ma) * (x(i, b) - mb);
        saa += (x(i, a) - ma) * (x(i, a) - ma);
        sbb += (x(i, b) - mb) * (x(i, b) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Exhaustive scan over every ordered pair (i, j), i != j, of the correlation matrix.
double all_pairs_max(const Eigen::MatrixXd& R) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < R.rows(); ++i)
        for (Eigen::Index j = 0; j < R.cols(); ++j)
            if (i != j) best = std::max(best, std::abs(R(i, j)));
    return best;
}

}  // namespace

TEST_CASE("sample_covariance of a single pair") {
    Batch x(2, 2);
    x << 0, 0, 2, 2;
    const Eigen::MatrixXd S = sample_covariance(x);
    CHECK(S(0, 0) == 2.0);
    CHECK(S(0, 1) == 2.0);
    CHECK(S(1, 0) == 2.0);
    CHECK(S(1, 1) == 2.0);
}

TEST_CASE("constant column has exactly zero variance") {
    Batch x = random_batch(8, 3, 1);
    x.col(1).setConstant(0.1);
    const Eigen::MatrixXd S = sample_covariance(x);
    CHECK(S(1, 1) == 0.0);
    CHECK(S(0, 1) == 0.0);
}

TEST_CASE("sample_covariance matches the two-pass oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Batch x = random_batch(10, 5, seed) * 3.0 + Batch::Constant(10, 5, 7.0);
        const Eigen::MatrixXd S = sample_covariance(x);
        const Eigen::MatrixXd oracle = two_pass_covariance(x);
        CHECK((S - oracle).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(S == S.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("sample_covariance rejects bad input") {
    CHECK_THROWS_AS(sample_covariance(Batch(1, 3)), InvalidArgument);
    Batch x = random_batch(5, 3, 2);
    x(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sample_covariance(x), InvalidArgument);
    x(2, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(sample_covariance(x), InvalidArgument);
}

TEST_CASE("correlation_matrix examples") {
    const Eigen::MatrixXd I3 = correlation_matrix(Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(3, 3)));
    CHECK(I3 == Eigen::MatrixXd::Identity(3, 3));

    Eigen::MatrixXd S(2, 2);
    S << 2, 2, 2, 2;
    CHECK(correlation_matrix(S) == Eigen::MatrixXd::Ones(2, 2));
}

TEST_CASE("correlation_matrix agrees with the Pearson formula") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd A(5, 5);
        for (int i = 0; i < 25; ++i) A.data()[i] = normal(rng);
        const Eigen::MatrixXd S = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
        const Eigen::MatrixXd R = correlation_matrix(S);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const double expected = i == j ? 1.0 : S(i, j) / std::sqrt(S(i, i) * S(j, j));
                CHECK(std::abs(R(i, j) - expected) <= 1e-14);
            }
    }
}

TEST_CASE("zero variance column is reported by index") {
    Batch x = random_batch(10, 4, 3);
    x.col(2).setConstant(-4.2);
    try {
        (void)max_magnitude_correlation(x);
        FAIL("expected ZeroVarianceColumn");
    } catch (const ZeroVarianceColumn& e) {
        CHECK(e.column() == 2);
    }
}

TEST_CASE("correlation clamp tolerates rounding only") {
    Eigen::MatrixXd S(2, 2);
    S << 1, 1 + 5e-13, 1 + 5e-13, 1;
    CHECK(correlation_matrix(S)(0, 1) == 1.0);
    S << 1, 1.1, 1.1, 1;
    CHECK_THROWS_AS(correlation_matrix(S), InternalError);
}

TEST_CASE("V of duplicated and negated columns is one") {
    Batch x = random_batch(10, 4, 5);
    x.col(1) = x.col(0);
    CHECK(max_magnitude_correlation(x) == doctest::Approx(1.0).epsilon(1e-15));
    x = random_batch(10, 4, 5);
    x.col(1) = -x.col(0);
    CHECK(max_magnitude_correlation(x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(max_magnitude_correlation(x) <= 1.0);
}

TEST_CASE("upper-triangle scan equals exhaustive all-pairs scan") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Batch x = random_batch(10, 100, 100 + seed);
        const Eigen::MatrixXd R = correlation_matrix(sample_covariance(x));
        CHECK(max_magnitude_correlation(x) == all_pairs_max(R));
    }
}

TEST_CASE("V needs two columns") {
    CHECK_THROWS_AS(max_magnitude_correlation(random_batch(10, 1, 1)), InvalidArgument);
}

TEST_CASE("V is invariant to column permutation and affine maps") {
    std::mt19937_64 rng(99);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Batch x = random_batch(10, 12, 500 + seed);
        const double v = max_magnitude_correlation(x);

        std::vector<int> perm(12);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Batch permuted(10, 12);
        for (int j = 0; j < 12; ++j) permuted.col(j) = x.col(perm[j]);
        CHECK(max_magnitude_correlation(permuted) == doctest::Approx(v).epsilon(1e-13));

        std::uniform_real_distribution<double> scale(0.1, 10.0);
        Batch affine = x;
        for (int j = 0; j < 12; ++j) {
            const double a = scale(rng) * (j % 2 == 0 ? 1.0 : -1.0);
            affine.col(j) = a * affine.col(j).array() + scale(rng) * 5.0;
        }
        CHECK(max_magnitude_correlation(affine) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("p = 2 reduces to |Pearson|") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Batch x = random_batch(3 + static_cast<int>(seed), 2, 900 + seed);
        CHECK(max_magnitude_correlation(x) == doctest::Approx(std::abs(pearson(x, 0, 1))).epsilon(1e-13));
    }
}

TEST_CASE("float scalar instantiation") {
    Eigen::MatrixXf x = random_batch(10, 6, 4).cast<float>();
    const float v = max_magnitude_correlation(x);
    CHECK(v == doctest::Approx(max_magnitude_correlation(x.cast<double>().eval())).epsilon(1e-5));
}
