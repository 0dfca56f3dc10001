#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "../support/oracles.hpp"
#include "dppgrpo/dpp_kernel.hpp"
#include "dppgrpo/errors.hpp"

using namespace dppgrpo;

TEST_CASE("kernel of identical and orthogonal pairs") {
    EmbeddingSet same;
    same.push_back(oracle::basis("x", 3, 0));
    same.push_back(oracle::basis("x2", 3, 0));
    CHECK(build_kernel(same).entries() == Eigen::Matrix2d::Ones());

    EmbeddingSet orth;
    orth.push_back(oracle::basis("a", 2, 0));
    orth.push_back(oracle::basis("b", 2, 1));
    CHECK(build_kernel(orth).entries() == Eigen::Matrix2d::Identity());
}

TEST_CASE("kernel off-diagonal at 45 degrees") {
    EmbeddingSet set;
    set.push_back(oracle::basis("a", 2, 0));
    Eigen::VectorXd v(2);
    v << std::sqrt(2.0) / 2.0, std::sqrt(2.0) / 2.0;
    set.push_back({"b", v, {}});
    const auto k = build_kernel(set);
    CHECK(k(0, 1) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(k(1, 0) == k(0, 1));
}

TEST_CASE("kernel rejects non-normalized input") {
    EmbeddingSet set;
    Eigen::VectorXd v(2);
    v << 1.0, 1.0;
    set.push_back({"a", v, {}});
    CHECK_THROWS_AS((void)build_kernel(set), ValidationError);
}

TEST_CASE("KernelMatrix validates its shape") {
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.4, 1.0;
    CHECK_THROWS_AS(KernelMatrix{asym}, ValidationError);
    Eigen::MatrixXd diag(2, 2);
    diag << 2.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(KernelMatrix{diag}, ValidationError);
    CHECK_THROWS_AS(KernelMatrix{Eigen::MatrixXd::Identity(2, 3)}, ValidationError);
}

TEST_CASE("log det examples") {
    CHECK(log_det_regularized(KernelMatrix{Eigen::MatrixXd::Identity(3, 3)}) ==
          doctest::Approx(3.0 * std::numbers::ln2).epsilon(1e-14));
    CHECK(log_det_regularized(KernelMatrix{Eigen::MatrixXd::Ones(2, 2)}) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(log_det_regularized(KernelMatrix{}) == 0.0);
}

TEST_CASE("cholesky reports failing pivot") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS((void)cholesky_lower(a), NumericalError);
    Eigen::MatrixXd spd(2, 2);
    spd << 4.0, 2.0, 2.0, 3.0;
    const auto l = cholesky_lower(spd);
    CHECK((l * l.transpose() - spd).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(l(0, 1) == 0.0);
}

TEST_CASE("principal submatrix") {
    Eigen::MatrixXd m(3, 3);
    m << 1.0, 0.1, 0.2, 0.1, 1.0, 0.3, 0.2, 0.3, 1.0;
    const KernelMatrix k(m);
    const auto sub = principal_submatrix(k, {0, 2});
    REQUIRE(sub.size() == 2);
    CHECK(sub(0, 1) == 0.2);
    CHECK(sub(1, 0) == 0.2);
    CHECK(principal_submatrix(k, {}).size() == 0);
    CHECK_THROWS_AS((void)principal_submatrix(k, {1, 1}), ValidationError);
    CHECK_THROWS_AS((void)principal_submatrix(k, {3}), ValidationError);
}

TEST_CASE("log det agrees with cofactor expansion") {
    Rng rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(8));
        const auto set = oracle::random_unit_set(rng, n, d);
        const auto k = build_kernel(set);
        const double expected = std::log(oracle::cofactor_determinant(k.entries() + Eigen::MatrixXd::Identity(n, n)));
        CHECK(std::abs(log_det_regularized(k) - expected) <= 1e-9);
    }
}

TEST_CASE("log det is monotone under inclusion") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        const auto set = oracle::random_unit_set(rng, n, 1 + static_cast<Eigen::Index>(rng.below(10)));
        const auto k = build_kernel(set);
        std::vector<std::size_t> b(n);
        std::iota(b.begin(), b.end(), 0);
        std::vector<std::size_t> a;
        for (std::size_t i : b) {
            if (rng.uniform() < 0.5) a.push_back(i);
        }
        CHECK(log_det_regularized(principal_submatrix(k, a)) <= log_det_regularized(k) + 1e-12);
    }
}

TEST_CASE("pivots of L + I are at least one") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(10);
        const auto set = oracle::random_unit_set(rng, n, 1 + static_cast<Eigen::Index>(rng.below(6)));
        const auto l = cholesky_lower(build_kernel(set).entries() + Eigen::MatrixXd::Identity(n, n));
        CHECK(l.diagonal().minCoeff() >= 1.0 - 1e-12);
    }
}
