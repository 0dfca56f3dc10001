#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "../support/oracles.hpp"
#include "dppgrpo/errors.hpp"
#include "dppgrpo/rollout.hpp"

using namespace dppgrpo;
using oracle::basis;

namespace {

// Three orthogonal items plus a copy of the first.
EmbeddingSet oracle_pool() {
    EmbeddingSet pool;
    pool.push_back(basis("a", 3, 0));
    pool.push_back(basis("b", 3, 1));
    pool.push_back(basis("c", 3, 2));
    pool.push_back(basis("d", 3, 0));
    return pool;
}

}  // namespace

TEST_CASE("single-step rollout gains ln 2") {
    Rng rng(1);
    const auto vocab = std::make_shared<const EmbeddingSet>(oracle::random_unit_set(rng, 7, 4));
    const auto q = oracle::unit("q", oracle::random_unit(rng, 4));
    const auto r = rollout_policy(ToyPolicy(vocab), q, 1, RolloutMode::Sample, 3);
    REQUIRE(r.selected.size() == 1);
    CHECK(r.per_step[0].marginal_gain == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
    CHECK(r.final_diversity == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
}

TEST_CASE("rollout is reproducible and exhausts the vocabulary as a permutation") {
    Rng rng(2);
    const auto vocab = std::make_shared<const EmbeddingSet>(oracle::random_unit_set(rng, 9, 5));
    const auto q = oracle::unit("q", oracle::random_unit(rng, 5));
    const ToyPolicy policy(vocab);
    CHECK(rollout_policy(policy, q, 4, RolloutMode::Sample, 17).ids() ==
          rollout_policy(policy, q, 4, RolloutMode::Sample, 17).ids());

    const auto all = rollout_policy(policy, q, 9, RolloutMode::Sample, 5);
    auto idx = all.selected_indices;
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < 9; ++i) CHECK(idx[i] == i);

    CHECK_THROWS_AS((void)rollout_policy(policy, q, 10, RolloutMode::Sample, 5), ValidationError);
    CHECK_THROWS_AS((void)rollout_policy(policy, q, 0, RolloutMode::Sample, 5), ValidationError);
}

TEST_CASE("greedy-prob rollout breaks ties by id") {
    EmbeddingSet set;
    set.push_back(basis("zeta", 3, 0));
    set.push_back(basis("alpha", 3, 1));
    set.push_back(basis("mid", 3, 2));
    const auto vocab = std::make_shared<const EmbeddingSet>(set);
    const auto r = rollout_policy(ToyPolicy(vocab), basis("q", 3, 0), 3, RolloutMode::GreedyProb, 0);
    CHECK(r.ids() == std::vector<std::string>{"alpha", "mid", "zeta"});
}

TEST_CASE("masked rollouts never repeat and gains stay positive") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.below(12);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(6));
        const auto vocab = std::make_shared<const EmbeddingSet>(oracle::random_unit_set(rng, n, d));
        Eigen::VectorXd params(3 + static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = 2.0 * rng.normal();
        const auto q = oracle::unit("q", oracle::random_unit(rng, d));
        const auto r = rollout_policy(ToyPolicy(vocab, params), q, n, RolloutMode::Sample, rng.below(1000));
        const auto chosen = r.ids();
        const std::set<std::string> ids(chosen.begin(), chosen.end());
        CHECK(ids.size() == n);
        for (const auto& s : r.per_step) CHECK(s.marginal_gain > 1e-12);

        // A candidate left out of the prefix sees its gain shrink as the prefix grows.
        const auto& last = r.selected.back();
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t + 1 < r.selected.size(); ++t) {
            const std::vector<Embedding> prefix(r.selected.begin(), r.selected.begin() + static_cast<std::ptrdiff_t>(t));
            const double g = marginal_gain(last, ReferenceSet(q, prefix));
            CHECK(g <= prev + 1e-9);
            prev = g;
        }
    }
}

TEST_CASE("parse rollout mode") {
    CHECK(parse_rollout_mode("sample") == RolloutMode::Sample);
    CHECK(parse_rollout_mode("greedy-prob") == RolloutMode::GreedyProb);
    CHECK(parse_rollout_mode("greedy") == RolloutMode::GreedyProb);
    CHECK_THROWS_AS((void)parse_rollout_mode("beam"), ValidationError);
}

TEST_CASE("greedy picks the orthogonal item over the duplicate") {
    EmbeddingSet pool;
    pool.push_back(basis("x", 2, 0));
    pool.push_back(basis("x_dup", 2, 0));
    pool.push_back(basis("y", 2, 1));
    const auto q = oracle::unit("q", Eigen::Vector2d(1.0, 1.0));
    const auto r = greedy_select(pool, q, 2, {1.0, 0.0});
    CHECK(r.ids() == std::vector<std::string>{"x", "y"});
    CHECK(r.per_step[1].marginal_gain == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("greedy over the whole pool orders by decreasing utility") {
    const auto pool = oracle_pool();
    const auto q = oracle::unit("q", Eigen::Vector3d(1.0, 1.0, 1.0));
    const auto r = greedy_select(pool, q, 4, {1.0, 0.0});
    CHECK(r.selected.size() == 4);
    for (std::size_t t = 1; t < r.per_step.size(); ++t) {
        CHECK(r.per_step[t].composite <= r.per_step[t - 1].composite + 1e-12);
    }
    CHECK(r.ids().back() == "d");
    CHECK_THROWS_AS((void)greedy_select(pool, q, 5, {1.0, 0.0}), ValidationError);
}

TEST_CASE("greedy over orthogonal items gains ln 2 each step") {
    EmbeddingSet pool;
    for (Eigen::Index i = 0; i < 5; ++i) pool.push_back(basis("e" + std::to_string(i), 5, i));
    const auto r = greedy_select(pool, oracle::unit("q", Eigen::VectorXd::Ones(5)), 5, {1.0, 0.0});
    for (const auto& s : r.per_step) CHECK(s.marginal_gain == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
}

TEST_CASE("brute force examples") {
    const auto pool = oracle_pool();
    const auto best = brute_force_select(pool, 3);
    CHECK(best.ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(best.diversity == doctest::Approx(3.0 * std::numbers::ln2).epsilon(1e-14));

    const auto none = brute_force_select(pool, 0);
    CHECK(none.ids.empty());
    CHECK(none.diversity == 0.0);

    CHECK(brute_force_select(pool, 4).ids.size() == 4);
    CHECK_THROWS_AS((void)brute_force_select(pool, 5), ValidationError);
}

TEST_CASE("brute force refuses oversized enumerations with the count") {
    Rng rng(4);
    const auto pool = oracle::random_unit_set(rng, 40, 2);
    try {
        (void)brute_force_select(pool, 10);
        FAIL("expected rejection");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(std::to_string(binomial(40, 10))) != std::string::npos);
    }
    CHECK(binomial(5, 2) == 10);
    CHECK(binomial(4, 0) == 1);
    CHECK(binomial(3, 4) == 0);
}

TEST_CASE("greedy reaches 1 - 1/e of the optimum") {
    Rng rng(5);
    const double bound = 1.0 - 1.0 / std::numbers::e;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(12);
        const std::size_t k = 1 + rng.below(std::min<std::size_t>(4, n));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(8));
        const auto pool = oracle::random_unit_set(rng, n, d);
        const auto q = oracle::unit("q", oracle::random_unit(rng, d));
        const auto g = greedy_select(pool, q, k, {1.0, 0.0});
        const auto opt = brute_force_select(pool, k);
        CHECK(g.final_diversity >= bound * opt.diversity - 1e-12);
        CHECK(g.final_diversity <= opt.diversity + 1e-12);
    }
}
