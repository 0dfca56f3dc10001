#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "../support/oracles.hpp"
#include "dppgrpo/config.hpp"
#include "dppgrpo/errors.hpp"
#include "dppgrpo/report.hpp"
#include "dppgrpo/sim_world.hpp"

using namespace dppgrpo;

namespace {

ExperimentSettings quick_settings(int iterations) {
    ExperimentSettings s;
    s.training.iterations = iterations;
    s.training.learning_rate = 0.1;
    return s;
}

}  // namespace

TEST_CASE("default world shape") {
    const auto w = make_world(WorldParams{});
    CHECK(w.modes() == 6);
    CHECK(w.vocabulary->size() == 60);
    CHECK(w.query.dim() == 16);
    CHECK(is_unit(w.query.vector));
    for (std::size_t i = 0; i < w.labels.size(); ++i) {
        CHECK(w.labels[i] == static_cast<int>(i % 6));
        CHECK(is_unit((*w.vocabulary)[i].vector));
        CHECK((*w.vocabulary)[i].meta.at("mode") == std::to_string(w.labels[i]));
    }
    for (int a = 0; a < 6; ++a) {
        CHECK(w.query.vector.dot(w.centers[static_cast<std::size_t>(a)].vector) > 0.0);
        for (int b = a + 1; b < 6; ++b) {
            CHECK(w.centers[static_cast<std::size_t>(a)].vector.dot(w.centers[static_cast<std::size_t>(b)].vector) <=
                  0.3 + 1e-12);
        }
    }
}

TEST_CASE("zero noise puts candidates on their centers") {
    WorldParams p;
    p.sigma = 0.0;
    const auto w = make_world(p);
    for (std::size_t i = 0; i < w.labels.size(); ++i) {
        const auto& c = w.centers[static_cast<std::size_t>(w.labels[i])].vector;
        CHECK(((*w.vocabulary)[i].vector - c).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("single mode always has full coverage") {
    WorldParams p;
    p.modes = 1;
    p.center_overlap = 0.0;
    p.candidates = 10;
    const auto w = make_world(p);
    const auto r = rollout_policy(ToyPolicy(w.vocabulary), w.query, 4, RolloutMode::Sample, 9);
    CHECK(mode_coverage(w, r.selected_indices) == 1.0);
}

TEST_CASE("nearest center recovers every label") {
    WorldParams p;
    p.modes = 4;
    p.dim = 16;
    p.sigma = 0.1;
    p.seed = 77;
    const auto w = make_world(p);
    // Independent classification by raw dot products.
    for (std::size_t i = 0; i < w.labels.size(); ++i) {
        int best = 0;
        for (int m = 1; m < 4; ++m) {
            if ((*w.vocabulary)[i].vector.dot(w.centers[static_cast<std::size_t>(m)].vector) >
                (*w.vocabulary)[i].vector.dot(w.centers[static_cast<std::size_t>(best)].vector)) {
                best = m;
            }
        }
        CHECK(best == w.labels[i]);
        CHECK(nearest_center(w, (*w.vocabulary)[i]) == w.labels[i]);
    }
}

TEST_CASE("world construction is deterministic and validated") {
    WorldParams p;
    p.seed = 3;
    const auto a = make_world(p);
    const auto b = make_world(p);
    CHECK(serialize_embeddings(*a.vocabulary) == serialize_embeddings(*b.vocabulary));
    CHECK(a.query.vector == b.query.vector);

    WorldParams bad;
    bad.modes = 17;
    CHECK_THROWS_AS((void)make_world(bad), ValidationError);
    bad = {};
    bad.center_overlap = 0.4;
    CHECK_THROWS_AS((void)make_world(bad), ValidationError);
    bad = {};
    bad.candidates = 3;
    CHECK_THROWS_AS((void)make_world(bad), ValidationError);
}

TEST_CASE("mode coverage counts distinct labels") {
    const auto w = make_world(WorldParams{});
    CHECK(mode_coverage(w, {0, 6, 12}) == doctest::Approx(1.0 / 6.0));
    CHECK(mode_coverage(w, {0, 1, 2, 3, 4, 5}) == 1.0);
    CHECK(mode_coverage(w, {}) == 0.0);
}

TEST_CASE("summaries use the population deviation") {
    const auto s = summarize({1.0, 2.0, 3.0});
    CHECK(s.mean == 2.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("relevance-only training collapses onto few modes") {
    const auto w = make_world(WorldParams{.seed = 2024});
    const std::vector<ArmSpec> arms{{"composite", {0.5, 0.5}}, {"relevance_only", {0.0, 1.0}}};
    const auto untrained = run_experiment(w, arms, quick_settings(0));
    const auto trained = run_experiment(w, arms, quick_settings(1200));
    const double m = 1.0 / 6.0;
    CHECK(trained.arms[1].mode_coverage.mean < untrained.arms[1].mode_coverage.mean);
    CHECK(trained.arms[1].mode_coverage.mean <= 2.0 * m);
    CHECK(trained.arms[0].mode_coverage.mean > trained.arms[1].mode_coverage.mean);
}

TEST_CASE("set-size returns diminish on average for the composite arm") {
    const auto w = make_world(WorldParams{.seed = 2024});
    const std::vector<ArmSpec> arms{{"composite", {0.5, 0.5}}, {"relevance_only", {0.0, 1.0}}};
    const auto r = run_experiment(w, arms, quick_settings(1200));
    const auto& runs = r.arms[0].runs;
    const std::size_t k = runs.front().vendi_curve.size();
    REQUIRE(k == 8);
    std::vector<double> inc(k - 1, 0.0);
    for (const auto& run : runs) {
        for (std::size_t t = 1; t < k; ++t) inc[t - 1] += run.vendi_curve[t] - run.vendi_curve[t - 1];
    }
    for (auto& x : inc) x /= static_cast<double>(runs.size());

    // Least-squares slope of the increments against the step index.
    const double n = static_cast<double>(inc.size());
    const double tbar = (n - 1.0) / 2.0;
    const double ibar = std::accumulate(inc.begin(), inc.end(), 0.0) / n;
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < inc.size(); ++t) {
        num += (static_cast<double>(t) - tbar) * (inc[t] - ibar);
        den += (static_cast<double>(t) - tbar) * (static_cast<double>(t) - tbar);
    }
    CHECK(num / den < 0.0);
    const double early = (inc[0] + inc[1] + inc[2]) / 3.0;
    const double late = (inc[4] + inc[5] + inc[6]) / 3.0;
    CHECK(early > late);
}

TEST_CASE("experiments are reproducible byte for byte") {
    const auto w = make_world(WorldParams{.seed = 9});
    ExperimentSettings s = quick_settings(60);
    s.seeds = {1, 2};
    const std::vector<ArmSpec> arms{{"a", {0.5, 0.5}}, {"b", {0.0, 1.0}}};
    const auto x = to_json(run_experiment(w, arms, s), *w.vocabulary).dump();
    const auto y = to_json(run_experiment(w, arms, s), *w.vocabulary).dump();
    CHECK(x == y);
    CHECK_THROWS_AS((void)run_experiment(w, {arms[0]}, s), ValidationError);
}

TEST_CASE("context kinds parse") {
    CHECK(parse_context_kind("random_subset") == ContextKind::RandomSubset);
    CHECK(parse_context_kind("mode_representatives") == ContextKind::ModeRepresentatives);
    CHECK_THROWS_AS((void)parse_context_kind("all"), ValidationError);
}
