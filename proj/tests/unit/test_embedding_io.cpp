#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "../support/oracles.hpp"
#include "dppgrpo/embedding_io.hpp"
#include "dppgrpo/errors.hpp"

using namespace dppgrpo;

namespace {

std::string error_of(auto&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse two 3-dim records") {
    const auto set = parse_embeddings(R"({"id":"a","vector":[1,0,0]}
{"id":"b","vector":[0,1,0],"meta":{"mode":"2"}}
)");
    CHECK(set.size() == 2);
    REQUIRE(set.dim().has_value());
    CHECK(*set.dim() == 3);
    CHECK(set.at("b").meta.at("mode") == "2");
    CHECK(*set.index_of("b") == 1);
}

TEST_CASE("dimension mismatch names the offending record") {
    const auto msg = error_of([] {
        (void)parse_embeddings(R"({"id":"a","vector":[1,0,0]}
{"id":"b","vector":[0,1,0]}
{"id":"third","vector":[0,0,1,0]}
)");
    });
    CHECK(msg.find("third") != std::string::npos);
}

TEST_CASE("empty input has no dimension") {
    const auto set = parse_embeddings("");
    CHECK(set.empty());
    CHECK_FALSE(set.dim().has_value());
    CHECK(parse_embeddings("\n\n").empty());
}

TEST_CASE("rejects duplicate ids, non-finite and malformed records") {
    CHECK(error_of([] { (void)parse_embeddings("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"a\",\"vector\":[2]}"); })
              .find("duplicate") != std::string::npos);
    CHECK_THROWS_AS((void)parse_embeddings(R"({"id":"a","vector":[1e999, 0]})"), ValidationError);
    CHECK_THROWS_AS((void)parse_embeddings(R"({"id":"a","vector":[null, 0]})"), ValidationError);
    CHECK_THROWS_AS((void)parse_embeddings(R"({"id":"a","vector":[]})"), ValidationError);
    CHECK_THROWS_AS((void)parse_embeddings(R"({"id":"a"})"), ValidationError);
    CHECK_THROWS_AS((void)parse_embeddings(R"({"id":"a","vector":[1],"extra":1})"), ValidationError);
    CHECK_THROWS_AS((void)parse_embeddings("{not json"), ValidationError);

    EmbeddingSet set;
    Eigen::VectorXd v(2);
    v << 1.0, std::nan("");
    CHECK_THROWS_AS(set.push_back({"x", v, {}}), ValidationError);
}

TEST_CASE("unknown id lookup names the id") {
    const auto set = parse_embeddings(R"({"id":"a","vector":[1]})");
    CHECK(error_of([&] { (void)set.at("missing"); }).find("missing") != std::string::npos);
}

TEST_CASE("normalize examples") {
    Eigen::VectorXd v(2);
    v << 3.0, 4.0;
    const auto n = normalize({"p", v, {}});
    CHECK(n.vector[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n.vector[1] == doctest::Approx(0.8).epsilon(1e-15));

    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
    e1[0] = 1.0;
    CHECK(normalize({"e", e1, {}}).vector == e1);

    CHECK_THROWS_AS((void)normalize({"z", Eigen::VectorXd::Zero(2), {}}), ValidationError);
    Eigen::VectorXd tiny = Eigen::VectorXd::Constant(2, 1e-14);
    CHECK_THROWS_AS((void)normalize({"t", tiny, {}}), ValidationError);
}

TEST_CASE("normalize is idempotent and yields unit norm") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(16));
        Eigen::VectorXd v(d);
        for (Eigen::Index i = 0; i < d; ++i) v[i] = 10.0 * rng.normal();
        const auto once = normalize({"v", v, {}});
        const auto twice = normalize(once);
        CHECK(std::abs(once.vector.norm() - 1.0) <= 1e-12);
        CHECK((once.vector - twice.vector).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("require_unit tolerance") {
    Eigen::VectorXd v(2);
    v << 1.0 + 5e-10, 0.0;
    CHECK_NOTHROW(require_unit(Embedding{"ok", v, {}}));
    v[0] = 1.0 + 1e-8;
    CHECK_THROWS_AS(require_unit(Embedding{"off", v, {}}), ValidationError);
}

TEST_CASE("load, save, load round-trips bit for bit") {
    Rng rng(5);
    const auto dir = std::filesystem::temp_directory_path() / "dppgrpo_io_test";
    std::filesystem::create_directories(dir);
    for (int trial = 0; trial < 20; ++trial) {
        EmbeddingSet set;
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(12));
        const std::size_t n = rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::VectorXd v(d);
            for (Eigen::Index k = 0; k < d; ++k) v[k] = rng.normal() * std::pow(10.0, rng.normal() * 3.0);
            set.push_back({"id" + std::to_string(i), v, {{"k", "v" + std::to_string(i)}}});
        }
        const auto path = dir / "rt.jsonl";
        save_embeddings(set, path);
        const auto back = load_embeddings(path);
        save_embeddings(back, path);
        const auto again = load_embeddings(path);
        REQUIRE(again.size() == set.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
            CHECK(again[i].id == set[i].id);
            CHECK(again[i].meta == set[i].meta);
            REQUIRE(again[i].vector.size() == set[i].vector.size());
            for (Eigen::Index k = 0; k < d; ++k) CHECK(again[i].vector[k] == set[i].vector[k]);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing file is a validation error") {
    CHECK_THROWS_AS((void)load_embeddings("/nonexistent/nowhere.jsonl"), ValidationError);
}
