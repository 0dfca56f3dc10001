#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "dppgrpo/config.hpp"
#include "dppgrpo/dpp_kernel.hpp"
#include "dppgrpo/errors.hpp"
#include "dppgrpo/grpo.hpp"
#include "dppgrpo/metrics.hpp"
#include "dppgrpo/report.hpp"
#include "dppgrpo/reward.hpp"
#include "dppgrpo/rollout.hpp"
#include "dppgrpo/sim_world.hpp"

namespace py = pybind11;
using namespace dppgrpo;

namespace {

using Items = std::vector<Embedding>;

py::dict breakdown(const RewardBreakdown& r) {
    py::dict d;
    d["diversity_gain"] = r.diversity_gain;
    d["relevance"] = r.relevance;
    d["composite"] = r.composite;
    return d;
}

py::dict rollout_dict(const RolloutResult& r) {
    py::list steps;
    for (const auto& s : r.per_step) {
        py::dict d;
        d["marginal_gain"] = s.marginal_gain;
        d["relevance"] = s.relevance;
        d["composite"] = s.composite;
        steps.append(d);
    }
    py::dict d;
    d["ids"] = r.ids();
    d["per_step"] = steps;
    d["final_diversity"] = r.final_diversity;
    return d;
}

// Runs the simulation harness in memory and returns the JSON report text.
std::string simulate_json(const std::string& config_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    const SimulateConfig cfg = parse_simulate_config(j);
    const SimWorld world = make_world(cfg.world);
    const ExperimentResult result = run_experiment(world, cfg.arms, cfg.experiment);
    return nlohmann::json{{"config", to_json(cfg)}, {"experiment", to_json(result, *world.vocabulary)}}.dump();
}

}  // namespace

PYBIND11_MODULE(_dppgrpo, m) {
    m.doc() = "Diversity-aware selection, GRPO surrogate and spectral metrics over embeddings";

    static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
    static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            PyErr_SetString(validation_error.ptr(), e.what());
        } catch (const NumericalError& e) {
            PyErr_SetString(numerical_error.ptr(), e.what());
        }
    });

    py::class_<Embedding>(m, "Embedding")
        .def(py::init([](std::string id, Eigen::VectorXd v, std::map<std::string, std::string> meta) {
                 return Embedding{std::move(id), std::move(v), std::move(meta)};
             }),
             py::arg("id"), py::arg("vector"), py::arg("meta") = std::map<std::string, std::string>{})
        .def_readwrite("id", &Embedding::id)
        .def_readwrite("vector", &Embedding::vector)
        .def_readwrite("meta", &Embedding::meta)
        .def("__repr__", [](const Embedding& e) {
            return "Embedding(id='" + e.id + "', dim=" + std::to_string(e.vector.size()) + ")";
        });

    m.def("normalize", &normalize, py::arg("embedding"));
    m.def("load_embeddings", [](const std::string& path) { return load_embeddings(path).items(); }, py::arg("path"));
    m.def("save_embeddings", [](const Items& items, const std::string& path) { save_embeddings(EmbeddingSet(items), path); },
          py::arg("items"), py::arg("path"));

    m.def("build_kernel", [](const Items& items) { return build_kernel(EmbeddingSet(items)).entries(); }, py::arg("items"));
    m.def("log_det_regularized", [](const Eigen::MatrixXd& l) { return log_det_regularized(KernelMatrix(l)); },
          py::arg("kernel"), "log det(L + I) of a symmetric unit-diagonal kernel");

    m.def("diversity_score", py::overload_cast<const Items&>(&diversity_score), py::arg("items"));
    m.def("marginal_gain",
          [](const Embedding& c, const Embedding& q, const Items& members) { return marginal_gain(c, ReferenceSet(q, members)); },
          py::arg("candidate"), py::arg("query"), py::arg("members") = Items{});
    m.def("relevance",
          [](const Embedding& c, const Embedding& q, const Items& members) {
              return relevance_or_query(c, ReferenceSet(q, members));
          },
          py::arg("candidate"), py::arg("query"), py::arg("members") = Items{},
          "Query-and-reference alignment; falls back to the query cosine for an empty reference set");
    m.def("composite_reward",
          [](const Embedding& c, const Embedding& q, const Items& members, double ld, double lr) {
              return breakdown(composite_reward(c, ReferenceSet(q, members), {ld, lr}));
          },
          py::arg("candidate"), py::arg("query"), py::arg("members") = Items{}, py::arg("lambda_div") = 0.5,
          py::arg("lambda_rel") = 0.5);

    m.def("compute_advantages", [](const std::vector<double>& r) { return compute_advantages(r); }, py::arg("rewards"));
    m.def("clipped_surrogate_term", &clipped_surrogate_term, py::arg("ratio"), py::arg("advantage"),
          py::arg("clip_epsilon") = 0.2);

    m.def("greedy_select",
          [](const Items& pool, const Embedding& q, std::size_t k, double ld, double lr) {
              return rollout_dict(greedy_select(EmbeddingSet(pool), q, k, {ld, lr}));
          },
          py::arg("pool"), py::arg("query"), py::arg("k"), py::arg("lambda_div") = 0.5, py::arg("lambda_rel") = 0.5);
    m.def("brute_force_select",
          [](const Items& pool, std::size_t k) {
              const auto s = brute_force_select(EmbeddingSet(pool), k);
              py::dict d;
              d["ids"] = s.ids;
              d["diversity"] = s.diversity;
              return d;
          },
          py::arg("pool"), py::arg("k"));

    m.def("vendi_score", [](const Items& items) { return vendi_score(EmbeddingSet(items)); }, py::arg("items"));
    m.def("truncated_spectral_entropy",
          [](const Items& items, std::size_t top_m) { return truncated_spectral_entropy(EmbeddingSet(items), top_m); },
          py::arg("items"), py::arg("top_m"));
    m.def("mean_alignment", [](const Items& items, const Embedding& q) { return mean_alignment(EmbeddingSet(items), q); },
          py::arg("items"), py::arg("query"));

    m.def("_simulate_json", &simulate_json, py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
}
