#include "dppgrpo/commands.hpp"

#include <fstream>
#include <set>

#include "dppgrpo/errors.hpp"
#include "dppgrpo/metrics.hpp"
#include "dppgrpo/report.hpp"
#include "dppgrpo/rollout.hpp"
#include "dppgrpo/sim_world.hpp"

namespace dppgrpo {

using nlohmann::json;

namespace {

json weights_json(const RewardWeights& w) { return {{"lambda_div", w.lambda_div}, {"lambda_rel", w.lambda_rel}}; }

json probs_json(const Eigen::VectorXd& p, const EmbeddingSet& vocab) {
    json out = json::object();
    for (std::size_t i = 0; i < vocab.size(); ++i) out[vocab[i].id] = p[static_cast<Eigen::Index>(i)];
    return out;
}

EmbeddingSet without(const EmbeddingSet& set, const std::set<std::string>& excluded) {
    EmbeddingSet out;
    for (const auto& e : set) {
        if (!excluded.contains(e.id)) out.push_back(e);
    }
    return out;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

json run_score(const ScoreArgs& args) {
    args.weights.validate();
    const EmbeddingSet set = normalize_all(load_embeddings(args.embeddings));
    const Embedding& query = set.at(args.query_id);
    ReferenceSet ref(query);
    std::set<std::string> ref_ids;
    for (const auto& id : args.reference_ids) {
        ref.add(set.at(id));
        ref_ids.insert(id);
    }
    json candidates = json::array();
    for (const auto& e : set) {
        if (ref_ids.contains(e.id)) continue;
        json row = to_json(composite_reward(e, ref, args.weights));
        row["id"] = e.id;
        candidates.push_back(std::move(row));
    }
    return {{"command", "score"},
            {"config",
             {{"embeddings", args.embeddings.generic_string()},
              {"query_id", args.query_id},
              {"reference_ids", args.reference_ids},
              {"weights", weights_json(args.weights)}}},
            {"candidates", candidates}};
}

json run_select(const SelectArgs& args) {
    args.weights.validate();
    if (args.k < 1) throw ValidationError("--k must be >= 1");
    const EmbeddingSet set = normalize_all(load_embeddings(args.embeddings));
    const Embedding& query = set.at(args.query_id);
    const EmbeddingSet pool = without(set, {args.query_id});

    RolloutResult result;
    if (args.mode == "greedy") {
        result = greedy_select(pool, query, args.k, args.weights);
    } else if (args.mode == "bruteforce") {
        const SubsetSelection best = brute_force_select(pool, args.k);
        ReferenceSet partial(query);
        for (auto i : best.indices) {
            const auto r = composite_reward(pool[i], partial, args.weights);
            result.per_step.push_back({r.diversity_gain, r.relevance, r.composite});
            result.selected.push_back(pool[i]);
            result.selected_indices.push_back(i);
            partial.add(pool[i]);
        }
        result.final_diversity = diversity_score(result.selected);
    } else {
        throw ValidationError("unknown select mode '" + args.mode + "' (expected greedy or bruteforce)");
    }
    json report = to_json(result);
    const EmbeddingSet chosen(result.selected);
    if (!chosen.empty()) report["metrics"] = to_json(evaluate_set(chosen, &query));
    return {{"command", "select"},
            {"config",
             {{"embeddings", args.embeddings.generic_string()},
              {"query_id", args.query_id},
              {"k", args.k},
              {"mode", args.mode},
              {"weights", weights_json(args.weights)}}},
            {"result", report}};
}

json run_eval(const EvalArgs& args) {
    const EmbeddingSet set = normalize_all(load_embeddings(args.embeddings));
    std::optional<Embedding> query;
    EmbeddingSet items = set;
    if (args.query_id) {
        query = set.at(*args.query_id);
        items = without(set, {*args.query_id});
    }
    if (items.empty()) throw ValidationError("eval needs at least one embedding besides the query");
    const MetricReport m = evaluate_set(items, query ? &*query : nullptr, args.top_m);
    json cfg = {{"embeddings", args.embeddings.generic_string()}};
    cfg["query_id"] = args.query_id ? json(*args.query_id) : json(nullptr);
    cfg["top_m"] = m.top_m;
    json metrics = to_json(m);
    metrics["log_det_diversity"] = diversity_score(items);
    return {{"command", "eval"}, {"config", cfg}, {"metrics", metrics}};
}

json run_train(const TrainConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    TrainingTask task;
    std::optional<SimWorld> world;
    if (config.embeddings) {
        const EmbeddingSet set = normalize_all(load_embeddings(*config.embeddings));
        const Embedding& query = set.at(config.query_id);
        FixedContext fixed;
        std::set<std::string> ref_ids;
        for (const auto& id : config.reference_ids) {
            fixed.members.push_back(set.at(id));
            ref_ids.insert(id);
        }
        auto vocab = std::make_shared<EmbeddingSet>(without(set, ref_ids));
        if (vocab->empty()) throw ValidationError("training vocabulary is empty after removing reference ids");
        task = TrainingTask{std::move(vocab), query, std::move(fixed)};
    } else {
        world = make_world(*config.world);
        ExperimentSettings settings;
        settings.context = config.context;
        settings.context_max = config.context_max;
        task = make_training_task(*world, settings);
    }
    if (config.k > task.vocabulary->size()) {
        throw ValidationError("k = " + std::to_string(config.k) + " exceeds the vocabulary size " +
                              std::to_string(task.vocabulary->size()));
    }
    const ToyPolicy initial(task.vocabulary);
    const TrainResult trained = train(config.training, task, initial);
    const RolloutResult roll = rollout_policy(trained.policy, task.query, config.k, config.rollout_mode,
                                              mix_seed(config.training.seed, 1), config.training.weights);

    const ReferenceSet empty_context(task.query);
    json report = {{"command", "train"},
                   {"config", to_json(config)},
                   {"seed", config.training.seed},
                   {"policy", policy_to_json(trained.policy)},
                   {"initial_probs", probs_json(policy_probs(initial, empty_context), *task.vocabulary)},
                   {"final_probs", probs_json(policy_probs(trained.policy, empty_context), *task.vocabulary)},
                   {"rollout", to_json(roll)}};
    if (const auto* fixed = std::get_if<FixedContext>(&task.contexts); fixed && !fixed->members.empty()) {
        const ReferenceSet ctx(task.query, fixed->members);
        report["initial_context_probs"] = probs_json(policy_probs(initial, ctx), *task.vocabulary);
        report["final_context_probs"] = probs_json(policy_probs(trained.policy, ctx), *task.vocabulary);
    }
    const EmbeddingSet chosen(roll.selected);
    report["metrics"] = to_json(evaluate_set(chosen, &task.query));
    if (world) report["metrics"]["mode_coverage"] = mode_coverage(*world, roll.selected_indices);
    if (!trained.log.empty()) report["final_log"] = to_json(trained.log.back());

    write_text_file(out_dir / "config.json", to_json(config).dump(2) + "\n");
    write_text_file(out_dir / "train_log.jsonl", training_log_jsonl(trained.log));
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");
    return report;
}

json run_simulate(const SimulateConfig& config, const std::filesystem::path& out_dir,
                  const std::optional<std::filesystem::path>& csv) {
    config.validate();
    const SimWorld world = make_world(config.world);
    const ExperimentResult result = run_experiment(world, config.arms, config.experiment);

    json report = {{"command", "simulate"},
                   {"config", to_json(config)},
                   {"seed", config.world.seed},
                   {"experiment", to_json(result, *world.vocabulary)}};

    write_text_file(out_dir / "config.json", to_json(config).dump(2) + "\n");
    for (const auto& arm : result.arms) {
        for (const auto& run : arm.runs) {
            write_text_file(out_dir / "logs" / (arm.arm.name + "_seed" + std::to_string(run.seed) + ".jsonl"),
                            training_log_jsonl(run.log));
        }
    }
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");
    if (csv) write_text_file(*csv, experiment_csv(result));
    return report;
}

}  // namespace dppgrpo
