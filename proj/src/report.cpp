#include "dppgrpo/report.hpp"

#include <sstream>

namespace dppgrpo {

using nlohmann::json;

json to_json(const RewardBreakdown& r) {
    return {{"diversity_gain", r.diversity_gain},
            {"relevance", r.relevance},
            {"composite", r.composite},
            {"lambda_div", r.lambda_div},
            {"lambda_rel", r.lambda_rel}};
}

json to_json(const StepReward& s) {
    return {{"marginal_gain", s.marginal_gain}, {"relevance", s.relevance}, {"composite", s.composite}};
}

json to_json(const RolloutResult& r) {
    json steps = json::array();
    for (const auto& s : r.per_step) steps.push_back(to_json(s));
    return {{"ids", r.ids()}, {"per_step", steps}, {"final_diversity", r.final_diversity}};
}

json to_json(const MetricReport& m) {
    json out = {{"vendi", m.vendi}, {"truncated_entropy", m.truncated_entropy}, {"n", m.n}, {"top_m", m.top_m}};
    out["mean_alignment"] = m.mean_alignment ? json(*m.mean_alignment) : json(nullptr);
    return out;
}

json to_json(const TrainLogRecord& rec) {
    return {{"iteration", rec.iteration},
            {"objective", rec.objective},
            {"mean_reward", rec.mean_reward},
            {"kl", rec.kl},
            {"policy_entropy", rec.policy_entropy}};
}

json to_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

json policy_to_json(const Eigen::VectorXd& params, const EmbeddingSet& vocabulary) {
    json biases = json::object();
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
        biases[vocabulary[i].id] = params[kNumFeatures + static_cast<Eigen::Index>(i)];
    }
    return {{"query_weight", params[0]}, {"reference_weight", params[1]}, {"offset", params[2]}, {"biases", biases}};
}

json policy_to_json(const ToyPolicy& policy) { return policy_to_json(policy.params(), policy.vocabulary()); }

json to_json(const ExperimentResult& r, const EmbeddingSet& vocabulary) {
    json arms = json::array();
    for (const auto& arm : r.arms) {
        json runs = json::array();
        for (const auto& run : arm.runs) {
            json steps = json::array();
            for (const auto& s : run.per_step) steps.push_back(to_json(s));
            runs.push_back({{"seed", run.seed},
                            {"policy", policy_to_json(run.params, vocabulary)},
                            {"selected_ids", run.selected_ids},
                            {"selected_modes", run.selected_labels},
                            {"per_step", steps},
                            {"final_diversity", run.final_diversity},
                            {"mode_coverage", run.mode_coverage},
                            {"vendi", run.vendi},
                            {"truncated_entropy", run.truncated_entropy},
                            {"mean_alignment", run.mean_alignment},
                            {"vendi_curve", run.vendi_curve}});
        }
        arms.push_back({{"name", arm.arm.name},
                        {"lambda_div", arm.arm.weights.lambda_div},
                        {"lambda_rel", arm.arm.weights.lambda_rel},
                        {"summary",
                         {{"mode_coverage", to_json(arm.mode_coverage)},
                          {"vendi", to_json(arm.vendi)},
                          {"truncated_entropy", to_json(arm.truncated_entropy)},
                          {"mean_alignment", to_json(arm.mean_alignment)}}},
                        {"runs", runs}});
    }
    return {{"seeds", r.seeds}, {"arms", arms}};
}

std::string training_log_jsonl(const std::vector<TrainLogRecord>& log) {
    std::string out;
    for (const auto& rec : log) {
        out += to_json(rec).dump();
        out += '\n';
    }
    return out;
}

std::string experiment_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "arm,lambda_div,lambda_rel,mode_coverage_mean,mode_coverage_std,vendi_mean,vendi_std,"
           "truncated_entropy_mean,truncated_entropy_std,mean_alignment_mean,mean_alignment_std\n";
    // json's number formatting keeps the CSV and the JSON report in agreement
    auto num = [](double v) { return json(v).dump(); };
    for (const auto& arm : r.arms) {
        out << arm.arm.name << ',' << num(arm.arm.weights.lambda_div) << ',' << num(arm.arm.weights.lambda_rel) << ','
            << num(arm.mode_coverage.mean) << ',' << num(arm.mode_coverage.std) << ',' << num(arm.vendi.mean) << ','
            << num(arm.vendi.std) << ',' << num(arm.truncated_entropy.mean) << ',' << num(arm.truncated_entropy.std)
            << ',' << num(arm.mean_alignment.mean) << ',' << num(arm.mean_alignment.std) << '\n';
    }
    return out.str();
}

}  // namespace dppgrpo
