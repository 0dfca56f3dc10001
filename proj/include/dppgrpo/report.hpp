#pragma once

#include <string>

#include <json.hpp>

#include "dppgrpo/grpo.hpp"
#include "dppgrpo/metrics.hpp"
#include "dppgrpo/reward.hpp"
#include "dppgrpo/rollout.hpp"
#include "dppgrpo/sim_world.hpp"

namespace dppgrpo {

[[nodiscard]] nlohmann::json to_json(const RewardBreakdown& r);
[[nodiscard]] nlohmann::json to_json(const StepReward& s);
[[nodiscard]] nlohmann::json to_json(const RolloutResult& r);
[[nodiscard]] nlohmann::json to_json(const MetricReport& m);
[[nodiscard]] nlohmann::json to_json(const TrainLogRecord& rec);
[[nodiscard]] nlohmann::json to_json(const Summary& s);
[[nodiscard]] nlohmann::json policy_to_json(const ToyPolicy& policy);
[[nodiscard]] nlohmann::json policy_to_json(const Eigen::VectorXd& params, const EmbeddingSet& vocabulary);
/// Per-run records omit training logs; those are written separately.
[[nodiscard]] nlohmann::json to_json(const ExperimentResult& r, const EmbeddingSet& vocabulary);

/// One JSON object per line.
[[nodiscard]] std::string training_log_jsonl(const std::vector<TrainLogRecord>& log);

/// arm x metric table with mean and std columns.
[[nodiscard]] std::string experiment_csv(const ExperimentResult& r);

}  // namespace dppgrpo
