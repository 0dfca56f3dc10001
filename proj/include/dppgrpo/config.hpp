#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dppgrpo/grpo.hpp"
#include "dppgrpo/sim_world.hpp"

namespace dppgrpo {

inline constexpr int kConfigVersion = 1;

/// `simulate` configuration. Every key is optional and falls back to the
/// documented default; unknown keys and out-of-range values are rejected.
struct SimulateConfig {
    WorldParams world{.seed = 2024};
    ExperimentSettings experiment{.training = {.learning_rate = 0.1}};
    std::vector<ArmSpec> arms{{"composite", {0.5, 0.5}}, {"relevance_only", {0.0, 1.0}}};

    void validate() const;
};

/// `train` configuration: either an embeddings file with a query id and a
/// fixed reference set, or a synthetic world with sampled contexts.
struct TrainConfig {
    std::optional<std::filesystem::path> embeddings;
    std::string query_id;
    std::vector<std::string> reference_ids;
    std::optional<WorldParams> world;
    ContextKind context = ContextKind::ModeRepresentatives;
    std::size_t context_max = 5;
    GrpoConfig training;
    std::size_t k = 8;
    RolloutMode rollout_mode = RolloutMode::Sample;

    void validate() const;
};

[[nodiscard]] SimulateConfig parse_simulate_config(const nlohmann::json& j);
[[nodiscard]] TrainConfig parse_train_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

[[nodiscard]] nlohmann::json to_json(const SimulateConfig& c);
[[nodiscard]] nlohmann::json to_json(const TrainConfig& c);
[[nodiscard]] nlohmann::json to_json(const WorldParams& w);
[[nodiscard]] nlohmann::json to_json(const GrpoConfig& g);

/// Reads and parses a JSON file, mapping syntax errors to ValidationError.
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace dppgrpo
