#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dppgrpo/config.hpp"
#include "dppgrpo/reward.hpp"

namespace dppgrpo {

// Library side of the CLI subcommands. Each returns the JSON report it
// produces; embedding files are normalized on load and never modified.

struct ScoreArgs {
    std::filesystem::path embeddings;
    std::string query_id;
    std::vector<std::string> reference_ids;
    RewardWeights weights;
};

/// RewardBreakdown for every candidate not in the reference set.
[[nodiscard]] nlohmann::json run_score(const ScoreArgs& args);

struct SelectArgs {
    std::filesystem::path embeddings;
    std::string query_id;
    std::size_t k = 8;
    std::string mode = "greedy";  // greedy | bruteforce
    RewardWeights weights;
};

/// Selects K items from every record except the query.
[[nodiscard]] nlohmann::json run_select(const SelectArgs& args);

struct EvalArgs {
    std::filesystem::path embeddings;
    std::optional<std::string> query_id;
    std::optional<std::size_t> top_m;
};

/// Metrics over the file's records (excluding the query when one is named).
[[nodiscard]] nlohmann::json run_eval(const EvalArgs& args);

/// Writes config.json, train_log.jsonl and report.json into `out_dir`.
nlohmann::json run_train(const TrainConfig& config, const std::filesystem::path& out_dir);

/// Writes config.json, logs/<arm>_seed<seed>.jsonl and report.json into
/// `out_dir`, plus the arm x metric CSV when `csv` is set.
nlohmann::json run_simulate(const SimulateConfig& config, const std::filesystem::path& out_dir,
                            const std::optional<std::filesystem::path>& csv = std::nullopt);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dppgrpo
