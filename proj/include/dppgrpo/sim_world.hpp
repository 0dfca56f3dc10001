#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dppgrpo/embedding_io.hpp"
#include "dppgrpo/grpo.hpp"
#include "dppgrpo/rollout.hpp"

namespace dppgrpo {

struct WorldParams {
    int modes = 6;
    int candidates = 60;
    int dim = 16;
    double sigma = 0.1;
    // Mode weights in the query are drawn from 1 +/- query_spread, so modes
    // differ in how well they align with the query.
    double query_spread = 0.3;
    // Target pairwise cosine between centers, obtained by tilting every basis
    // vector toward their common mean direction. At most 0.3.
    double center_overlap = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Clustered embedding world with known modes.
struct SimWorld {
    WorldParams params;
    std::vector<Embedding> centers;               // unit, pairwise cosine center_overlap
    std::shared_ptr<const EmbeddingSet> vocabulary;
    Embedding query;
    std::vector<int> labels;                      // mode index per vocabulary item

    [[nodiscard]] int modes() const { return static_cast<int>(centers.size()); }
};

/// Deterministic for a fixed seed. Centers start as the first M columns of a
/// random orthonormal frame and are tilted toward their mean direction until
/// pairwise cosines equal `center_overlap`. Candidate i belongs to mode
/// i mod M and is the normalized center plus sigma times a uniform direction
/// on the sphere, redrawn until its nearest center is its own.
[[nodiscard]] SimWorld make_world(const WorldParams& params);

/// Index of the center with the largest cosine to `e`.
[[nodiscard]] int nearest_center(const SimWorld& world, const Embedding& e);

/// Distinct modes among the selected vocabulary indices divided by M.
[[nodiscard]] double mode_coverage(const SimWorld& world, const std::vector<std::size_t>& selected);

enum class ContextKind { RandomSubset, ModeRepresentatives };

[[nodiscard]] ContextKind parse_context_kind(const std::string& name);
[[nodiscard]] std::string to_string(ContextKind kind);

struct ArmSpec {
    std::string name;
    RewardWeights weights;
};

struct ExperimentSettings {
    GrpoConfig training;  // weights and seed are overridden per arm and seed
    std::size_t k = 8;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    RolloutMode rollout_mode = RolloutMode::Sample;
    ContextKind context = ContextKind::ModeRepresentatives;
    std::size_t context_max = 5;  // largest reference set drawn during training

    void validate() const;
};

struct RunRecord {
    std::uint64_t seed = 0;
    Eigen::VectorXd params;
    std::vector<std::string> selected_ids;
    std::vector<int> selected_labels;
    std::vector<StepReward> per_step;
    double final_diversity = 0.0;
    double mode_coverage = 0.0;
    double vendi = 0.0;
    double truncated_entropy = 0.0;
    double mean_alignment = 0.0;
    std::vector<double> vendi_curve;  // vendi of each prefix of the selection
    std::vector<TrainLogRecord> log;
};

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population
};

[[nodiscard]] Summary summarize(const std::vector<double>& values);

struct ArmResult {
    ArmSpec arm;
    std::vector<RunRecord> runs;
    Summary mode_coverage;
    Summary vendi;
    Summary truncated_entropy;
    Summary mean_alignment;
};

struct ExperimentResult {
    std::vector<ArmResult> arms;
    std::vector<std::uint64_t> seeds;
};

[[nodiscard]] TrainingTask make_training_task(const SimWorld& world, const ExperimentSettings& settings);

/// Trains and rolls out one policy per (arm, seed), then aggregates.
[[nodiscard]] ExperimentResult run_experiment(const SimWorld& world, const std::vector<ArmSpec>& arms,
                                              const ExperimentSettings& settings);

}  // namespace dppgrpo
