#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dppgrpo/embedding_io.hpp"
#include "dppgrpo/grpo.hpp"
#include "dppgrpo/reward.hpp"

namespace dppgrpo {

struct StepReward {
    double marginal_gain = 0.0;
    double relevance = 0.0;
    double composite = 0.0;
};

struct RolloutResult {
    std::vector<Embedding> selected;
    std::vector<std::size_t> selected_indices;  // into the pool / vocabulary
    std::vector<StepReward> per_step;
    double final_diversity = 0.0;

    [[nodiscard]] std::vector<std::string> ids() const;
};

enum class RolloutMode { Sample, GreedyProb };

[[nodiscard]] RolloutMode parse_rollout_mode(const std::string& name);
[[nodiscard]] std::string to_string(RolloutMode mode);

/// Builds a K-item set from the policy starting with an empty reference set.
/// Each step conditions on the query plus everything selected so far, masks
/// out already-chosen items and renormalizes. GreedyProb takes the argmax,
/// breaking ties by the lexicographically smallest id. Per-step rewards are
/// recorded against the set as it was before the step.
[[nodiscard]] RolloutResult rollout_policy(const ToyPolicy& policy, const Embedding& query, std::size_t k,
                                           RolloutMode mode, std::uint64_t seed, RewardWeights weights = {});

/// Picks, K times, the pool item with the highest composite reward against
/// the partial set. Ties go to the lexicographically smallest id.
[[nodiscard]] RolloutResult greedy_select(const EmbeddingSet& pool, const Embedding& query, std::size_t k,
                                          RewardWeights weights);

struct SubsetSelection {
    std::vector<std::size_t> indices;  // pool indices, ordered by id
    std::vector<std::string> ids;
    double diversity = 0.0;
};

inline constexpr std::uint64_t kBruteForceBudget = 1'000'000;

/// Number of k-subsets of an n-set, saturating at UINT64_MAX.
[[nodiscard]] std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Exhaustive maximizer of diversity_score over all size-K subsets. Ties go to
/// the lexicographically smallest id tuple. Rejects C(n, K) > 1e6.
[[nodiscard]] SubsetSelection brute_force_select(const EmbeddingSet& pool, std::size_t k);

}  // namespace dppgrpo
