#pragma once

#include <vector>

#include "dppgrpo/embedding_io.hpp"

namespace dppgrpo {

/// The query together with the variants a candidate is scored against.
class ReferenceSet {
public:
    /// Validates unit norms, shared dimension and unique member ids.
    ReferenceSet(Embedding query, std::vector<Embedding> members = {});
    ReferenceSet(Embedding query, const EmbeddingSet& members);

    [[nodiscard]] const Embedding& query() const { return query_; }
    [[nodiscard]] const std::vector<Embedding>& members() const { return members_; }
    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool empty() const { return members_.empty(); }

    void add(Embedding member);

private:
    Embedding query_;
    std::vector<Embedding> members_;
};

struct RewardWeights {
    double lambda_div = 0.5;
    double lambda_rel = 0.5;

    /// Throws ValidationError on negative or all-zero weights.
    void validate() const;
};

/// Weight presets used by the diversity/relevance trade-off sweep.
[[nodiscard]] std::vector<RewardWeights> lambda_ablation_grid();

struct RewardBreakdown {
    double diversity_gain = 0.0;
    double relevance = 0.0;
    double composite = 0.0;
    double lambda_div = 0.0;
    double lambda_rel = 0.0;
};

/// log det(L + I) over the cosine kernel of the set; 0 for the empty set.
[[nodiscard]] double diversity_score(const EmbeddingSet& set);
[[nodiscard]] double diversity_score(const std::vector<Embedding>& items);

/// Increase in diversity_score from appending `candidate` to the members.
[[nodiscard]] double marginal_gain(const Embedding& candidate, const ReferenceSet& ref);

/// Mean over members g of cos(candidate, query) * cos(candidate, g).
/// Throws ValidationError for an empty member list.
[[nodiscard]] double relevance(const Embedding& candidate, const ReferenceSet& ref);

/// As `relevance`, but an empty member list falls back to cos(candidate, query).
[[nodiscard]] double relevance_or_query(const Embedding& candidate, const ReferenceSet& ref);

/// lambda_div * gain + lambda_rel * relevance. Uses `relevance_or_query`, so
/// the first selection against an empty reference set is scored by query
/// alignment alone.
[[nodiscard]] RewardBreakdown composite_reward(const Embedding& candidate, const ReferenceSet& ref,
                                               RewardWeights weights);

}  // namespace dppgrpo
