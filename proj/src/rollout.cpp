#include "dppgrpo/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dppgrpo/dpp_kernel.hpp"
#include "dppgrpo/errors.hpp"

namespace dppgrpo {

namespace {

constexpr double kTieTolerance = 1e-12;

// Pool positions sorted by id, so scanning in this order and replacing only on
// a strict improvement yields the lexicographically smallest id among ties.
std::vector<std::size_t> id_order(const EmbeddingSet& set) {
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return set[a].id < set[b].id; });
    return order;
}

StepReward score_step(const Embedding& candidate, const ReferenceSet& partial, RewardWeights weights) {
    const auto r = composite_reward(candidate, partial, weights);
    return {r.diversity_gain, r.relevance, r.composite};
}

void finish(RolloutResult& result) { result.final_diversity = diversity_score(result.selected); }

}  // namespace

std::vector<std::string> RolloutResult::ids() const {
    std::vector<std::string> out;
    out.reserve(selected.size());
    for (const auto& e : selected) out.push_back(e.id);
    return out;
}

RolloutMode parse_rollout_mode(const std::string& name) {
    if (name == "sample") return RolloutMode::Sample;
    if (name == "greedy" || name == "greedy-prob") return RolloutMode::GreedyProb;
    throw ValidationError("unknown rollout mode '" + name + "' (expected sample or greedy-prob)");
}

std::string to_string(RolloutMode mode) { return mode == RolloutMode::Sample ? "sample" : "greedy-prob"; }

RolloutResult rollout_policy(const ToyPolicy& policy, const Embedding& query, std::size_t k, RolloutMode mode,
                             std::uint64_t seed, RewardWeights weights) {
    weights.validate();
    if (k < 1) throw ValidationError("rollout size K must be >= 1");
    const auto& vocab = policy.vocabulary();
    if (k > vocab.size()) {
        throw ValidationError("vocabulary of " + std::to_string(vocab.size()) + " items is exhausted before K = " +
                              std::to_string(k));
    }
    Rng rng(seed);
    const auto order = id_order(vocab);
    std::vector<bool> taken(vocab.size(), false);
    ReferenceSet partial(query);
    RolloutResult result;

    for (std::size_t step = 0; step < k; ++step) {
        const Eigen::VectorXd log_p = policy_log_probs(policy, context_features(vocab, partial));
        std::size_t pick = 0;
        if (mode == RolloutMode::Sample) {
            Eigen::VectorXd p = log_p.array().exp();
            for (std::size_t i = 0; i < taken.size(); ++i) {
                if (taken[i]) p[static_cast<Eigen::Index>(i)] = 0.0;
            }
            if (!(p.sum() > 0.0)) throw NumericalError("masked policy has no probability mass left");
            pick = sample_index(p / p.sum(), rng);
        } else {
            double best = -std::numeric_limits<double>::infinity();
            for (auto i : order) {
                if (taken[i]) continue;
                const double lp = log_p[static_cast<Eigen::Index>(i)];
                if (lp > best + kTieTolerance) {
                    best = lp;
                    pick = i;
                }
            }
        }
        const Embedding& chosen = vocab[pick];
        result.per_step.push_back(score_step(chosen, partial, weights));
        result.selected.push_back(chosen);
        result.selected_indices.push_back(pick);
        taken[pick] = true;
        partial.add(chosen);
    }
    finish(result);
    return result;
}

RolloutResult greedy_select(const EmbeddingSet& pool, const Embedding& query, std::size_t k, RewardWeights weights) {
    weights.validate();
    if (k > pool.size()) {
        throw ValidationError("K = " + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
    }
    const auto order = id_order(pool);
    std::vector<bool> taken(pool.size(), false);
    ReferenceSet partial(query);
    RolloutResult result;

    for (std::size_t step = 0; step < k; ++step) {
        std::size_t pick = pool.size();
        StepReward best{};
        for (auto i : order) {
            if (taken[i]) continue;
            const StepReward r = score_step(pool[i], partial, weights);
            if (pick == pool.size() || r.composite > best.composite + kTieTolerance) {
                pick = i;
                best = r;
            }
        }
        result.per_step.push_back(best);
        result.selected.push_back(pool[pick]);
        result.selected_indices.push_back(pick);
        taken[pick] = true;
        partial.add(pool[pick]);
    }
    finish(result);
    return result;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // r * (n - k + i) / i is exact at every step; guard the multiply.
        const std::uint64_t num = n - k + i;
        if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        r = r * num / i;
    }
    return r;
}

SubsetSelection brute_force_select(const EmbeddingSet& pool, std::size_t k) {
    if (k > pool.size()) {
        throw ValidationError("K = " + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
    }
    const std::uint64_t count = binomial(pool.size(), k);
    if (count > kBruteForceBudget) {
        throw ValidationError("brute-force selection would enumerate " + std::to_string(count) +
                              " subsets, above the budget of " + std::to_string(kBruteForceBudget));
    }
    const auto order = id_order(pool);
    const KernelMatrix kernel = build_kernel(pool);

    SubsetSelection best;
    best.diversity = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pos(k);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::vector<std::size_t> indices(k);
    const std::size_t n = pool.size();
    while (true) {
        for (std::size_t j = 0; j < k; ++j) indices[j] = order[pos[j]];
        const double score = log_det_regularized(principal_submatrix(kernel, indices));
        if (score > best.diversity + kTieTolerance) {
            best.diversity = score;
            best.indices = indices;
        }
        // next combination in lexicographic order of positions
        std::size_t j = k;
        while (j > 0 && pos[j - 1] == n - k + (j - 1)) --j;
        if (j == 0) break;
        ++pos[j - 1];
        for (std::size_t t = j; t < k; ++t) pos[t] = pos[t - 1] + 1;
    }
    for (auto i : best.indices) best.ids.push_back(pool[i].id);
    return best;
}

}  // namespace dppgrpo
