#include "dppgrpo/reward.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "dppgrpo/dpp_kernel.hpp"
#include "dppgrpo/errors.hpp"

namespace dppgrpo {

ReferenceSet::ReferenceSet(Embedding query, std::vector<Embedding> members) : query_(std::move(query)) {
    require_unit(query_);
    members_.reserve(members.size());
    for (auto& m : members) add(std::move(m));
}

ReferenceSet::ReferenceSet(Embedding query, const EmbeddingSet& members)
    : ReferenceSet(std::move(query), members.items()) {}

void ReferenceSet::add(Embedding member) {
    require_unit(member);
    if (member.dim() != query_.dim()) {
        throw ValidationError("reference member '" + member.id + "' has dimension " + std::to_string(member.dim()) +
                              ", query has " + std::to_string(query_.dim()));
    }
    for (const auto& m : members_) {
        if (m.id == member.id) throw ValidationError("duplicate reference member id '" + member.id + "'");
    }
    members_.push_back(std::move(member));
}

void RewardWeights::validate() const {
    if (!std::isfinite(lambda_div) || !std::isfinite(lambda_rel)) {
        throw ValidationError("reward weights must be finite");
    }
    if (lambda_div < 0.0) throw ValidationError("lambda_div must be >= 0");
    if (lambda_rel < 0.0) throw ValidationError("lambda_rel must be >= 0");
    if (lambda_div == 0.0 && lambda_rel == 0.0) throw ValidationError("lambda_div and lambda_rel cannot both be 0");
}

std::vector<RewardWeights> lambda_ablation_grid() { return {{0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}}; }

double diversity_score(const EmbeddingSet& set) { return log_det_regularized(build_kernel(set)); }

double diversity_score(const std::vector<Embedding>& items) {
    std::vector<const Embedding*> ptrs;
    ptrs.reserve(items.size());
    for (const auto& e : items) ptrs.push_back(&e);
    return log_det_regularized(build_kernel(ptrs));
}

double marginal_gain(const Embedding& candidate, const ReferenceSet& ref) {
    if (candidate.dim() != ref.query().dim()) {
        throw ValidationError("candidate '" + candidate.id + "' dimension does not match the reference set");
    }
    std::vector<const Embedding*> items;
    items.reserve(ref.size() + 1);
    for (const auto& m : ref.members()) items.push_back(&m);
    const double before = log_det_regularized(build_kernel(items));
    items.push_back(&candidate);
    const double after = log_det_regularized(build_kernel(items));
    return after - before;
}

double relevance(const Embedding& candidate, const ReferenceSet& ref) {
    if (ref.empty()) throw ValidationError("relevance is undefined for an empty reference set");
    require_unit(candidate);
    const double to_query = candidate.vector.dot(ref.query().vector);
    double acc = 0.0;
    for (const auto& g : ref.members()) acc += to_query * candidate.vector.dot(g.vector);
    return acc / static_cast<double>(ref.size());
}

double relevance_or_query(const Embedding& candidate, const ReferenceSet& ref) {
    if (ref.empty()) {
        require_unit(candidate);
        return candidate.vector.dot(ref.query().vector);
    }
    return relevance(candidate, ref);
}

RewardBreakdown composite_reward(const Embedding& candidate, const ReferenceSet& ref, RewardWeights weights) {
    weights.validate();
    RewardBreakdown out;
    out.lambda_div = weights.lambda_div;
    out.lambda_rel = weights.lambda_rel;
    out.diversity_gain = marginal_gain(candidate, ref);
    out.relevance = relevance_or_query(candidate, ref);
    out.composite = weights.lambda_div * out.diversity_gain + weights.lambda_rel * out.relevance;
    return out;
}

}  // namespace dppgrpo
