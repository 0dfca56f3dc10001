#include "dppgrpo/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dppgrpo/errors.hpp"

namespace dppgrpo {

namespace {
constexpr double kZeroStd = 1e-12;
}

ToyPolicy::ToyPolicy(std::shared_ptr<const EmbeddingSet> vocabulary)
    : ToyPolicy(vocabulary, Eigen::VectorXd::Zero(kNumFeatures + static_cast<Eigen::Index>(vocabulary->size()))) {}

ToyPolicy::ToyPolicy(std::shared_ptr<const EmbeddingSet> vocabulary, Eigen::VectorXd params)
    : vocabulary_(std::move(vocabulary)), params_(std::move(params)) {
    if (!vocabulary_ || vocabulary_->empty()) throw ValidationError("policy vocabulary must be non-empty");
    if (params_.size() != kNumFeatures + static_cast<Eigen::Index>(vocabulary_->size())) {
        throw ValidationError("policy parameter vector must have length 3 + vocabulary size");
    }
    require_unit(*vocabulary_);
}

Eigen::MatrixXd context_features(const EmbeddingSet& vocabulary, const ReferenceSet& ref) {
    const auto n = static_cast<Eigen::Index>(vocabulary.size());
    Eigen::MatrixXd f(n, kNumFeatures);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& v = vocabulary[static_cast<std::size_t>(c)].vector;
        if (v.size() != ref.query().dim()) throw ValidationError("vocabulary and query dimensions differ");
        f(c, 0) = v.dot(ref.query().vector);
        double best = 0.0;
        if (!ref.empty()) {
            best = -std::numeric_limits<double>::infinity();
            for (const auto& g : ref.members()) best = std::max(best, v.dot(g.vector));
        }
        f(c, 1) = best;
        f(c, 2) = 1.0;
    }
    return f;
}

Eigen::VectorXd policy_logits(const ToyPolicy& policy, const Eigen::MatrixXd& features) {
    return features * policy.weights() + policy.biases();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return logits.array() - lse;
}

Eigen::VectorXd policy_log_probs(const ToyPolicy& policy, const Eigen::MatrixXd& features) {
    return log_softmax(policy_logits(policy, features));
}

Eigen::VectorXd policy_probs(const ToyPolicy& policy, const ReferenceSet& ref) {
    return policy_log_probs(policy, context_features(policy.vocabulary(), ref)).array().exp();
}

double kl_divergence(const Eigen::VectorXd& log_p, const Eigen::VectorXd& log_q) {
    double kl = 0.0;
    for (Eigen::Index i = 0; i < log_p.size(); ++i) {
        const double p = std::exp(log_p[i]);
        if (p > 0.0) kl += p * (log_p[i] - log_q[i]);
    }
    return std::max(kl, 0.0);
}

double entropy(const Eigen::VectorXd& log_p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < log_p.size(); ++i) {
        const double p = std::exp(log_p[i]);
        if (p > 0.0) h -= p * log_p[i];
    }
    return h;
}

std::size_t sample_index(const Eigen::VectorXd& probs, Rng& rng) {
    const double total = probs.sum();
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last_positive = static_cast<std::size_t>(i);
        if (u < acc) return last_positive;
    }
    return last_positive;
}

CandidateGroup sample_group(const ToyPolicy& policy, const ReferenceSet& ref, int group_size, Rng& rng) {
    if (group_size < 2) throw ValidationError("group size G must be >= 2");
    const Eigen::VectorXd log_p = policy_log_probs(policy, context_features(policy.vocabulary(), ref));
    const Eigen::VectorXd p = log_p.array().exp();
    if (!p.allFinite()) throw NumericalError("policy probabilities are not finite");
    CandidateGroup group;
    group.candidates.reserve(static_cast<std::size_t>(group_size));
    for (int i = 0; i < group_size; ++i) {
        const std::size_t idx = sample_index(p, rng);
        group.candidates.push_back(idx);
        group.embeddings.push_back(policy.vocabulary()[idx]);
        group.old_log_probs.push_back(log_p[static_cast<Eigen::Index>(idx)]);
    }
    return group;
}

CandidateGroup sample_group(const ToyPolicy& policy, const ReferenceSet& ref, int group_size, std::uint64_t seed) {
    Rng rng(seed);
    return sample_group(policy, ref, group_size, rng);
}

std::vector<double> compute_advantages(std::span<const double> rewards) {
    if (rewards.size() < 2) throw ValidationError("advantage normalization needs at least 2 rewards");
    const auto n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / n);
    std::vector<double> adv(rewards.size(), 0.0);
    if (sd < kZeroStd) return adv;
    for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
    return adv;
}

double clipped_surrogate_term(double ratio, double advantage, double clip_epsilon) {
    const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

SurrogateValue evaluate_surrogate(const SurrogateInputs& in) {
    const auto& group = in.group;
    if (group.size() == 0) throw ValidationError("surrogate needs a non-empty group");
    if (group.advantages.size() != group.size() || group.old_log_probs.size() != group.size()) {
        throw ValidationError("group advantages and old log-probabilities must be populated");
    }
    const Eigen::MatrixXd features = context_features(in.policy.vocabulary(), in.context);
    const Eigen::VectorXd log_p = policy_log_probs(in.policy, features);
    const Eigen::VectorXd log_ref = policy_log_probs(in.ref_policy, features);
    const Eigen::VectorXd p = log_p.array().exp();
    const auto n = log_p.size();

    SurrogateValue out;
    Eigen::VectorXd grad_logits = Eigen::VectorXd::Zero(n);
    const double inv_g = 1.0 / static_cast<double>(group.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < group.size(); ++i) {
        const double old_lp = group.old_log_probs[i];
        if (!std::isfinite(old_lp)) {
            throw NumericalError("old policy assigns zero probability to sampled action " +
                                 std::to_string(group.candidates[i]));
        }
        const auto o = static_cast<Eigen::Index>(group.candidates[i]);
        const double ratio = std::exp(log_p[o] - old_lp);
        const double a = group.advantages[i];
        acc += clipped_surrogate_term(ratio, a, in.clip_epsilon);
        // The unclipped branch carries the gradient unless the clip is binding.
        const bool active = (a > 0.0 && ratio <= 1.0 + in.clip_epsilon) || (a < 0.0 && ratio >= 1.0 - in.clip_epsilon);
        if (active) {
            // d ratio / d logits = ratio * (e_o - p)
            grad_logits -= (inv_g * a * ratio) * p;
            grad_logits[o] += inv_g * a * ratio;
        }
    }
    out.kl = kl_divergence(log_p, log_ref);
    out.entropy = entropy(log_p);
    out.objective = acc * inv_g - in.kl_beta * out.kl;
    if (in.kl_beta != 0.0) {
        // d KL / d logit_k = p_k (log p_k - log ref_k - KL)
        const Eigen::VectorXd d_kl = p.array() * (log_p - log_ref).array() - p.array() * out.kl;
        grad_logits -= in.kl_beta * d_kl;
    }
    out.gradient.resize(in.policy.params().size());
    out.gradient.head<kNumFeatures>() = features.transpose() * grad_logits;
    out.gradient.tail(n) = grad_logits;
    return out;
}

double surrogate_objective(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& ref_policy,
                           const CandidateGroup& group, const ReferenceSet& context, double clip_epsilon,
                           double kl_beta) {
    CandidateGroup g = group;
    const Eigen::VectorXd old_lp = policy_log_probs(old, context_features(old.vocabulary(), context));
    for (std::size_t i = 0; i < g.size(); ++i) g.old_log_probs[i] = old_lp[static_cast<Eigen::Index>(g.candidates[i])];
    return evaluate_surrogate({policy, ref_policy, g, context, clip_epsilon, kl_beta}).objective;
}

void GrpoConfig::validate() const {
    if (group_size < 2) throw ValidationError("group_size must be >= 2");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ValidationError("clip_epsilon must lie in (0, 1)");
    if (!(kl_beta >= 0.0) || !std::isfinite(kl_beta)) throw ValidationError("kl_beta must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be > 0");
    if (iterations < 0) throw ValidationError("iterations must be >= 0");
    if (inner_steps < 1) throw ValidationError("inner_steps must be >= 1");
    weights.validate();
}

ReferenceSet draw_context(const TrainingTask& task, Rng& rng) {
    const auto& vocab = *task.vocabulary;
    return std::visit(
        [&](const auto& ctx) -> ReferenceSet {
            using T = std::decay_t<decltype(ctx)>;
            if constexpr (std::is_same_v<T, FixedContext>) {
                return ReferenceSet(task.query, ctx.members);
            } else if constexpr (std::is_same_v<T, RandomSubsetContext>) {
                const std::size_t hi = std::min(ctx.max_size, vocab.size());
                const std::size_t lo = std::min(ctx.min_size, hi);
                const std::size_t size = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
                std::vector<std::size_t> order(vocab.size());
                std::iota(order.begin(), order.end(), std::size_t{0});
                // partial Fisher-Yates
                for (std::size_t i = 0; i < size; ++i) {
                    const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
                    std::swap(order[i], order[j]);
                }
                ReferenceSet ref(task.query);
                for (std::size_t i = 0; i < size; ++i) ref.add(vocab[order[i]]);
                return ref;
            } else {
                if (ctx.labels.size() != vocab.size()) throw ValidationError("one mode label per vocabulary item required");
                std::vector<int> modes(ctx.labels.begin(), ctx.labels.end());
                std::sort(modes.begin(), modes.end());
                modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
                const std::size_t hi = std::min(ctx.max_modes, modes.size());
                const std::size_t lo = std::min(ctx.min_modes, hi);
                const std::size_t count = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
                for (std::size_t i = 0; i < count; ++i) {
                    const auto j = i + static_cast<std::size_t>(rng.below(modes.size() - i));
                    std::swap(modes[i], modes[j]);
                }
                ReferenceSet ref(task.query);
                for (std::size_t i = 0; i < count; ++i) {
                    std::vector<std::size_t> members;
                    for (std::size_t c = 0; c < vocab.size(); ++c) {
                        if (ctx.labels[c] == modes[i]) members.push_back(c);
                    }
                    ref.add(vocab[members[static_cast<std::size_t>(rng.below(members.size()))]]);
                }
                return ref;
            }
        },
        task.contexts);
}

namespace {

// One GRPO step: draw a context, sample a group, score it, and ascend.
TrainLogRecord train_iteration(const GrpoConfig& config, const TrainingTask& task, const ToyPolicy& ref_policy,
                               ToyPolicy& policy, Rng& rng, int it) {
    const ReferenceSet context = draw_context(task, rng);
    CandidateGroup group = sample_group(policy, context, config.group_size, rng);
    group.rewards.reserve(group.size());
    for (const auto& e : group.embeddings) {
        group.rewards.push_back(composite_reward(e, context, config.weights).composite);
    }
    group.advantages = compute_advantages(group.rewards);

    SurrogateValue value;
    for (int step = 0; step < config.inner_steps; ++step) {
        value = evaluate_surrogate({policy, ref_policy, group, context, config.clip_epsilon, config.kl_beta});
        if (!value.gradient.allFinite()) {
            throw NumericalError("non-finite gradient at iteration " + std::to_string(it));
        }
        policy.params() += config.learning_rate * value.gradient;
        if (!policy.params().allFinite()) {
            throw NumericalError("parameters overflowed at iteration " + std::to_string(it));
        }
    }
    const SurrogateValue after =
        evaluate_surrogate({policy, ref_policy, group, context, config.clip_epsilon, config.kl_beta});

    TrainLogRecord rec;
    rec.iteration = it;
    rec.objective = after.objective;
    rec.mean_reward = std::accumulate(group.rewards.begin(), group.rewards.end(), 0.0) /
                      static_cast<double>(group.rewards.size());
    rec.kl = after.kl;
    rec.policy_entropy = after.entropy;
    return rec;
}

}  // namespace

TrainResult train(const GrpoConfig& config, const TrainingTask& task, const ToyPolicy& initial) {
    config.validate();
    if (!task.vocabulary || task.vocabulary->empty()) throw ValidationError("training vocabulary must be non-empty");
    require_unit(task.query);

    Rng rng(config.seed);
    const ToyPolicy& ref_policy = initial;
    ToyPolicy policy = initial;
    TrainResult result{initial, {}};
    result.log.reserve(static_cast<std::size_t>(config.iterations));

    for (int it = 0; it < config.iterations; ++it) {
        try {
            result.log.push_back(train_iteration(config, task, ref_policy, policy, rng, it));
        } catch (const NumericalError& e) {
            const std::string what = e.what();
            if (what.find("iteration") != std::string::npos) throw;
            throw NumericalError(what + " at iteration " + std::to_string(it));
        }
    }
    result.policy = std::move(policy);
    return result;
}

TrainResult train(const GrpoConfig& config, const TrainingTask& task) {
    return train(config, task, ToyPolicy(task.vocabulary));
}

}  // namespace dppgrpo
