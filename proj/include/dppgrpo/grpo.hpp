#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dppgrpo/embedding_io.hpp"
#include "dppgrpo/random.hpp"
#include "dppgrpo/reward.hpp"

namespace dppgrpo {

inline constexpr Eigen::Index kNumFeatures = 3;

/// Linear-softmax policy over a finite embedding vocabulary.
///
/// For a context (query q, reference members R) candidate c has logit
///   w0 * cos(c, q) + w1 * max_{g in R} cos(c, g) + w2 + bias_c
/// with the max over an empty R taken as 0. Parameters are stored flat as
/// [w0, w1, w2, bias_0, ..., bias_{N-1}] so gradients share one layout.
class ToyPolicy {
public:
    /// Uniform policy: all weights and biases zero.
    explicit ToyPolicy(std::shared_ptr<const EmbeddingSet> vocabulary);
    ToyPolicy(std::shared_ptr<const EmbeddingSet> vocabulary, Eigen::VectorXd params);

    [[nodiscard]] const EmbeddingSet& vocabulary() const { return *vocabulary_; }
    [[nodiscard]] const std::shared_ptr<const EmbeddingSet>& vocabulary_ptr() const { return vocabulary_; }
    [[nodiscard]] std::size_t vocab_size() const { return vocabulary_->size(); }

    [[nodiscard]] const Eigen::VectorXd& params() const { return params_; }
    Eigen::VectorXd& params() { return params_; }
    [[nodiscard]] Eigen::Vector3d weights() const { return params_.head<kNumFeatures>(); }
    [[nodiscard]] Eigen::VectorXd biases() const { return params_.tail(params_.size() - kNumFeatures); }

private:
    std::shared_ptr<const EmbeddingSet> vocabulary_;
    Eigen::VectorXd params_;
};

/// Per-candidate feature rows for one (query, reference set) context.
[[nodiscard]] Eigen::MatrixXd context_features(const EmbeddingSet& vocabulary, const ReferenceSet& ref);

[[nodiscard]] Eigen::VectorXd policy_logits(const ToyPolicy& policy, const Eigen::MatrixXd& features);
[[nodiscard]] Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

[[nodiscard]] Eigen::VectorXd policy_probs(const ToyPolicy& policy, const ReferenceSet& ref);
[[nodiscard]] Eigen::VectorXd policy_log_probs(const ToyPolicy& policy, const Eigen::MatrixXd& features);

/// Exact KL(p || q) between two discrete distributions given as log-probabilities.
[[nodiscard]] double kl_divergence(const Eigen::VectorXd& log_p, const Eigen::VectorXd& log_q);
[[nodiscard]] double entropy(const Eigen::VectorXd& log_p);

/// Index drawn from `probs` by inverse CDF.
[[nodiscard]] std::size_t sample_index(const Eigen::VectorXd& probs, Rng& rng);

struct CandidateGroup {
    std::vector<std::size_t> candidates;  // vocabulary indices
    std::vector<Embedding> embeddings;
    std::vector<double> rewards;
    std::vector<double> advantages;
    std::vector<double> old_log_probs;

    [[nodiscard]] std::size_t size() const { return candidates.size(); }
};

/// G draws with replacement. Rewards and advantages are left empty.
[[nodiscard]] CandidateGroup sample_group(const ToyPolicy& policy, const ReferenceSet& ref, int group_size, Rng& rng);
[[nodiscard]] CandidateGroup sample_group(const ToyPolicy& policy, const ReferenceSet& ref, int group_size,
                                          std::uint64_t seed);

/// (r - mean) / population std; all zeros when std < 1e-12.
[[nodiscard]] std::vector<double> compute_advantages(std::span<const double> rewards);

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A).
[[nodiscard]] double clipped_surrogate_term(double ratio, double advantage, double clip_epsilon);

struct SurrogateInputs {
    const ToyPolicy& policy;
    const ToyPolicy& ref_policy;
    const CandidateGroup& group;  // old_log_probs carry the behaviour policy
    const ReferenceSet& context;
    double clip_epsilon;
    double kl_beta;
};

struct SurrogateValue {
    double objective = 0.0;
    double kl = 0.0;
    double entropy = 0.0;
    Eigen::VectorXd gradient;  // d objective / d params
};

/// Clipped GRPO surrogate minus beta * KL(pi || pi_ref), with its analytic
/// gradient with respect to the flat policy parameters.
[[nodiscard]] SurrogateValue evaluate_surrogate(const SurrogateInputs& in);

/// Convenience form that recomputes the behaviour log-probabilities from `old`.
[[nodiscard]] double surrogate_objective(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& ref_policy,
                                         const CandidateGroup& group, const ReferenceSet& context,
                                         double clip_epsilon, double kl_beta);

struct GrpoConfig {
    int group_size = 8;
    double clip_epsilon = 0.2;
    double kl_beta = 0.04;
    double learning_rate = 1e-2;
    int iterations = 1200;
    int inner_steps = 1;  // gradient steps per sampled group
    RewardWeights weights{};
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fixed curated reference set used for every iteration.
struct FixedContext {
    std::vector<Embedding> members;
};

/// Reference set drawn afresh each iteration: a uniform size in
/// [min_size, max_size], filled with distinct vocabulary items.
struct RandomSubsetContext {
    std::size_t min_size = 0;
    std::size_t max_size = 7;
};

/// Reference set drawn afresh each iteration from distinct modes: a uniform
/// count t in [min_modes, max_modes] of labelled modes, one random
/// vocabulary item from each.
struct ModeRepresentativeContext {
    std::vector<int> labels;  // per vocabulary item
    std::size_t min_modes = 0;
    std::size_t max_modes = 5;
};

using ContextSampler = std::variant<FixedContext, RandomSubsetContext, ModeRepresentativeContext>;

struct TrainingTask {
    std::shared_ptr<const EmbeddingSet> vocabulary;
    Embedding query;
    ContextSampler contexts = FixedContext{};
};

[[nodiscard]] ReferenceSet draw_context(const TrainingTask& task, Rng& rng);

struct TrainLogRecord {
    int iteration = 0;
    double objective = 0.0;
    double mean_reward = 0.0;
    double kl = 0.0;
    double policy_entropy = 0.0;
};

struct TrainResult {
    ToyPolicy policy;
    std::vector<TrainLogRecord> log;
};

/// GRPO loop: snapshot the old policy, draw a context, sample a group,
/// score it with the composite reward, normalize advantages, and take
/// `inner_steps` gradient-ascent steps on the surrogate. The reference policy
/// for the KL penalty is `initial`. Throws NumericalError naming the
/// iteration if a gradient becomes non-finite.
[[nodiscard]] TrainResult train(const GrpoConfig& config, const TrainingTask& task, const ToyPolicy& initial);
[[nodiscard]] TrainResult train(const GrpoConfig& config, const TrainingTask& task);

}  // namespace dppgrpo
