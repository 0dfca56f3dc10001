#include "dppgrpo/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <Eigen/QR>

#include "dppgrpo/errors.hpp"
#include "dppgrpo/metrics.hpp"
#include "dppgrpo/random.hpp"

namespace dppgrpo {

void WorldParams::validate() const {
    if (modes < 1) throw ValidationError("world.modes must be >= 1");
    if (dim < 1) throw ValidationError("world.dim must be >= 1");
    if (modes > dim) {
        throw ValidationError("world.modes (" + std::to_string(modes) + ") must not exceed world.dim (" +
                              std::to_string(dim) + ")");
    }
    if (candidates < modes) throw ValidationError("world.candidates must be >= world.modes");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("world.sigma must be >= 0");
    if (!(query_spread >= 0.0 && query_spread < 1.0)) throw ValidationError("world.query_spread must lie in [0, 1)");
    if (!(center_overlap >= 0.0 && center_overlap <= 0.3)) throw ValidationError("world.center_overlap must lie in [0, 0.3]");
    if (center_overlap > 0.0 && modes < 2) throw ValidationError("world.center_overlap needs at least 2 modes");
}

namespace {

Eigen::VectorXd random_direction(Eigen::Index d, Rng& rng) {
    Eigen::VectorXd v(d);
    do {
        for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
    } while (v.norm() < 1e-12);
    return v.normalized();
}

// Tilt s such that unit vectors e_m + s * mean_dir have pairwise cosine rho:
// (2s/sqrt(M) + s^2) / (1 + 2s/sqrt(M) + s^2) = rho.
double center_tilt(int modes, double rho) {
    if (rho <= 0.0) return 0.0;
    const double b = 2.0 / std::sqrt(static_cast<double>(modes));
    const double qa = 1.0 - rho;
    const double qb = b * (1.0 - rho);
    return (-qb + std::sqrt(qb * qb + 4.0 * qa * rho)) / (2.0 * qa);
}

std::string candidate_id(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c%04d", i);
    return buf;
}

}  // namespace

SimWorld make_world(const WorldParams& params) {
    params.validate();
    Rng rng(params.seed);
    const Eigen::Index d = params.dim;

    Eigen::MatrixXd gauss(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) gauss(r, c) = rng.normal();
    }
    const Eigen::MatrixXd frame = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

    SimWorld world;
    world.params = params;
    const double tilt = center_tilt(params.modes, params.center_overlap);
    const Eigen::VectorXd mean_dir = frame.leftCols(params.modes).rowwise().sum().normalized();
    for (int m = 0; m < params.modes; ++m) {
        world.centers.push_back({"center" + std::to_string(m), (frame.col(m) + tilt * mean_dir).normalized(), {}});
    }

    Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
    for (const auto& c : world.centers) {
        const double w = 1.0 + params.query_spread * (2.0 * rng.uniform() - 1.0);
        q += w * c.vector;
    }
    world.query = {"query", q.normalized(), {}};

    auto vocab = std::make_shared<EmbeddingSet>();
    for (int i = 0; i < params.candidates; ++i) {
        const int label = i % params.modes;
        Embedding e{candidate_id(i), {}, {{"mode", std::to_string(label)}}};
        while (true) {
            e.vector = (world.centers[static_cast<std::size_t>(label)].vector + params.sigma * random_direction(d, rng))
                           .normalized();
            if (nearest_center(world, e) == label) break;
        }
        vocab->push_back(std::move(e));
        world.labels.push_back(label);
    }
    world.vocabulary = std::move(vocab);
    return world;
}

int nearest_center(const SimWorld& world, const Embedding& e) {
    int best = 0;
    double best_cos = -2.0;
    for (std::size_t m = 0; m < world.centers.size(); ++m) {
        const double c = e.vector.dot(world.centers[m].vector);
        if (c > best_cos) {
            best_cos = c;
            best = static_cast<int>(m);
        }
    }
    return best;
}

double mode_coverage(const SimWorld& world, const std::vector<std::size_t>& selected) {
    std::set<int> seen;
    for (auto i : selected) seen.insert(world.labels.at(i));
    return static_cast<double>(seen.size()) / static_cast<double>(world.modes());
}

ContextKind parse_context_kind(const std::string& name) {
    if (name == "random_subset") return ContextKind::RandomSubset;
    if (name == "mode_representatives") return ContextKind::ModeRepresentatives;
    throw ValidationError("unknown context kind '" + name + "' (expected random_subset or mode_representatives)");
}

std::string to_string(ContextKind kind) {
    return kind == ContextKind::RandomSubset ? "random_subset" : "mode_representatives";
}

void ExperimentSettings::validate() const {
    training.validate();
    if (k < 1) throw ValidationError("k must be >= 1");
    if (seeds.empty()) throw ValidationError("seeds must be non-empty");
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    const auto n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / n);
    return s;
}

TrainingTask make_training_task(const SimWorld& world, const ExperimentSettings& settings) {
    TrainingTask task{world.vocabulary, world.query, FixedContext{}};
    if (settings.context == ContextKind::RandomSubset) {
        task.contexts = RandomSubsetContext{0, settings.context_max};
    } else {
        task.contexts = ModeRepresentativeContext{world.labels, 0, settings.context_max};
    }
    return task;
}

ExperimentResult run_experiment(const SimWorld& world, const std::vector<ArmSpec>& arms,
                                const ExperimentSettings& settings) {
    settings.validate();
    if (arms.size() < 2) throw ValidationError("an experiment needs at least 2 arms");
    if (settings.k > world.vocabulary->size()) throw ValidationError("k exceeds the world vocabulary size");
    const TrainingTask task = make_training_task(world, settings);

    ExperimentResult result;
    result.seeds = settings.seeds;
    for (const auto& arm : arms) {
        arm.weights.validate();
        ArmResult ar;
        ar.arm = arm;
        std::vector<double> coverage, vendi, entropy, alignment;
        for (auto seed : settings.seeds) {
            GrpoConfig cfg = settings.training;
            cfg.weights = arm.weights;
            cfg.seed = mix_seed(seed, 0);
            TrainResult trained = train(cfg, task);
            const RolloutResult roll =
                rollout_policy(trained.policy, world.query, settings.k, settings.rollout_mode, mix_seed(seed, 1), arm.weights);

            RunRecord rec;
            rec.seed = seed;
            rec.params = trained.policy.params();
            rec.selected_ids = roll.ids();
            for (auto i : roll.selected_indices) rec.selected_labels.push_back(world.labels[i]);
            rec.per_step = roll.per_step;
            rec.final_diversity = roll.final_diversity;
            rec.mode_coverage = mode_coverage(world, roll.selected_indices);
            const EmbeddingSet chosen(roll.selected);
            rec.vendi = vendi_score(chosen);
            rec.truncated_entropy = truncated_spectral_entropy(chosen, default_top_m(chosen.size()));
            rec.mean_alignment = mean_alignment(chosen, world.query);
            for (std::size_t t = 1; t <= roll.selected.size(); ++t) {
                rec.vendi_curve.push_back(vendi_score(EmbeddingSet(
                    std::vector<Embedding>(roll.selected.begin(), roll.selected.begin() + static_cast<std::ptrdiff_t>(t)))));
            }
            rec.log = std::move(trained.log);

            coverage.push_back(rec.mode_coverage);
            vendi.push_back(rec.vendi);
            entropy.push_back(rec.truncated_entropy);
            alignment.push_back(rec.mean_alignment);
            ar.runs.push_back(std::move(rec));
        }
        ar.mode_coverage = summarize(coverage);
        ar.vendi = summarize(vendi);
        ar.truncated_entropy = summarize(entropy);
        ar.mean_alignment = summarize(alignment);
        result.arms.push_back(std::move(ar));
    }
    return result;
}

}  // namespace dppgrpo
