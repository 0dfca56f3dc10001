#include "dppgrpo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "dppgrpo/dpp_kernel.hpp"
#include "dppgrpo/errors.hpp"

namespace dppgrpo {

namespace {

// Shannon entropy of the positive part of `weights` after normalization.
double spectral_entropy(const Eigen::VectorXd& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w > kEigenFloor) total += w;
    }
    if (!(total > 0.0)) throw NumericalError("spectrum has no eigenvalue above the floor");
    double h = 0.0;
    for (double w : weights) {
        if (w <= kEigenFloor) continue;
        const double p = w / total;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

Eigen::VectorXd gram_spectrum(const EmbeddingSet& set) {
    const KernelMatrix kernel = build_kernel(set);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kernel.entries(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    Eigen::VectorXd ev = solver.eigenvalues();
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

double vendi_score(const EmbeddingSet& set) {
    if (set.empty()) throw ValidationError("vendi_score needs at least one item");
    const Eigen::VectorXd ev = gram_spectrum(set) / static_cast<double>(set.size());
    return std::exp(spectral_entropy(ev));
}

double truncated_spectral_entropy(const EmbeddingSet& set, std::size_t top_m) {
    if (top_m < 1 || top_m > set.size()) {
        throw ValidationError("top_m = " + std::to_string(top_m) + " must lie in [1, " + std::to_string(set.size()) + "]");
    }
    const Eigen::VectorXd ev = gram_spectrum(set);
    return spectral_entropy(ev.head(static_cast<Eigen::Index>(top_m)));
}

double mean_alignment(const EmbeddingSet& set, const Embedding& query) {
    if (set.empty()) throw ValidationError("mean_alignment needs at least one item");
    require_unit(query);
    double acc = 0.0;
    for (const auto& e : set) {
        require_unit(e);
        if (e.dim() != query.dim()) throw ValidationError("dimension mismatch between '" + e.id + "' and the query");
        acc += e.vector.dot(query.vector);
    }
    return acc / static_cast<double>(set.size());
}

std::size_t default_top_m(std::size_t n) { return std::min<std::size_t>(n, 8); }

MetricReport evaluate_set(const EmbeddingSet& set, const Embedding* query, std::optional<std::size_t> top_m) {
    MetricReport report;
    report.n = set.size();
    report.top_m = top_m.value_or(default_top_m(set.size()));
    report.vendi = vendi_score(set);
    report.truncated_entropy = truncated_spectral_entropy(set, report.top_m);
    if (query) report.mean_alignment = mean_alignment(set, *query);
    return report;
}

}  // namespace dppgrpo
