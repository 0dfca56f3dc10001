#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "dppgrpo/embedding_io.hpp"

namespace dppgrpo {

/// Eigenvalues below this are treated as exact zeros before any entropy.
inline constexpr double kEigenFloor = 1e-12;

struct MetricReport {
    double vendi = 0.0;
    double truncated_entropy = 0.0;
    std::optional<double> mean_alignment;
    std::size_t n = 0;
    std::size_t top_m = 0;
};

/// Eigenvalues of the cosine Gram matrix in descending order.
[[nodiscard]] Eigen::VectorXd gram_spectrum(const EmbeddingSet& set);

/// exp of the Shannon entropy of the eigenvalues of K / n.
[[nodiscard]] double vendi_score(const EmbeddingSet& set);

/// Shannon entropy (nats) of the top-m Gram eigenvalues renormalized to sum 1.
[[nodiscard]] double truncated_spectral_entropy(const EmbeddingSet& set, std::size_t top_m);

[[nodiscard]] double mean_alignment(const EmbeddingSet& set, const Embedding& query);

[[nodiscard]] std::size_t default_top_m(std::size_t n);

[[nodiscard]] MetricReport evaluate_set(const EmbeddingSet& set, const Embedding* query = nullptr,
                                        std::optional<std::size_t> top_m = std::nullopt);

}  // namespace dppgrpo
