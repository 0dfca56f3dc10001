#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dppgrpo/embedding_io.hpp"

namespace dppgrpo {

/// Symmetric PSD similarity matrix of an L-ensemble over a set of unit
/// embeddings. Entries are raw cosine similarities, so the diagonal is 1.
class KernelMatrix {
public:
    KernelMatrix() = default;
    /// Validates symmetry (1e-12) and unit diagonal (1e-12).
    explicit KernelMatrix(Eigen::MatrixXd entries);

    [[nodiscard]] Eigen::Index size() const { return entries_.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& entries() const { return entries_; }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Eigen::MatrixXd entries_;
};

/// Gram matrix of cosine similarities. Rejects inputs whose norm is off by
/// more than 1e-9.
[[nodiscard]] KernelMatrix build_kernel(const EmbeddingSet& set);
[[nodiscard]] KernelMatrix build_kernel(const std::vector<const Embedding*>& items);

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Throws NumericalError when a pivot is not strictly positive.
[[nodiscard]] Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

/// log det(L + I) via Cholesky. The empty matrix yields 0.
[[nodiscard]] double log_det_regularized(const KernelMatrix& kernel);

[[nodiscard]] KernelMatrix principal_submatrix(const KernelMatrix& kernel, const std::vector<std::size_t>& indices);

}  // namespace dppgrpo
