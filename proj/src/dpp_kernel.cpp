#include "dppgrpo/dpp_kernel.hpp"

#include <cmath>
#include <string>

#include "dppgrpo/errors.hpp"

namespace dppgrpo {

namespace {
constexpr double kSymmetryTolerance = 1e-12;
}

KernelMatrix::KernelMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw ValidationError("kernel matrix must be square");
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(entries_(i, i) - 1.0) > kSymmetryTolerance) {
            throw ValidationError("kernel diagonal entry " + std::to_string(i) + " is not 1");
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (!(std::abs(entries_(i, j) - entries_(j, i)) <= kSymmetryTolerance)) {
                throw ValidationError("kernel matrix is not symmetric");
            }
        }
    }
}

KernelMatrix build_kernel(const std::vector<const Embedding*>& items) {
    const auto n = static_cast<Eigen::Index>(items.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Embedding& a = *items[static_cast<std::size_t>(i)];
        require_unit(a);
        if (a.dim() != items[0]->dim()) throw ValidationError("dimension mismatch at '" + a.id + "'");
        // Diagonal is pinned to the exact self-similarity of a unit vector.
        gram(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double s = a.vector.dot(items[static_cast<std::size_t>(j)]->vector);
            gram(i, j) = s;
            gram(j, i) = s;
        }
    }
    return KernelMatrix(std::move(gram));
}

KernelMatrix build_kernel(const EmbeddingSet& set) {
    std::vector<const Embedding*> items;
    items.reserve(set.size());
    for (const auto& e : set) items.push_back(&e);
    return build_kernel(items);
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            throw NumericalError("Cholesky breakdown at pivot " + std::to_string(j) + " (value " +
                                 std::to_string(pivot) + "); matrix is not positive definite");
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
        }
    }
    return l;
}

double log_det_regularized(const KernelMatrix& kernel) {
    const Eigen::Index n = kernel.size();
    if (n == 0) return 0.0;
    const Eigen::MatrixXd l = cholesky_lower(kernel.entries() + Eigen::MatrixXd::Identity(n, n));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += 2.0 * std::log(l(i, i));
    return acc;
}

KernelMatrix principal_submatrix(const KernelMatrix& kernel, const std::vector<std::size_t>& indices) {
    const auto n = static_cast<std::size_t>(kernel.size());
    std::vector<bool> seen(n, false);
    for (auto i : indices) {
        if (i >= n) throw ValidationError("principal_submatrix: index " + std::to_string(i) + " out of range");
        if (seen[i]) throw ValidationError("principal_submatrix: duplicate index " + std::to_string(i));
        seen[i] = true;
    }
    const auto m = static_cast<Eigen::Index>(indices.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
            sub(r, c) = kernel(static_cast<Eigen::Index>(indices[static_cast<std::size_t>(r)]),
                               static_cast<Eigen::Index>(indices[static_cast<std::size_t>(c)]));
        }
    }
    return KernelMatrix(std::move(sub));
}

}  // namespace dppgrpo
