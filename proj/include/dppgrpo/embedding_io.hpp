#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace dppgrpo {

inline constexpr double kMinNorm = 1e-12;
inline constexpr double kUnitTolerance = 1e-9;

struct Embedding {
    std::string id;
    Eigen::VectorXd vector;
    std::map<std::string, std::string> meta;

    [[nodiscard]] Eigen::Index dim() const { return vector.size(); }
};

/// Ordered collection of embeddings with a common dimension and unique ids.
///
/// The dimension is fixed by the first inserted item; an empty set has no
/// dimension yet.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    explicit EmbeddingSet(std::vector<Embedding> items);

    void push_back(Embedding e);

    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] std::optional<Eigen::Index> dim() const { return dim_; }

    [[nodiscard]] const Embedding& operator[](std::size_t i) const { return items_[i]; }
    [[nodiscard]] const std::vector<Embedding>& items() const { return items_; }
    [[nodiscard]] auto begin() const { return items_.begin(); }
    [[nodiscard]] auto end() const { return items_.end(); }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const;
    /// Throws ValidationError naming the id when absent.
    [[nodiscard]] const Embedding& at(std::string_view id) const;

    /// Returns a new set restricted to `indices`, in that order.
    [[nodiscard]] EmbeddingSet subset(const std::vector<std::size_t>& indices) const;

private:
    std::vector<Embedding> items_;
    std::unordered_map<std::string, std::size_t> index_;
    std::optional<Eigen::Index> dim_;
};

/// Unit-normalizes the vector. Rejects norms below 1e-12.
[[nodiscard]] Embedding normalize(const Embedding& e);
[[nodiscard]] EmbeddingSet normalize_all(const EmbeddingSet& set);

[[nodiscard]] bool is_unit(const Eigen::VectorXd& v, double tol = kUnitTolerance);
void require_unit(const Embedding& e, double tol = kUnitTolerance);
void require_unit(const EmbeddingSet& set, double tol = kUnitTolerance);

[[nodiscard]] double cosine(const Embedding& a, const Embedding& b);

// JSON Lines persistence: {"id": ..., "vector": [...], "meta": {...}} per line.
[[nodiscard]] EmbeddingSet load_embeddings(const std::filesystem::path& path);
[[nodiscard]] EmbeddingSet parse_embeddings(std::string_view text);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
[[nodiscard]] std::string serialize_embeddings(const EmbeddingSet& set);

}  // namespace dppgrpo
