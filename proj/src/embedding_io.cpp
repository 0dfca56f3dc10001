#include "dppgrpo/embedding_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dppgrpo/errors.hpp"

namespace dppgrpo {

using nlohmann::json;

EmbeddingSet::EmbeddingSet(std::vector<Embedding> items) {
    items_.reserve(items.size());
    for (auto& e : items) push_back(std::move(e));
}

void EmbeddingSet::push_back(Embedding e) {
    if (e.vector.size() < 1) throw ValidationError("embedding '" + e.id + "' has an empty vector");
    if (!e.vector.allFinite()) throw ValidationError("embedding '" + e.id + "' has a non-finite entry");
    if (dim_ && e.vector.size() != *dim_) {
        throw ValidationError("embedding '" + e.id + "' has dimension " + std::to_string(e.vector.size()) +
                              ", expected " + std::to_string(*dim_));
    }
    if (index_.contains(e.id)) throw ValidationError("duplicate embedding id '" + e.id + "'");
    if (!dim_) dim_ = e.vector.size();
    index_.emplace(e.id, items_.size());
    items_.push_back(std::move(e));
}

std::optional<std::size_t> EmbeddingSet::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Embedding& EmbeddingSet::at(std::string_view id) const {
    auto idx = index_of(id);
    if (!idx) throw ValidationError("unknown embedding id '" + std::string(id) + "'");
    return items_[*idx];
}

EmbeddingSet EmbeddingSet::subset(const std::vector<std::size_t>& indices) const {
    EmbeddingSet out;
    for (auto i : indices) {
        if (i >= items_.size()) throw ValidationError("subset index " + std::to_string(i) + " out of range");
        out.push_back(items_[i]);
    }
    return out;
}

Embedding normalize(const Embedding& e) {
    if (!e.vector.allFinite()) throw ValidationError("embedding '" + e.id + "' has a non-finite entry");
    const double n = e.vector.norm();
    if (!(n >= kMinNorm)) throw ValidationError("embedding '" + e.id + "' has zero or near-zero norm");
    Embedding out = e;
    out.vector /= n;
    return out;
}

EmbeddingSet normalize_all(const EmbeddingSet& set) {
    EmbeddingSet out;
    for (const auto& e : set) out.push_back(normalize(e));
    return out;
}

bool is_unit(const Eigen::VectorXd& v, double tol) { return std::abs(v.norm() - 1.0) <= tol; }

void require_unit(const Embedding& e, double tol) {
    if (!is_unit(e.vector, tol)) {
        throw ValidationError("embedding '" + e.id + "' is not unit-normalized (norm " +
                              std::to_string(e.vector.norm()) + ")");
    }
}

void require_unit(const EmbeddingSet& set, double tol) {
    for (const auto& e : set) require_unit(e, tol);
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("dimension mismatch between '" + a.id + "' and '" + b.id + "'");
    }
    return a.vector.dot(b.vector) / (a.vector.norm() * b.vector.norm());
}

namespace {

Embedding parse_record(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& err) {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed JSON: " + err.what());
    } catch (const json::out_of_range& err) {
        // number literals too large for a double, e.g. 1e999
        throw ValidationError("line " + std::to_string(line_no) + ": non-finite number: " + err.what());
    }
    if (!j.is_object()) throw ValidationError("line " + std::to_string(line_no) + ": record is not an object");
    if (!j.contains("id") || !j["id"].is_string()) {
        throw ValidationError("line " + std::to_string(line_no) + ": missing string field 'id'");
    }
    Embedding e;
    e.id = j["id"].get<std::string>();
    const auto where = "line " + std::to_string(line_no) + " (id '" + e.id + "')";
    if (!j.contains("vector") || !j["vector"].is_array()) {
        throw ValidationError(where + ": missing array field 'vector'");
    }
    const auto& arr = j["vector"];
    e.vector.resize(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t k = 0; k < arr.size(); ++k) {
        // null stands in for NaN/Inf when other writers serialize them
        if (!arr[k].is_number()) throw ValidationError(where + ": non-finite or non-numeric vector entry");
        e.vector[static_cast<Eigen::Index>(k)] = arr[k].get<double>();
    }
    if (j.contains("meta")) {
        if (!j["meta"].is_object()) throw ValidationError(where + ": 'meta' must be an object");
        for (const auto& [k, v] : j["meta"].items()) {
            if (!v.is_string()) throw ValidationError(where + ": meta value for '" + k + "' must be a string");
            e.meta.emplace(k, v.get<std::string>());
        }
    }
    for (const auto& [k, v] : j.items()) {
        if (k != "id" && k != "vector" && k != "meta") throw ValidationError(where + ": unknown field '" + k + "'");
    }
    return e;
}

}  // namespace

EmbeddingSet parse_embeddings(std::string_view text) {
    EmbeddingSet set;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        set.push_back(parse_record(line, line_no));
    }
    return set;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open embeddings file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_embeddings(buf.str());
}

std::string serialize_embeddings(const EmbeddingSet& set) {
    std::string out;
    for (const auto& e : set) {
        // nlohmann emits the shortest decimal that round-trips to the same double
        json j;
        j["id"] = e.id;
        j["vector"] = std::vector<double>(e.vector.data(), e.vector.data() + e.vector.size());
        if (!e.meta.empty()) j["meta"] = e.meta;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write embeddings file '" + path.string() + "'");
    out << serialize_embeddings(set);
}

}  // namespace dppgrpo
