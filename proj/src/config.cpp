#include "dppgrpo/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "dppgrpo/errors.hpp"

namespace dppgrpo {

using nlohmann::json;

namespace {

// Reads fields from one JSON object and rejects any key nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(where() + " must be a JSON object");
    }

    [[nodiscard]] bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key);
    }

    [[nodiscard]] const json& raw(const std::string& key) {
        known_.insert(key);
        return j_.at(key);
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ValidationError(field(key) + " must be a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ValidationError(field(key) + " must be an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
                    throw ValidationError(field(key) + " must be >= 0");
                }
            } else {
                const auto x = v.get<std::int64_t>();
                if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
                    throw ValidationError(field(key) + " is out of range");
                }
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ValidationError(field(key) + " must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ValidationError(field(key) + " must be a string");
        }
        out = v.get<T>();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!known_.contains(k)) throw ValidationError("unknown config key '" + field(k) + "'");
        }
    }

private:
    [[nodiscard]] std::string where() const { return path_.empty() ? "config" : "config field '" + path_ + "'"; }

    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

// Re-raises a validation failure with the config field that owns it.
template <typename F>
void validated(const std::string& field, F&& check) {
    try {
        check();
    } catch (const ValidationError& e) {
        throw ValidationError("invalid " + field + ": " + e.what());
    }
}

void check_version(ObjectReader& r) {
    if (!r.has("version")) throw ValidationError("config is missing the 'version' field");
    int version = 0;
    r.read("version", version);
    if (version != kConfigVersion) {
        throw ValidationError("unsupported config version " + std::to_string(version) + " (expected " +
                              std::to_string(kConfigVersion) + ")");
    }
}

WorldParams parse_world(const json& j, WorldParams w) {
    ObjectReader r(j, "world");
    r.read("modes", w.modes);
    r.read("candidates", w.candidates);
    r.read("dim", w.dim);
    r.read("sigma", w.sigma);
    r.read("query_spread", w.query_spread);
    r.read("center_overlap", w.center_overlap);
    r.read("seed", w.seed);
    r.finish();
    validated("world", [&] { w.validate(); });
    return w;
}

void parse_training(const json& j, GrpoConfig& g, bool with_reward) {
    ObjectReader r(j, "training");
    r.read("group_size", g.group_size);
    r.read("clip_epsilon", g.clip_epsilon);
    r.read("kl_beta", g.kl_beta);
    r.read("learning_rate", g.learning_rate);
    r.read("iterations", g.iterations);
    r.read("inner_steps", g.inner_steps);
    if (with_reward) {
        r.read("lambda_div", g.weights.lambda_div);
        r.read("lambda_rel", g.weights.lambda_rel);
        r.read("seed", g.seed);
    }
    r.finish();
    if (g.group_size < 2) throw ValidationError("training.group_size must be >= 2 (got " + std::to_string(g.group_size) + ")");
    if (!(g.clip_epsilon > 0.0 && g.clip_epsilon < 1.0)) {
        throw ValidationError("training.clip_epsilon must lie in (0, 1) (got " + json(g.clip_epsilon).dump() + ")");
    }
    if (!(g.kl_beta >= 0.0)) throw ValidationError("training.kl_beta must be >= 0");
    if (!(g.learning_rate > 0.0)) throw ValidationError("training.learning_rate must be > 0");
    if (g.iterations < 0) throw ValidationError("training.iterations must be >= 0");
    if (g.inner_steps < 1) throw ValidationError("training.inner_steps must be >= 1");
    if (with_reward) validated("training reward weights", [&] { g.weights.validate(); });
}

void parse_context(const json& j, ContextKind& kind, std::size_t& max_size) {
    ObjectReader r(j, "context");
    if (r.has("kind")) {
        std::string name;
        r.read("kind", name);
        validated("context.kind", [&] { kind = parse_context_kind(name); });
    }
    r.read("max_size", max_size);
    r.finish();
}

RolloutMode parse_mode_field(ObjectReader& r) {
    std::string name = "sample";
    r.read("rollout_mode", name);
    RolloutMode mode{};
    validated("rollout_mode", [&] { mode = parse_rollout_mode(name); });
    return mode;
}

}  // namespace

void SimulateConfig::validate() const {
    world.validate();
    experiment.validate();
    if (arms.size() < 2) throw ValidationError("arms must list at least 2 reward configurations");
    std::set<std::string> names;
    for (const auto& a : arms) {
        if (a.name.empty()) throw ValidationError("arm names must be non-empty");
        if (!names.insert(a.name).second) throw ValidationError("duplicate arm name '" + a.name + "'");
        validated("arm '" + a.name + "'", [&] { a.weights.validate(); });
    }
    if (experiment.k > static_cast<std::size_t>(world.candidates)) {
        throw ValidationError("k must not exceed world.candidates");
    }
}

void TrainConfig::validate() const {
    training.validate();
    if (embeddings.has_value() == world.has_value()) {
        throw ValidationError("train config needs exactly one of 'embeddings' or 'world'");
    }
    if (embeddings && query_id.empty()) throw ValidationError("query_id is required with 'embeddings'");
    if (world) world->validate();
    if (k < 1) throw ValidationError("k must be >= 1");
}

SimulateConfig parse_simulate_config(const json& j) {
    SimulateConfig c;
    ObjectReader r(j, "");
    check_version(r);
    if (r.has("world")) c.world = parse_world(r.raw("world"), c.world);
    r.read("k", c.experiment.k);
    if (r.has("seeds")) {
        const json& s = r.raw("seeds");
        if (!s.is_array() || s.empty()) throw ValidationError("seeds must be a non-empty array of integers");
        c.experiment.seeds.clear();
        for (const auto& v : s) {
            if (!v.is_number_unsigned()) throw ValidationError("seeds must be non-negative integers");
            c.experiment.seeds.push_back(v.get<std::uint64_t>());
        }
    }
    c.experiment.rollout_mode = parse_mode_field(r);
    if (r.has("context")) parse_context(r.raw("context"), c.experiment.context, c.experiment.context_max);
    if (r.has("training")) parse_training(r.raw("training"), c.experiment.training, false);
    if (r.has("arms")) {
        const json& a = r.raw("arms");
        if (!a.is_array()) throw ValidationError("arms must be an array");
        c.arms.clear();
        for (std::size_t i = 0; i < a.size(); ++i) {
            ObjectReader ar(a[i], "arms[" + std::to_string(i) + "]");
            ArmSpec spec;
            ar.read("name", spec.name);
            ar.read("lambda_div", spec.weights.lambda_div);
            ar.read("lambda_rel", spec.weights.lambda_rel);
            ar.finish();
            c.arms.push_back(spec);
        }
    }
    r.finish();
    if (c.experiment.k < 1) throw ValidationError("k must be >= 1");
    c.validate();
    return c;
}

TrainConfig parse_train_config(const json& j, const std::filesystem::path& base_dir) {
    TrainConfig c;
    ObjectReader r(j, "");
    check_version(r);
    if (r.has("embeddings")) {
        std::string p;
        r.read("embeddings", p);
        std::filesystem::path path(p);
        c.embeddings = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    }
    r.read("query_id", c.query_id);
    if (r.has("reference_ids")) {
        const json& ids = r.raw("reference_ids");
        if (!ids.is_array()) throw ValidationError("reference_ids must be an array of strings");
        for (const auto& v : ids) {
            if (!v.is_string()) throw ValidationError("reference_ids must be an array of strings");
            c.reference_ids.push_back(v.get<std::string>());
        }
    }
    if (r.has("world")) c.world = parse_world(r.raw("world"), WorldParams{});
    if (r.has("context")) parse_context(r.raw("context"), c.context, c.context_max);
    if (r.has("training")) parse_training(r.raw("training"), c.training, true);
    r.read("k", c.k);
    c.rollout_mode = parse_mode_field(r);
    r.finish();
    c.validate();
    return c;
}

json to_json(const WorldParams& w) {
    return {{"modes", w.modes},   {"candidates", w.candidates},     {"dim", w.dim},
            {"sigma", w.sigma},   {"query_spread", w.query_spread}, {"center_overlap", w.center_overlap},
            {"seed", w.seed}};
}

json to_json(const GrpoConfig& g) {
    return {{"group_size", g.group_size},       {"clip_epsilon", g.clip_epsilon}, {"kl_beta", g.kl_beta},
            {"learning_rate", g.learning_rate}, {"iterations", g.iterations},     {"inner_steps", g.inner_steps}};
}

json to_json(const SimulateConfig& c) {
    json arms = json::array();
    for (const auto& a : c.arms) {
        arms.push_back({{"name", a.name}, {"lambda_div", a.weights.lambda_div}, {"lambda_rel", a.weights.lambda_rel}});
    }
    return {{"version", kConfigVersion},
            {"world", to_json(c.world)},
            {"k", c.experiment.k},
            {"seeds", c.experiment.seeds},
            {"rollout_mode", to_string(c.experiment.rollout_mode)},
            {"context", {{"kind", to_string(c.experiment.context)}, {"max_size", c.experiment.context_max}}},
            {"training", to_json(c.experiment.training)},
            {"arms", arms}};
}

json to_json(const TrainConfig& c) {
    json training = to_json(c.training);
    training["lambda_div"] = c.training.weights.lambda_div;
    training["lambda_rel"] = c.training.weights.lambda_rel;
    training["seed"] = c.training.seed;
    json out = {{"version", kConfigVersion},
                {"training", training},
                {"k", c.k},
                {"rollout_mode", to_string(c.rollout_mode)}};
    if (c.embeddings) {
        out["embeddings"] = c.embeddings->generic_string();
        out["query_id"] = c.query_id;
        out["reference_ids"] = c.reference_ids;
    }
    if (c.world) {
        out["world"] = to_json(*c.world);
        out["context"] = {{"kind", to_string(c.context)}, {"max_size", c.context_max}};
    }
    return out;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ValidationError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace dppgrpo
