// dppgrpo: score, select, train, simulate and eval over embedding files.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dppgrpo/commands.hpp"
#include "dppgrpo/config.hpp"
#include "dppgrpo/errors.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

void emit(const nlohmann::json& report, const std::string& out) {
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!out.empty()) dppgrpo::write_text_file(out, text);
}

std::vector<std::string> split_ids(const std::string& list) {
    std::vector<std::string> ids;
    std::string cur;
    for (char c : list) {
        if (c == ',') {
            if (!cur.empty()) ids.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) ids.push_back(cur);
    return ids;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diversity-aware set selection and GRPO training over embedding vectors"};
    app.require_subcommand(1);

    double lambda_div = 0.5;
    double lambda_rel = 0.5;
    std::string embeddings, query_id, ref_ids, out, csv, config_path, mode = "greedy";
    int k = 8;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> top_m;

    auto add_weights = [&](CLI::App* cmd) {
        cmd->add_option("--lambda-div", lambda_div, "Diversity weight")->capture_default_str();
        cmd->add_option("--lambda-rel", lambda_rel, "Relevance weight")->capture_default_str();
    };

    auto* score = app.add_subcommand("score", "Reward breakdown for every non-reference candidate");
    score->add_option("--embeddings", embeddings, "JSON Lines embedding file")->required();
    score->add_option("--query-id", query_id, "Id of the query record")->required();
    score->add_option("--ref-ids", ref_ids, "Comma-separated reference set ids");
    add_weights(score);
    score->add_option("--out", out, "Also write the JSON report here");

    auto* select = app.add_subcommand("select", "Pick a diverse K-subset (greedy or brute force)");
    select->add_option("--embeddings", embeddings, "JSON Lines embedding file")->required();
    select->add_option("--query-id", query_id, "Id of the query record")->required();
    select->add_option("--k", k, "Set size")->capture_default_str();
    select->add_option("--mode", mode, "greedy | bruteforce")->capture_default_str();
    add_weights(select);
    select->add_option("--out", out, "Also write the JSON report here");

    auto* train = app.add_subcommand("train", "Train the toy policy with GRPO");
    train->add_option("--config", config_path, "JSON config file")->required();
    train->add_option("--out", out, "Output directory")->required();
    train->add_option("--seed", seed, "Override training.seed");

    auto* simulate = app.add_subcommand("simulate", "Run the clustered-world experiment");
    simulate->add_option("--config", config_path, "JSON config file")->required();
    simulate->add_option("--out", out, "Output directory")->required();
    simulate->add_option("--seed", seed, "Override world.seed");
    simulate->add_option("--csv", csv, "Write the arm x metric table here");

    auto* eval = app.add_subcommand("eval", "Diversity and alignment metrics over an embedding file");
    eval->add_option("--embeddings", embeddings, "JSON Lines embedding file")->required();
    eval->add_option("--query-id", query_id, "Query id (excluded from the evaluated set)");
    eval->add_option("--top-m", top_m, "Eigenvalues kept by the truncated entropy");
    eval->add_option("--out", out, "Also write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        using namespace dppgrpo;
        const RewardWeights weights{lambda_div, lambda_rel};
        if (*score) {
            emit(run_score({embeddings, query_id, split_ids(ref_ids), weights}), out);
        } else if (*select) {
            if (k < 1) throw ValidationError("--k must be >= 1\n" + select->help());
            emit(run_select({embeddings, query_id, static_cast<std::size_t>(k), mode, weights}), out);
        } else if (*eval) {
            EvalArgs args{embeddings, std::nullopt, top_m};
            if (!query_id.empty()) args.query_id = query_id;
            emit(run_eval(args), out);
        } else if (*train) {
            const std::filesystem::path path(config_path);
            TrainConfig cfg = parse_train_config(read_json_file(path), path.parent_path());
            if (seed) cfg.training.seed = *seed;
            const auto report = run_train(cfg, out);
            std::cout << report["metrics"].dump(2) << "\n";
        } else if (*simulate) {
            SimulateConfig cfg = parse_simulate_config(read_json_file(config_path));
            if (seed) cfg.world.seed = *seed;
            std::optional<std::filesystem::path> csv_path;
            if (!csv.empty()) csv_path = csv;
            const auto report = run_simulate(cfg, out, csv_path);
            for (const auto& arm : report["experiment"]["arms"]) {
                std::cout << arm["name"].get<std::string>() << ": " << arm["summary"].dump() << "\n";
            }
        }
    } catch (const dppgrpo::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const dppgrpo::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
