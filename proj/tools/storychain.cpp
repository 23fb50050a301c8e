// storychain: detect story chains in a timestamped news corpus.
//
//   storychain ingest  --config pipeline.conf
//   storychain cluster --corpus articles.jsonl -o out --threshold 0.4
//   storychain run     --config pipeline.conf --set seed=7
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "storychain/config.hpp"
#include "storychain/errors.hpp"
#include "storychain/pipeline.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Overrides {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> flags;
    std::vector<std::string> settings;
};

void add_flag(CLI::App& app, Overrides& o, const std::string& names, const std::string& key,
              const std::string& help) {
    app.add_option_function<std::string>(names, [&o, key](const std::string& v) { o.flags.emplace_back(key, v); },
                                         help);
}

storychain::PipelineConfig build_config(const Overrides& o) {
    storychain::PipelineConfig config;
    if (!o.config_path.empty()) config = storychain::load_config(o.config_path);
    for (const auto& [key, value] : o.flags) storychain::apply_setting(config, key, value);
    for (const auto& setting : o.settings) {
        const auto eq = setting.find('=');
        if (eq == std::string::npos) throw storychain::ConfigError("--set expects key=value, got '" + setting + "'");
        storychain::apply_setting(config, setting.substr(0, eq), setting.substr(eq + 1));
    }
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detect news story chains: windowed pairwise similarity, similarity network, map-equation clustering"};
    app.fallthrough();
    app.require_subcommand(1);

    Overrides overrides;
    app.add_option("-c,--config", overrides.config_path, "Flat key = value configuration file");
    add_flag(app, overrides, "--corpus", "corpus", "Corpus file (JSON lines or CSV)");
    add_flag(app, overrides, "--format", "format", "Corpus format: jsonl or csv");
    add_flag(app, overrides, "--labels", "labels", "Labelled pairs CSV (id_a,id_b,related)");
    add_flag(app, overrides, "-o,--output-dir", "output_dir", "Directory for all outputs");
    add_flag(app, overrides, "--window-days", "window_days", "Comparison window in days");
    add_flag(app, overrides, "--threshold", "threshold_ensemble", "Ensemble threshold, or 'calibrate'");
    add_flag(app, overrides, "--seed", "seed", "Seed for the partition search");
    add_flag(app, overrides, "--workers", "workers", "Scoring threads (0 = all cores)");
    app.add_option("--set", overrides.settings, "Override any config key: --set key=value (repeatable)");

    auto* ingest = app.add_subcommand("ingest", "Validate and tokenise the corpus; cache its statistics");
    auto* cluster = app.add_subcommand("cluster", "Score windowed pairs, build the network and partition it");
    auto* eval = app.add_subcommand("eval", "Evaluate the three classifiers against labelled pairs");
    auto* stats = app.add_subcommand("stats", "Cluster-size, source-association and follow-up statistics");
    auto* run = app.add_subcommand("run", "ingest, eval (with labels), cluster and stats in sequence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const auto config = build_config(overrides);
        if (*ingest) storychain::run_ingest(config, std::cerr);
        if (*cluster) storychain::run_cluster(config, std::cerr);
        if (*eval) storychain::run_eval(config, std::cerr);
        if (*stats) storychain::run_stats(config, std::cerr);
        if (*run) storychain::run_all(config, std::cerr);
    } catch (const storychain::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const storychain::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
