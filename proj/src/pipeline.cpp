#include "storychain/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "storychain/errors.hpp"
#include "storychain/keywords.hpp"

namespace storychain {

ScoringParams scoring_params(const PipelineConfig& config) {
    ScoringParams params;
    params.keywords = config.keywords;
    params.bm25f = config.bm25f;
    params.expansion_terms = config.expansion_terms;
    return params;
}

ResolvedThresholds resolve_thresholds(const PipelineConfig& config, const Corpus& corpus,
                                      const PairScorer& scorer, const std::vector<LabeledPair>& labels) {
    ResolvedThresholds resolved;
    const bool any_unset = !config.threshold_keyword || !config.threshold_bm25f || !config.threshold_ensemble;
    Thresholds base{kFallbackThreshold, kFallbackThreshold, kFallbackThreshold};
    if (any_unset && !labels.empty()) {
        const auto scored = score_labels(corpus, labels, scorer, config.window());
        resolved.calibration = calibrate(scored.pairs);
        base = resolved.calibration->best;
    }
    resolved.thresholds.keyword = config.threshold_keyword.value_or(base.keyword);
    resolved.thresholds.bm25f = config.threshold_bm25f.value_or(base.bm25f);
    resolved.thresholds.ensemble = config.threshold_ensemble.value_or(base.ensemble);
    return resolved;
}

ClusterResult cluster_articles(const Corpus& corpus, const PairScorer& scorer, const PipelineConfig& config,
                               double threshold) {
    ClusterResult result;
    NetworkParams params;
    params.window = config.window();
    params.threshold = threshold;
    params.workers = config.workers;
    result.network = build_network(corpus, scorer, params);

    HierarchyOptions options;
    options.teleport = config.teleport;
    options.partition.seed = config.seed;
    options.partition.trials = config.trials;
    result.tree = hierarchical_cluster(result.network.graph(), options);
    return result;
}

namespace {

std::ofstream open_output(const PipelineConfig& config, const char* name) {
    std::filesystem::create_directories(config.output_dir);
    const auto path = config.output_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const PipelineConfig& config, const char* name) {
    out.close();
    if (!out) throw IoError("error while writing '" + (config.output_dir / name).string() + "'");
}

template <typename Writer>
void write_output(const PipelineConfig& config, const char* name, Writer&& writer) {
    auto out = open_output(config, name);
    writer(out);
    finish(out, config, name);
}

void report_rejects(const LoadReport& report, std::ostream& log) {
    if (report.rejected == 0) return;
    log << "rejected " << report.rejected << " record(s):\n";
    for (const auto& reason : report.reasons) log << "  " << reason << '\n';
}

std::vector<LabeledPair> configured_labels(const PipelineConfig& config, const Corpus& corpus) {
    if (config.labels.empty()) return {};
    return read_labels(config.labels, corpus);
}

std::string fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

LoadedCorpus load_for_stage(const PipelineConfig& config, std::ostream& log) {
    LoadedCorpus loaded;
    if (!config.corpus.empty()) {
        auto result = load_corpus(config.corpus, config.format);
        loaded.corpus = std::move(result.corpus);
        loaded.report = std::move(result.report);
        report_rejects(loaded.report, log);
    } else {
        const auto ingested = config.output_dir / files::corpus;
        if (!std::filesystem::exists(ingested)) {
            throw IoError("no corpus configured and no ingested corpus at '" + ingested.string() + "'");
        }
        auto result = load_corpus(ingested, CorpusFormat::jsonl);
        loaded.corpus = std::move(result.corpus);
        loaded.report = std::move(result.report);
    }
    if (loaded.corpus.empty()) throw DataError("corpus contains no valid articles");

    const auto hash = loaded.corpus.content_hash();
    if (auto cached = load_stats_cache(config.output_dir / files::stats_cache, hash)) {
        loaded.stats = std::move(*cached);
        loaded.from_cache = true;
    } else {
        loaded.stats = build_stats(loaded.corpus);
    }
    return loaded;
}

void run_ingest(const PipelineConfig& config, std::ostream& log) {
    if (config.corpus.empty()) throw ConfigError("ingest needs a corpus path");
    auto result = load_corpus(config.corpus, config.format);
    report_rejects(result.report, log);
    const Corpus& corpus = result.corpus;
    if (corpus.empty()) throw DataError("corpus contains no valid articles");
    const CorpusStats stats = build_stats(corpus);

    std::filesystem::create_directories(config.output_dir);
    write_corpus_jsonl(corpus, config.output_dir / files::corpus);
    save_stats_cache(stats, corpus.content_hash(), config.output_dir / files::stats_cache);
    const auto profiles = keyword_profiles(stats, config.keywords);
    write_output(config, files::profiles, [&](std::ostream& out) { write_profiles(out, profiles, corpus, stats); });
    write_output(config, files::config, [&](std::ostream& out) { write_config(out, config); });
    write_output(config, files::ingest_summary, [&](std::ostream& out) {
        out << "articles " << corpus.size() << '\n'
            << "rejected " << result.report.rejected << '\n'
            << "vocabulary " << stats.vocabulary_size() << '\n'
            << "tokens " << stats.total_tokens() << '\n'
            << "first_published " << format_timestamp(corpus.articles().front().published) << '\n'
            << "last_published " << format_timestamp(corpus.articles().back().published) << '\n';
    });
    log << "ingested " << corpus.size() << " articles (" << result.report.rejected << " rejected, "
        << stats.vocabulary_size() << " distinct terms)\n";
}

void run_cluster(const PipelineConfig& config, std::ostream& log) {
    const LoadedCorpus loaded = load_for_stage(config, log);
    const Corpus& corpus = loaded.corpus;
    const PairScorer scorer(loaded.stats, scoring_params(config));
    const auto labels = configured_labels(config, corpus);
    const auto resolved = resolve_thresholds(config, corpus, scorer, labels);
    const double threshold = resolved.thresholds.ensemble;

    const ClusterResult result = cluster_articles(corpus, scorer, config, threshold);
    if (result.network.edges.empty()) {
        log << "warning: no related pairs at threshold " << fixed(threshold, 2)
            << "; every article is its own cluster\n";
    }

    write_output(config, files::edges, [&](std::ostream& out) { write_edges(out, result.network, corpus); });
    write_output(config, files::tree, [&](std::ostream& out) {
        write_tree(out, result.tree, [&corpus](NodeId node) { return corpus[node].id; });
    });
    write_output(config, files::summary, [&](std::ostream& out) {
        out << "articles " << corpus.size() << '\n'
            << "pairs_compared " << result.network.pairs_compared << '\n'
            << "pairs_related " << result.network.pairs_related << '\n'
            << "edges " << result.network.edges.size() << '\n'
            << "threshold " << fixed(threshold, 2) << (resolved.calibration ? " calibrated" : "") << '\n';
        write_tree_summary(out, result.tree);
    });
    log << "clustered " << corpus.size() << " articles: " << result.network.pairs_compared << " pairs compared, "
        << result.network.pairs_related << " related, " << result.tree.modules.size() << " top-level modules, depth "
        << result.tree.depth() << '\n';
}

void run_eval(const PipelineConfig& config, std::ostream& log) {
    if (config.labels.empty()) throw ConfigError("eval needs a labels file");
    const LoadedCorpus loaded = load_for_stage(config, log);
    const Corpus& corpus = loaded.corpus;
    const PairScorer scorer(loaded.stats, scoring_params(config));
    const auto labels = read_labels(config.labels, corpus);
    const auto resolved = resolve_thresholds(config, corpus, scorer, labels);
    const auto scored = score_labels(corpus, labels, scorer, config.window());
    const EvalReport report = evaluate(scored, resolved.thresholds);

    write_output(config, files::eval_table, [&](std::ostream& out) { write_eval_table(out, report); });
    write_output(config, files::eval_csv, [&](std::ostream& out) { write_eval_csv(out, report); });
    write_output(config, files::predictions,
                 [&](std::ostream& out) { write_predictions(out, scored, resolved.thresholds, corpus); });
    write_output(config, files::thresholds, [&](std::ostream& out) {
        out << "keyword " << fixed(resolved.thresholds.keyword, 2) << '\n'
            << "bm25f " << fixed(resolved.thresholds.bm25f, 2) << '\n'
            << "ensemble " << fixed(resolved.thresholds.ensemble, 2) << '\n';
    });
    if (resolved.calibration) {
        write_output(config, files::calibration,
                     [&](std::ostream& out) { write_calibration_csv(out, *resolved.calibration); });
    }
    if (scored.outside_window > 0) {
        log << "excluded " << scored.outside_window << " labelled pair(s) outside the window\n";
    }
    const auto& ensemble = report.of(Classifier::ensemble);
    log << "evaluated " << report.pairs << " labelled pairs: ensemble precision " << fixed(round3(ensemble.precision()), 3)
        << ", recall " << fixed(round3(ensemble.recall()), 3) << ", F1 " << fixed(round3(ensemble.f1()), 3) << '\n';
}

void run_stats(const PipelineConfig& config, std::ostream& log) {
    const LoadedCorpus loaded = load_for_stage(config, log);
    const Corpus& corpus = loaded.corpus;
    const auto tree_path = config.output_dir / files::tree;
    std::ifstream in(tree_path);
    if (!in) throw IoError("cannot read cluster tree '" + tree_path.string() + "'; run the cluster stage first");
    const ClusterTree tree = read_tree(in, [&corpus](std::string_view id) { return corpus.find(id); });
    if (tree.node_count() != corpus.size()) {
        throw DataError("cluster tree covers " + std::to_string(tree.node_count()) + " articles but the corpus has " +
                        std::to_string(corpus.size()));
    }

    const auto sizes = cluster_size_table(tree, corpus, config.stats_level);
    const auto associations = association_stats(tree, corpus, config.stats_level);
    const auto bin = Duration(static_cast<Duration::rep>(config.histogram_bin_hours * 3600.0));
    const auto histogram = followup_histogram(tree, corpus, config.followup_min_cluster, bin, config.stats_level);

    write_output(config, files::sizes_table, [&](std::ostream& out) { write_size_table(out, sizes); });
    write_output(config, files::sizes_csv, [&](std::ostream& out) { write_size_csv(out, sizes); });
    write_output(config, files::associations_table, [&](std::ostream& out) { write_associations(out, associations); });
    write_output(config, files::associations_csv,
                 [&](std::ostream& out) { write_associations_csv(out, associations); });
    write_output(config, files::histogram_csv, [&](std::ostream& out) { write_histogram_csv(out, histogram); });
    log << "stories: " << sizes.total.clusters << " clusters of 2+ articles holding " << sizes.total.articles
        << " articles (" << fixed(sizes.total.percent, 1) << "% of corpus)\n";
}

void run_all(const PipelineConfig& config, std::ostream& log) {
    run_ingest(config, log);
    if (!config.labels.empty()) run_eval(config, log);
    run_cluster(config, log);
    run_stats(config, log);
}

}  // namespace storychain
