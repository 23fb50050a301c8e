#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "storychain/analysis.hpp"
#include "storychain/community.hpp"
#include "storychain/config.hpp"
#include "storychain/corpus.hpp"
#include "storychain/simnet.hpp"

namespace storychain {

// In-memory composition of the stages, independent of any files.

ScoringParams scoring_params(const PipelineConfig& config);

struct ResolvedThresholds {
    Thresholds thresholds;
    std::optional<Calibration> calibration;  // set when labels drove any threshold
};

/// Explicit thresholds win; unset ones come from calibration on `labels`
/// (when non-empty) or fall back to 0.35.
ResolvedThresholds resolve_thresholds(const PipelineConfig& config, const Corpus& corpus,
                                      const PairScorer& scorer, const std::vector<LabeledPair>& labels);

struct ClusterResult {
    SimilarityNetwork network;
    ClusterTree tree;
};

ClusterResult cluster_articles(const Corpus& corpus, const PairScorer& scorer, const PipelineConfig& config,
                               double threshold);

// File-based stages. Every output lands in config.output_dir under a fixed
// name; progress and warnings go to `log`.

namespace files {
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* stats_cache = "stats.cache";
inline constexpr const char* profiles = "profiles.tsv";
inline constexpr const char* ingest_summary = "ingest_summary.txt";
inline constexpr const char* config = "config.txt";
inline constexpr const char* edges = "edges.tsv";
inline constexpr const char* tree = "tree.txt";
inline constexpr const char* summary = "summary.txt";
inline constexpr const char* thresholds = "thresholds.txt";
inline constexpr const char* calibration = "calibration.csv";
inline constexpr const char* eval_table = "eval.txt";
inline constexpr const char* eval_csv = "eval.csv";
inline constexpr const char* predictions = "predictions.tsv";
inline constexpr const char* sizes_table = "cluster_sizes.txt";
inline constexpr const char* sizes_csv = "cluster_sizes.csv";
inline constexpr const char* associations_table = "associations.txt";
inline constexpr const char* associations_csv = "associations.csv";
inline constexpr const char* histogram_csv = "followup_histogram.csv";
}  // namespace files

struct LoadedCorpus {
    Corpus corpus;
    CorpusStats stats;
    LoadReport report;
    bool from_cache = false;
};

/// The configured raw corpus when one is set, else the ingested copy in the
/// output directory. Statistics come from the cache when it matches.
LoadedCorpus load_for_stage(const PipelineConfig& config, std::ostream& log);

void run_ingest(const PipelineConfig& config, std::ostream& log);
void run_cluster(const PipelineConfig& config, std::ostream& log);
void run_eval(const PipelineConfig& config, std::ostream& log);
void run_stats(const PipelineConfig& config, std::ostream& log);
/// ingest, eval (when labels are configured), cluster, stats.
void run_all(const PipelineConfig& config, std::ostream& log);

}  // namespace storychain
