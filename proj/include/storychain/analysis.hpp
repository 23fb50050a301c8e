#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "storychain/community.hpp"
#include "storychain/corpus.hpp"
#include "storychain/simnet.hpp"

namespace storychain {

// ---------------------------------------------------------------------------
// Pairwise classifier evaluation

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    double accuracy() const;
    /// Zero when nothing was predicted related.
    double precision() const;
    /// Zero when nothing is truly related.
    double recall() const;
    double f1() const;

    void add(bool truth, bool predicted);
};

/// Half-away-from-zero rounding to three decimals, the precision reports use.
double round3(double value);

enum class Classifier : std::uint8_t { keyword = 0, bm25f = 1, ensemble = 2 };
inline constexpr std::array<Classifier, 3> kClassifiers{Classifier::keyword, Classifier::bm25f,
                                                        Classifier::ensemble};
const char* classifier_name(Classifier c);

struct LabeledPair {
    DocId a;
    DocId b;
    bool related;
};

/// CSV with header id_a,id_b,related (0/1). A malformed row or an id missing
/// from the corpus throws DataError citing the line number.
std::vector<LabeledPair> read_labels(const std::filesystem::path& path, const Corpus& corpus);
std::vector<LabeledPair> read_labels(std::istream& in, const Corpus& corpus);

/// A labelled pair with the three classifier scores: the keyword overlap and
/// the symmetric BM25F and ensemble scores.
struct ScoredPair {
    DocId a;
    DocId b;
    bool related;
    std::array<double, 3> score;

    double score_of(Classifier c) const { return score[static_cast<std::size_t>(c)]; }
};

struct ScoredLabels {
    std::vector<ScoredPair> pairs;
    /// Labelled pairs published further apart than the window.
    std::size_t outside_window = 0;
};

ScoredLabels score_labels(const Corpus& corpus, const std::vector<LabeledPair>& labels,
                          const PairScorer& scorer, Duration window);

/// Threshold grid 0.05, 0.10, ..., 0.95.
std::vector<double> threshold_grid();

struct CalibrationPoint {
    double threshold;
    std::array<Confusion, 3> confusion;
};

struct Calibration {
    std::vector<CalibrationPoint> curve;
    /// Per classifier, the F1-maximising grid value (smallest on ties).
    Thresholds best;
};

Calibration calibrate(const std::vector<ScoredPair>& pairs, const std::vector<double>& grid = threshold_grid());

struct EvalReport {
    std::array<Confusion, 3> confusion;
    Thresholds thresholds;
    std::size_t articles = 0;
    std::size_t pairs = 0;
    std::size_t outside_window = 0;

    const Confusion& of(Classifier c) const { return confusion[static_cast<std::size_t>(c)]; }
};

EvalReport evaluate(const ScoredLabels& scored, const Thresholds& thresholds);

double threshold_of(const Thresholds& t, Classifier c);

/// Aligned text table: one column per classifier, rows for the four metrics
/// (three decimals), the confusion counts and the sample sizes.
void write_eval_table(std::ostream& out, const EvalReport& report);
void write_eval_csv(std::ostream& out, const EvalReport& report);
void write_calibration_csv(std::ostream& out, const Calibration& calibration);
/// id_a, id_b, keyword_related, bm25f_related, ensemble_related (0/1), tab-separated.
void write_predictions(std::ostream& out, const ScoredLabels& scored, const Thresholds& thresholds,
                       const Corpus& corpus);

// ---------------------------------------------------------------------------
// Story statistics

enum class ClusterLevel { top, leaf };

/// Member lists (ascending) of the clusters at the given level, singletons
/// included.
std::vector<std::vector<DocId>> clusters_at(const ClusterTree& tree, ClusterLevel level);

/// Last minus first publication time, in days.
double duration_days(const std::vector<DocId>& members, const Corpus& corpus);

struct SizeBin {
    std::string label;
    std::size_t min_size;
    std::size_t max_size;  // inclusive; SIZE_MAX for the open bin
    std::size_t clusters = 0;
    std::size_t articles = 0;
    double percent = 0.0;        // of all articles in the corpus
    double mean_duration = 0.0;  // days
};

struct SizeTable {
    std::vector<SizeBin> bins;  // 2-10, 11-20, 21-30, 31-40, 40+
    SizeBin total;
    std::size_t corpus_articles = 0;
};

SizeTable cluster_size_table(const ClusterTree& tree, const Corpus& corpus, ClusterLevel level = ClusterLevel::top);

struct AssociationStats {
    std::size_t articles = 0;
    /// Articles sharing a cluster with at least one article from the same source.
    std::size_t same_source = 0;
    /// Articles sharing a cluster with at least one article from another source.
    std::size_t cross_source = 0;

    double same_source_percent() const;
    double cross_source_percent() const;
};

AssociationStats association_stats(const ClusterTree& tree, const Corpus& corpus,
                                   ClusterLevel level = ClusterLevel::top);

struct HistogramBin {
    std::int64_t start_hours;
    std::size_t count;
    double percent;
};

struct FollowupHistogram {
    std::int64_t bin_hours = 1;
    std::size_t followups = 0;
    std::size_t clusters = 0;
    /// Contiguous bins from 0 up to the last occupied one.
    std::vector<HistogramBin> bins;

    bool empty() const { return followups == 0; }
};

/// For clusters with at least `min_cluster` articles, the delay from the
/// cluster's first publication to each later article, binned.
FollowupHistogram followup_histogram(const ClusterTree& tree, const Corpus& corpus, std::size_t min_cluster = 10,
                                     Duration bin = std::chrono::hours(1), ClusterLevel level = ClusterLevel::top);

void write_size_table(std::ostream& out, const SizeTable& table);
void write_size_csv(std::ostream& out, const SizeTable& table);
void write_associations(std::ostream& out, const AssociationStats& stats);
void write_associations_csv(std::ostream& out, const AssociationStats& stats);
/// Two columns: hours, percent.
void write_histogram_csv(std::ostream& out, const FollowupHistogram& histogram);

}  // namespace storychain
