#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "storychain/community.hpp"
#include "storychain/corpus.hpp"
#include "storychain/keywords.hpp"
#include "storychain/retrieval.hpp"

namespace storychain {

using Duration = std::chrono::seconds;

inline constexpr Duration kDefaultWindow = std::chrono::hours(72);

/// Calls fn(a, b) with a < b for every pair published at most `window` apart.
/// The corpus is time-ordered, so each article only scans forward until the
/// window closes: O(n * w) for w articles per window.
void for_each_window_pair(const Corpus& corpus, Duration window,
                          const std::function<void(DocId, DocId)>& fn);

std::vector<std::pair<DocId, DocId>> window_pairs(const Corpus& corpus, Duration window = kDefaultWindow);

std::size_t count_window_pairs(const Corpus& corpus, Duration window = kDefaultWindow);

struct Thresholds {
    double keyword = 0.35;
    double bm25f = 0.35;
    double ensemble = 0.35;
};

struct ScoringParams {
    KeywordParams keywords;
    Bm25fParams bm25f;
    std::size_t expansion_terms = 20;
};

struct PairScore {
    double keyword = 0.0;         // symmetric by construction
    double bm25f_forward = 0.0;   // query from a, scored against b
    double bm25f_backward = 0.0;  // query from b, scored against a
    double ensemble_forward = 0.0;
    double ensemble_backward = 0.0;

    double bm25f_symmetric() const { return 0.5 * (bm25f_forward + bm25f_backward); }
    double symmetric() const { return 0.5 * (ensemble_forward + ensemble_backward); }
};

/// Everything needed to score article pairs: keyword profiles, the fielded
/// index and cached expanded queries. Immutable once built; `score` is safe
/// to call concurrently.
class PairScorer {
  public:
    PairScorer(const CorpusStats& stats, const ScoringParams& params = {});

    PairScorer(const PairScorer&) = delete;
    PairScorer& operator=(const PairScorer&) = delete;

    PairScore score(DocId a, DocId b) const;

    const CorpusStats& stats() const { return *stats_; }
    const FieldedIndex& index() const { return index_; }
    const std::vector<KeywordProfile>& profiles() const { return profiles_; }
    const Bm25fSimilarity& bm25f() const { return bm25f_; }

  private:
    const CorpusStats* stats_;
    FieldedIndex index_;
    std::vector<KeywordProfile> profiles_;
    Bm25fSimilarity bm25f_;
};

inline bool classify_pair(double score, double threshold) { return score >= threshold; }

struct SimilarityEdge {
    DocId from;
    DocId to;
    double keyword;
    double bm25f;
    double ensemble;
    bool related;
};

/// Nodes are the corpus documents; edges are the directed halves of every
/// related pair, ordered by (from, to).
struct SimilarityNetwork {
    std::size_t node_count = 0;
    std::vector<SimilarityEdge> edges;
    std::size_t pairs_compared = 0;
    std::size_t pairs_related = 0;

    DirectedGraph graph() const;
};

struct NetworkParams {
    Duration window = kDefaultWindow;
    double threshold = 0.35;  // on the symmetric ensemble score
    /// 0 means one per hardware thread. Output does not depend on it.
    std::size_t workers = 0;
};

SimilarityNetwork build_network(const Corpus& corpus, const PairScorer& scorer, const NetworkParams& params);

/// Tab-separated: from_id, to_id, keyword, bm25f, ensemble.
void write_edges(std::ostream& out, const SimilarityNetwork& network, const Corpus& corpus);

}  // namespace storychain
