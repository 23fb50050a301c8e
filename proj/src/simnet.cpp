#include "storychain/simnet.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>
#include <thread>

namespace storychain {

void for_each_window_pair(const Corpus& corpus, Duration window,
                          const std::function<void(DocId, DocId)>& fn) {
    const auto n = static_cast<DocId>(corpus.size());
    for (DocId a = 0; a < n; ++a) {
        const auto limit = corpus[a].published + window;
        for (DocId b = a + 1; b < n && corpus[b].published <= limit; ++b) fn(a, b);
    }
}

std::vector<std::pair<DocId, DocId>> window_pairs(const Corpus& corpus, Duration window) {
    std::vector<std::pair<DocId, DocId>> pairs;
    for_each_window_pair(corpus, window, [&pairs](DocId a, DocId b) { pairs.emplace_back(a, b); });
    return pairs;
}

std::size_t count_window_pairs(const Corpus& corpus, Duration window) {
    std::size_t count = 0;
    for_each_window_pair(corpus, window, [&count](DocId, DocId) { ++count; });
    return count;
}

PairScorer::PairScorer(const CorpusStats& stats, const ScoringParams& params)
    : stats_(&stats),
      index_(stats, params.bm25f),
      profiles_(keyword_profiles(stats, params.keywords)),
      bm25f_(index_, params.expansion_terms) {}

PairScore PairScorer::score(DocId a, DocId b) const {
    PairScore s;
    s.keyword = keyword_similarity(profiles_[a], profiles_[b]);
    s.bm25f_forward = bm25f_.normalized(a, b);
    s.bm25f_backward = bm25f_.normalized(b, a);
    s.ensemble_forward = 0.5 * (s.keyword + s.bm25f_forward);
    s.ensemble_backward = 0.5 * (s.keyword + s.bm25f_backward);
    return s;
}

DirectedGraph SimilarityNetwork::graph() const {
    std::vector<WeightedEdge> weighted;
    weighted.reserve(edges.size());
    for (const auto& e : edges) weighted.push_back({e.from, e.to, e.ensemble});
    return DirectedGraph(node_count, std::move(weighted));
}

namespace {

struct ChunkResult {
    std::vector<SimilarityEdge> edges;
    std::size_t compared = 0;
    std::size_t related = 0;
};

void score_range(const Corpus& corpus, const PairScorer& scorer, const NetworkParams& params,
                 DocId first, DocId last, ChunkResult& out) {
    const auto n = static_cast<DocId>(corpus.size());
    for (DocId a = first; a < last; ++a) {
        const auto limit = corpus[a].published + params.window;
        for (DocId b = a + 1; b < n && corpus[b].published <= limit; ++b) {
            ++out.compared;
            const PairScore s = scorer.score(a, b);
            const double symmetric = s.symmetric();
            if (symmetric <= 0.0 || !classify_pair(symmetric, params.threshold)) continue;
            ++out.related;
            // zero-weight halves are dropped; the walk cannot use them
            if (s.ensemble_forward > 0.0) {
                out.edges.push_back({a, b, s.keyword, s.bm25f_forward, s.ensemble_forward, true});
            }
            if (s.ensemble_backward > 0.0) {
                out.edges.push_back({b, a, s.keyword, s.bm25f_backward, s.ensemble_backward, true});
            }
        }
    }
}

}  // namespace

SimilarityNetwork build_network(const Corpus& corpus, const PairScorer& scorer, const NetworkParams& params) {
    SimilarityNetwork network;
    network.node_count = corpus.size();
    const auto n = static_cast<DocId>(corpus.size());
    if (n == 0) return network;

    std::size_t workers = params.workers == 0 ? std::thread::hardware_concurrency() : params.workers;
    workers = std::clamp<std::size_t>(workers, 1, n);
    // More chunks than workers evens out load when publication density varies.
    const std::size_t chunks = workers == 1 ? 1 : std::min<std::size_t>(n, workers * 8);
    std::vector<ChunkResult> results(chunks);
    auto bounds = [&](std::size_t c) { return static_cast<DocId>(c * n / chunks); };

    if (workers == 1) {
        score_range(corpus, scorer, params, 0, n, results[0]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
                    score_range(corpus, scorer, params, bounds(c), bounds(c + 1), results[c]);
                }
            });
        }
    }

    for (auto& r : results) {
        network.pairs_compared += r.compared;
        network.pairs_related += r.related;
        network.edges.insert(network.edges.end(), r.edges.begin(), r.edges.end());
    }
    std::sort(network.edges.begin(), network.edges.end(), [](const SimilarityEdge& x, const SimilarityEdge& y) {
        return x.from != y.from ? x.from < y.from : x.to < y.to;
    });
    return network;
}

void write_edges(std::ostream& out, const SimilarityNetwork& network, const Corpus& corpus) {
    char buf[96];
    for (const auto& e : network.edges) {
        std::snprintf(buf, sizeof buf, "\t%.9f\t%.9f\t%.9f\n", e.keyword, e.bm25f, e.ensemble);
        out << corpus[e.from].id << '\t' << corpus[e.to].id << buf;
    }
}

}  // namespace storychain
