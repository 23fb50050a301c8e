#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "storychain/corpus.hpp"

namespace storychain {

/// Free parameters of the fielded scorer. Defaults: k1 = 1.2, full length
/// normalisation in both fields, titles weighted twice as heavily as bodies.
struct Bm25fParams {
    double k1 = 1.2;
    std::array<double, kFieldCount> b{1.0, 1.0};
    std::array<double, kFieldCount> boost{2.0, 1.0};

    double b_of(Field f) const { return b[static_cast<std::size_t>(f)]; }
    double boost_of(Field f) const { return boost[static_cast<std::size_t>(f)]; }

    /// Throws std::invalid_argument unless k1 > 0, b in (0,1] and boosts > 0.
    void validate() const;
};

struct Posting {
    DocId doc;
    std::array<std::uint32_t, kFieldCount> occurs;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Term -> postings, ordered by document. Borrows the statistics it was
/// built from; both must outlive it.
class FieldedIndex {
  public:
    FieldedIndex(const CorpusStats& stats, Bm25fParams params);

    const CorpusStats& stats() const { return *stats_; }
    const Bm25fParams& params() const { return params_; }
    std::size_t document_count() const { return stats_->document_count(); }

    std::span<const Posting> postings(TermId term) const;
    std::span<const Posting> postings(std::string_view term) const;

    /// Natural-log idf floored at zero.
    double idf(TermId term) const { return idf_[term]; }

    /// Length-normalised, boosted term weight accumulated over the fields.
    double term_weight(TermId term, DocId doc) const;

  private:
    const CorpusStats* stats_;
    Bm25fParams params_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<double> idf_;
};

FieldedIndex build_index(const CorpusStats& stats, const Bm25fParams& params = {});

struct QueryTerm {
    TermId term;
    double weight;
};

struct ExpandedQuery {
    DocId source = 0;
    /// Descending by weight, ties by term text.
    std::vector<QueryTerm> terms;

    bool empty() const { return terms.empty(); }
};

/// Bose-Einstein (Bo1) informativeness of a document's terms:
///
///     w(t) = tf * log2((1 + lambda) / lambda) + log2(1 + lambda),  lambda = f_t / N
///
/// keeping the `n_terms` heaviest.
ExpandedQuery bo1_expand(DocId doc, const FieldedIndex& index, std::size_t n_terms = 20);

double bo1_weight(std::uint64_t tf, std::uint64_t corpus_frequency, std::size_t document_count);

/// Sum over query terms of idf * w / (k1 + w) * query weight.
double bm25f_score(const ExpandedQuery& query, DocId doc, const FieldedIndex& index);

/// Caches each article's expanded query and self-score so that pairwise
/// normalised scores cost two sparse lookups per query term.
class Bm25fSimilarity {
  public:
    Bm25fSimilarity(const FieldedIndex& index, std::size_t n_terms = 20);

    const ExpandedQuery& query(DocId doc) const { return queries_[doc]; }
    double self_score(DocId doc) const { return self_scores_[doc]; }

    /// score(query(a), b) / score(query(a), a), clamped to [0, 1].
    double normalized(DocId a, DocId b) const;

  private:
    const FieldedIndex* index_;
    std::vector<ExpandedQuery> queries_;
    std::vector<double> self_scores_;
};

/// One-off form of Bm25fSimilarity::normalized.
double normalized_bm25f(DocId a, DocId b, const FieldedIndex& index, std::size_t n_terms = 20);

}  // namespace storychain
