#include "storychain/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace storychain {

void Bm25fParams::validate() const {
    if (!(k1 > 0.0)) throw std::invalid_argument("k1 must be positive");
    for (const Field f : kFields) {
        if (!(b_of(f) > 0.0 && b_of(f) <= 1.0)) throw std::invalid_argument("b must lie in (0, 1]");
        if (!(boost_of(f) > 0.0)) throw std::invalid_argument("field boosts must be positive");
    }
}

FieldedIndex::FieldedIndex(const CorpusStats& stats, Bm25fParams params)
    : stats_(&stats), params_(params) {
    params_.validate();
    postings_.resize(stats.vocabulary_size());
    for (DocId doc = 0; doc < stats.document_count(); ++doc) {
        for (const Field field : kFields) {
            const auto fi = static_cast<std::size_t>(field);
            for (const auto& tc : stats.field_terms(doc, field)) {
                auto& list = postings_[tc.term];
                if (list.empty() || list.back().doc != doc) list.push_back({doc, {0, 0}});
                list.back().occurs[fi] = tc.count;
            }
        }
    }

    const auto n = static_cast<double>(stats.document_count());
    idf_.resize(stats.vocabulary_size());
    for (TermId t = 0; t < idf_.size(); ++t) {
        const auto df = static_cast<double>(stats.document_frequency(t));
        idf_[t] = std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
    }
}

std::span<const Posting> FieldedIndex::postings(TermId term) const {
    if (term >= postings_.size()) return {};
    return postings_[term];
}

std::span<const Posting> FieldedIndex::postings(std::string_view term) const {
    const auto id = stats_->find_term(term);
    return id ? postings(*id) : std::span<const Posting>{};
}

double FieldedIndex::term_weight(TermId term, DocId doc) const {
    double weight = 0.0;
    for (const Field field : kFields) {
        const auto occurs = stats_->occurrences(doc, field, term);
        if (occurs == 0) continue;
        const double b = params_.b_of(field);
        const double length_ratio = static_cast<double>(stats_->field_length(doc, field)) /
                                    stats_->average_field_length(field);
        weight += occurs * params_.boost_of(field) / ((1.0 - b) + b * length_ratio);
    }
    return weight;
}

FieldedIndex build_index(const CorpusStats& stats, const Bm25fParams& params) {
    return FieldedIndex(stats, params);
}

double bo1_weight(std::uint64_t tf, std::uint64_t corpus_frequency, std::size_t document_count) {
    const double lambda = static_cast<double>(corpus_frequency) / static_cast<double>(document_count);
    return static_cast<double>(tf) * std::log2((1.0 + lambda) / lambda) + std::log2(1.0 + lambda);
}

ExpandedQuery bo1_expand(DocId doc, const FieldedIndex& index, std::size_t n_terms) {
    const auto& stats = index.stats();
    ExpandedQuery query;
    query.source = doc;
    for (const auto& tc : stats.doc_terms(doc)) {
        query.terms.push_back(
            {tc.term, bo1_weight(tc.count, stats.corpus_frequency(tc.term), stats.document_count())});
    }
    std::sort(query.terms.begin(), query.terms.end(), [&stats](const QueryTerm& a, const QueryTerm& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return stats.term_text(a.term) < stats.term_text(b.term);
    });
    if (query.terms.size() > n_terms) query.terms.resize(n_terms);
    return query;
}

double bm25f_score(const ExpandedQuery& query, DocId doc, const FieldedIndex& index) {
    const double k1 = index.params().k1;
    double score = 0.0;
    for (const auto& qt : query.terms) {
        const double idf = index.idf(qt.term);
        if (idf == 0.0) continue;
        const double w = index.term_weight(qt.term, doc);
        if (w == 0.0) continue;
        score += idf * w / (k1 + w) * qt.weight;
    }
    return score;
}

Bm25fSimilarity::Bm25fSimilarity(const FieldedIndex& index, std::size_t n_terms) : index_(&index) {
    const auto n = index.document_count();
    queries_.reserve(n);
    self_scores_.reserve(n);
    for (DocId doc = 0; doc < n; ++doc) {
        queries_.push_back(bo1_expand(doc, index, n_terms));
        self_scores_.push_back(bm25f_score(queries_.back(), doc, index));
    }
}

double Bm25fSimilarity::normalized(DocId a, DocId b) const {
    if (a == b) return self_scores_[a] > 0.0 ? 1.0 : 0.0;
    const double self = self_scores_[a];
    if (self <= 0.0) return 0.0;
    return std::clamp(bm25f_score(queries_[a], b, *index_) / self, 0.0, 1.0);
}

double normalized_bm25f(DocId a, DocId b, const FieldedIndex& index, std::size_t n_terms) {
    const auto query = bo1_expand(a, index, n_terms);
    const double self = bm25f_score(query, a, index);
    if (self <= 0.0) return 0.0;
    return std::clamp(bm25f_score(query, b, index) / self, 0.0, 1.0);
}

}  // namespace storychain
