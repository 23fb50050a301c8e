#include "storychain/keywords.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace storychain {

double kwscore(TermId term, DocId doc, const CorpusStats& stats) {
    const auto in_doc = stats.occurrences(doc, term);
    const auto in_corpus = stats.corpus_frequency(term);
    const auto doc_tokens = stats.doc_length(doc);
    if (in_doc == 0 || in_corpus == 0 || doc_tokens == 0) return 0.0;
    const double doc_rel = static_cast<double>(in_doc) / static_cast<double>(doc_tokens);
    const double corpus_rel =
        static_cast<double>(in_corpus) / static_cast<double>(stats.total_tokens());
    return doc_rel / corpus_rel;
}

double kwscore(std::string_view term, DocId doc, const CorpusStats& stats) {
    const auto id = stats.find_term(term);
    return id ? kwscore(*id, doc, stats) : 0.0;
}

KeywordProfile keyword_profile(DocId doc, const CorpusStats& stats, const KeywordParams& params) {
    KeywordProfile profile;
    profile.doc = doc;
    for (const auto& tc : stats.doc_terms(doc)) {
        const double score = kwscore(tc.term, doc, stats);
        if (score > params.min_score) profile.entries.push_back({tc.term, score});
    }
    std::sort(profile.entries.begin(), profile.entries.end(),
              [&stats](const KeywordEntry& a, const KeywordEntry& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return stats.term_text(a.term) < stats.term_text(b.term);
              });
    if (profile.entries.size() > params.top_k) profile.entries.resize(params.top_k);

    profile.term_set.reserve(profile.entries.size());
    for (const auto& e : profile.entries) profile.term_set.push_back(e.term);
    std::sort(profile.term_set.begin(), profile.term_set.end());
    return profile;
}

std::vector<KeywordProfile> keyword_profiles(const CorpusStats& stats, const KeywordParams& params) {
    std::vector<KeywordProfile> profiles;
    profiles.reserve(stats.document_count());
    for (DocId doc = 0; doc < stats.document_count(); ++doc) {
        profiles.push_back(keyword_profile(doc, stats, params));
    }
    return profiles;
}

double keyword_similarity(const KeywordProfile& a, const KeywordProfile& b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t shared = 0;
    auto ia = a.term_set.begin();
    auto ib = b.term_set.begin();
    while (ia != a.term_set.end() && ib != b.term_set.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++shared;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(std::min(a.size(), b.size()));
}

void write_profiles(std::ostream& out, const std::vector<KeywordProfile>& profiles,
                    const Corpus& corpus, const CorpusStats& stats) {
    char buf[64];
    for (const auto& profile : profiles) {
        out << corpus[profile.doc].id;
        for (const auto& e : profile.entries) {
            std::snprintf(buf, sizeof buf, "%.6g", e.score);
            out << '\t' << stats.term_text(e.term) << ':' << buf;
        }
        out << '\n';
    }
}

}  // namespace storychain
