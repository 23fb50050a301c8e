#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "storychain/corpus.hpp"

namespace storychain {

/// Relative-frequency distinctiveness of a term for a document:
///
///     (count in doc / tokens in doc) / (count in corpus / tokens in corpus)
///
/// Zero when the term does not occur in the document.
double kwscore(TermId term, DocId doc, const CorpusStats& stats);
double kwscore(std::string_view term, DocId doc, const CorpusStats& stats);

struct KeywordParams {
    std::size_t top_k = 100;
    double min_score = 100.0;  // strict: only scores above this are kept
};

struct KeywordEntry {
    TermId term;
    double score;
};

struct KeywordProfile {
    DocId doc = 0;
    /// Descending by score, ties by term text.
    std::vector<KeywordEntry> entries;
    /// The same terms sorted by id, for overlap counting.
    std::vector<TermId> term_set;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

KeywordProfile keyword_profile(DocId doc, const CorpusStats& stats, const KeywordParams& params = {});

std::vector<KeywordProfile> keyword_profiles(const CorpusStats& stats, const KeywordParams& params = {});

/// Shared terms divided by the size of the shorter profile; 0 if either is empty.
double keyword_similarity(const KeywordProfile& a, const KeywordProfile& b);

/// One line per article: id, then tab-separated term:score pairs.
void write_profiles(std::ostream& out, const std::vector<KeywordProfile>& profiles,
                    const Corpus& corpus, const CorpusStats& stats);

}  // namespace storychain
