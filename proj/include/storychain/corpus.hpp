#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace storychain {

using Timestamp = std::chrono::sys_seconds;
using DocId = std::uint32_t;
using TermId = std::uint32_t;

struct Article {
    std::string id;
    std::string source;
    std::string title;
    std::string body;
    Timestamp published{};
    std::optional<std::string> url;
};

/// Parses an ISO-8601 timestamp ("2013-04-15", "2013-04-15T14:50:00Z",
/// "2013-04-15 14:50:00.25+01:00", ...) and normalises it to UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp ts);

/// Immutable, time-ordered collection of articles with unique ids.
class Corpus {
  public:
    Corpus() = default;

    /// Sorts by publication time (ties by id). Throws DataError naming the
    /// first duplicated id.
    static Corpus from_articles(std::vector<Article> articles);

    std::size_t size() const { return articles_.size(); }
    bool empty() const { return articles_.empty(); }
    const Article& operator[](DocId doc) const { return articles_[doc]; }
    const std::vector<Article>& articles() const { return articles_; }
    auto begin() const { return articles_.begin(); }
    auto end() const { return articles_.end(); }

    std::optional<DocId> find(std::string_view id) const;

    /// 64-bit FNV-1a digest over every field of every article, in order.
    std::uint64_t content_hash() const;

  private:
    std::vector<Article> articles_;
    std::unordered_map<std::string, DocId> by_id_;
};

enum class CorpusFormat { jsonl, csv };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

struct LoadReport {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    /// One human-readable line per rejected record ("line 7: missing field 'body'").
    std::vector<std::string> reasons;
};

struct LoadResult {
    Corpus corpus;
    LoadReport report;
};

/// Reads a corpus file. Malformed records are skipped and tallied in the
/// report; an unreadable file (IoError) or a duplicated id (DataError) is
/// fatal.
LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format);

/// Writes the corpus as JSON lines in its sorted order, timestamps normalised.
void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. No stopword removal, no stemming.
std::vector<std::string> tokenize(std::string_view text);

enum class Field : std::uint8_t { title = 0, body = 1 };
inline constexpr std::size_t kFieldCount = 2;
inline constexpr std::array<Field, kFieldCount> kFields{Field::title, Field::body};

struct TermCount {
    TermId term;
    std::uint32_t count;

    friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Token statistics for a corpus. Per-document term lists are sorted by
/// term id; term ids are assigned in order of first appearance.
class CorpusStats {
  public:
    std::size_t document_count() const { return doc_terms_.size(); }
    std::size_t vocabulary_size() const { return terms_.size(); }

    std::optional<TermId> find_term(std::string_view term) const;
    const std::string& term_text(TermId term) const { return terms_[term]; }

    std::span<const TermCount> field_terms(DocId doc, Field field) const {
        return field_terms_[index(field)][doc];
    }
    /// Counts pooled over all fields.
    std::span<const TermCount> doc_terms(DocId doc) const { return doc_terms_[doc]; }

    std::uint32_t occurrences(DocId doc, Field field, TermId term) const;
    std::uint32_t occurrences(DocId doc, TermId term) const;

    std::uint64_t field_length(DocId doc, Field field) const {
        return field_lengths_[index(field)][doc];
    }
    std::uint64_t doc_length(DocId doc) const;
    double average_field_length(Field field) const { return average_lengths_[index(field)]; }

    /// f_t: occurrences of the term over the whole corpus, all fields pooled.
    std::uint64_t corpus_frequency(TermId term) const { return corpus_frequency_[term]; }
    std::uint32_t document_frequency(TermId term) const { return document_frequency_[term]; }
    std::uint64_t total_tokens() const { return total_tokens_; }

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;

  private:
    friend CorpusStats build_stats(const Corpus& corpus);
    friend class StatsCacheAccess;

    static constexpr std::size_t index(Field field) { return static_cast<std::size_t>(field); }
    void rebuild_lookup();

    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> term_ids_;
    std::array<std::vector<std::vector<TermCount>>, kFieldCount> field_terms_;
    std::vector<std::vector<TermCount>> doc_terms_;
    std::array<std::vector<std::uint64_t>, kFieldCount> field_lengths_;
    std::array<double, kFieldCount> average_lengths_{};
    std::vector<std::uint64_t> corpus_frequency_;
    std::vector<std::uint32_t> document_frequency_;
    std::uint64_t total_tokens_ = 0;
};

/// Throws std::invalid_argument on an empty corpus.
CorpusStats build_stats(const Corpus& corpus);

/// Binary cache of CorpusStats keyed by the corpus content hash. Returns
/// nullopt when the file is missing, of another format version, or was built
/// from different content.
void save_stats_cache(const CorpusStats& stats, std::uint64_t corpus_hash,
                      const std::filesystem::path& path);
std::optional<CorpusStats> load_stats_cache(const std::filesystem::path& path,
                                            std::uint64_t corpus_hash);

}  // namespace storychain
