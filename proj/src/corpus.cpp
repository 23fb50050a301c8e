#include "storychain/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "csv.hpp"
#include "storychain/errors.hpp"

namespace storychain {

namespace {

using json = nlohmann::json;

bool read_int(std::string_view text, std::size_t& pos, std::size_t digits, int& out) {
    if (pos + digits > text.size()) return false;
    int value = 0;
    for (std::size_t i = 0; i < digits; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    pos += digits;
    out = value;
    return true;
}

bool expect(std::string_view text, std::size_t& pos, char c) {
    if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    // field separator so ("ab","c") and ("a","bc") differ
    h ^= 0xffU;
    h *= kFnvPrime;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);

    std::size_t pos = 0;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!read_int(text, pos, 4, y) || !expect(text, pos, '-') || !read_int(text, pos, 2, mo) ||
        !expect(text, pos, '-') || !read_int(text, pos, 2, d)) {
        return std::nullopt;
    }
    const year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!date.ok()) return std::nullopt;

    long offset_seconds = 0;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ') return std::nullopt;
        ++pos;
        if (!read_int(text, pos, 2, h) || !expect(text, pos, ':') || !read_int(text, pos, 2, mi)) {
            return std::nullopt;
        }
        if (expect(text, pos, ':')) {
            if (!read_int(text, pos, 2, s)) return std::nullopt;
            if (expect(text, pos, '.') || expect(text, pos, ',')) {
                const std::size_t start = pos;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
                if (pos == start) return std::nullopt;
            }
        }
        if (h > 23 || mi > 59 || s > 60) return std::nullopt;
        if (pos < text.size()) {
            const char zone = text[pos];
            if (zone == 'Z' || zone == 'z') {
                ++pos;
            } else if (zone == '+' || zone == '-') {
                ++pos;
                int oh = 0, om = 0;
                if (!read_int(text, pos, 2, oh)) return std::nullopt;
                expect(text, pos, ':');
                if (!read_int(text, pos, 2, om)) return std::nullopt;
                if (oh > 23 || om > 59) return std::nullopt;
                offset_seconds = (oh * 3600L + om * 60L) * (zone == '+' ? 1 : -1);
            } else {
                return std::nullopt;
            }
        }
        if (pos != text.size()) return std::nullopt;
    }

    const sys_seconds local = sys_days{date} + hours{h} + minutes{mi} + seconds{s};
    return local - seconds{offset_seconds};
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_point = floor<days>(ts);
    const year_month_day date{day_point};
    const hh_mm_ss time{ts - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<int>(time.hours().count()), static_cast<int>(time.minutes().count()),
                  static_cast<int>(time.seconds().count()));
    return buf;
}

Corpus Corpus::from_articles(std::vector<Article> articles) {
    std::stable_sort(articles.begin(), articles.end(), [](const Article& a, const Article& b) {
        if (a.published != b.published) return a.published < b.published;
        return a.id < b.id;
    });
    Corpus corpus;
    corpus.by_id_.reserve(articles.size());
    for (DocId i = 0; i < articles.size(); ++i) {
        if (!corpus.by_id_.emplace(articles[i].id, i).second) {
            throw DataError("duplicate article id '" + articles[i].id + "'");
        }
    }
    corpus.articles_ = std::move(articles);
    return corpus;
}

std::optional<DocId> Corpus::find(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t Corpus::content_hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& a : articles_) {
        fnv_mix(h, a.id);
        fnv_mix(h, a.source);
        fnv_mix(h, a.title);
        fnv_mix(h, a.body);
        fnv_mix(h, std::to_string(a.published.time_since_epoch().count()));
    }
    return h;
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
    if (name == "jsonl" || name == "json") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv;
    return std::nullopt;
}

namespace {

constexpr std::array<const char*, 5> kRequired{"id", "source", "title", "body", "published"};

struct RawRecord {
    std::map<std::string, std::string, std::less<>> fields;
};

// Validates one record. Returns the rejection reason on failure.
std::optional<std::string> make_article(const RawRecord& raw, Article& out) {
    for (const char* key : kRequired) {
        if (!raw.fields.contains(key)) return std::string("missing field '") + key + "'";
    }
    out.id = raw.fields.find("id")->second;
    if (out.id.empty()) return std::string("empty id");
    out.source = raw.fields.find("source")->second;
    out.title = raw.fields.find("title")->second;
    out.body = raw.fields.find("body")->second;
    const auto& published = raw.fields.find("published")->second;
    const auto ts = parse_timestamp(published);
    if (!ts) return "unparseable timestamp '" + published + "'";
    out.published = *ts;
    if (const auto it = raw.fields.find("url"); it != raw.fields.end() && !it->second.empty()) {
        out.url = it->second;
    }
    return std::nullopt;
}

void reject(LoadReport& report, std::size_t line, const std::string& why) {
    ++report.rejected;
    report.reasons.push_back("line " + std::to_string(line) + ": " + why);
}

void load_jsonl(std::istream& in, std::vector<Article>& out, LoadReport& report) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error&) {
            reject(report, line_no, "malformed JSON");
            continue;
        }
        if (!record.is_object()) {
            reject(report, line_no, "record is not an object");
            continue;
        }
        RawRecord raw;
        std::string bad_key;
        for (const auto& [key, value] : record.items()) {
            if (value.is_string()) {
                raw.fields[key] = value.get<std::string>();
            } else if (value.is_null() && key == "url") {
                continue;
            } else if (std::find(kRequired.begin(), kRequired.end(), key) != kRequired.end() ||
                       key == "url") {
                bad_key = key;
                break;
            }
        }
        if (!bad_key.empty()) {
            reject(report, line_no, "field '" + bad_key + "' is not a string");
            continue;
        }
        Article article;
        if (auto why = make_article(raw, article)) {
            reject(report, line_no, *why);
            continue;
        }
        out.push_back(std::move(article));
    }
}

void load_csv(std::istream& in, std::vector<Article>& out, LoadReport& report) {
    detail::CsvReader reader(in);
    auto header = reader.next();
    if (!header) return;
    for (auto& name : *header) name = detail::trim(name);
    for (const char* key : kRequired) {
        if (std::find(header->begin(), header->end(), key) == header->end()) {
            throw DataError(std::string("CSV header lacks required column '") + key + "'");
        }
    }
    while (auto row = reader.next()) {
        if (row->size() == 1 && row->front().empty()) continue;
        if (reader.unterminated()) {
            reject(report, reader.record_line(), "unterminated quoted field");
            continue;
        }
        if (row->size() != header->size()) {
            reject(report, reader.record_line(),
                   "expected " + std::to_string(header->size()) + " fields, found " +
                       std::to_string(row->size()));
            continue;
        }
        RawRecord raw;
        for (std::size_t i = 0; i < row->size(); ++i) raw.fields[(*header)[i]] = (*row)[i];
        Article article;
        if (auto why = make_article(raw, article)) {
            reject(report, reader.record_line(), *why);
            continue;
        }
        out.push_back(std::move(article));
    }
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file '" + path.string() + "'");

    std::vector<Article> articles;
    LoadResult result;
    if (format == CorpusFormat::jsonl) {
        load_jsonl(in, articles, result.report);
    } else {
        load_csv(in, articles, result.report);
    }
    if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
    result.report.accepted = articles.size();
    result.corpus = Corpus::from_articles(std::move(articles));
    return result;
}

void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (const auto& a : corpus) {
        json record = {{"id", a.id},
                       {"source", a.source},
                       {"title", a.title},
                       {"body", a.body},
                       {"published", format_timestamp(a.published)}};
        if (a.url) record["url"] = *a.url;
        out << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::optional<TermId> CorpusStats::find_term(std::string_view term) const {
    const auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::uint32_t lookup(std::span<const TermCount> terms, TermId term) {
    const auto it = std::lower_bound(terms.begin(), terms.end(), term,
                                     [](const TermCount& tc, TermId t) { return tc.term < t; });
    return (it != terms.end() && it->term == term) ? it->count : 0;
}

std::vector<TermCount> to_sorted_counts(const std::map<TermId, std::uint32_t>& counts) {
    std::vector<TermCount> out;
    out.reserve(counts.size());
    for (const auto& [term, count] : counts) out.push_back({term, count});
    return out;
}

}  // namespace

std::uint32_t CorpusStats::occurrences(DocId doc, Field field, TermId term) const {
    return lookup(field_terms(doc, field), term);
}

std::uint32_t CorpusStats::occurrences(DocId doc, TermId term) const {
    return lookup(doc_terms(doc), term);
}

std::uint64_t CorpusStats::doc_length(DocId doc) const {
    std::uint64_t total = 0;
    for (const auto f : kFields) total += field_length(doc, f);
    return total;
}

void CorpusStats::rebuild_lookup() {
    term_ids_.clear();
    term_ids_.reserve(terms_.size());
    for (TermId t = 0; t < terms_.size(); ++t) term_ids_.emplace(terms_[t], t);
}

CorpusStats build_stats(const Corpus& corpus) {
    if (corpus.empty()) throw std::invalid_argument("cannot build statistics for an empty corpus");

    CorpusStats stats;
    const std::size_t n = corpus.size();
    for (auto& v : stats.field_terms_) v.resize(n);
    for (auto& v : stats.field_lengths_) v.resize(n);
    stats.doc_terms_.resize(n);

    auto intern = [&stats](std::string&& token) {
        const auto [it, inserted] =
            stats.term_ids_.try_emplace(token, static_cast<TermId>(stats.terms_.size()));
        if (inserted) {
            stats.terms_.push_back(std::move(token));
            stats.corpus_frequency_.push_back(0);
            stats.document_frequency_.push_back(0);
        }
        return it->second;
    };

    std::array<double, kFieldCount> length_sums{};
    for (DocId doc = 0; doc < n; ++doc) {
        const Article& article = corpus[doc];
        std::map<TermId, std::uint32_t> pooled;
        for (const Field field : kFields) {
            const auto& text = field == Field::title ? article.title : article.body;
            std::map<TermId, std::uint32_t> counts;
            auto tokens = tokenize(text);
            for (auto& token : tokens) ++counts[intern(std::move(token))];
            const auto fi = static_cast<std::size_t>(field);
            stats.field_lengths_[fi][doc] = tokens.size();
            length_sums[fi] += static_cast<double>(tokens.size());
            for (const auto& [term, count] : counts) pooled[term] += count;
            stats.field_terms_[fi][doc] = to_sorted_counts(counts);
        }
        for (const auto& [term, count] : pooled) {
            stats.corpus_frequency_[term] += count;
            stats.document_frequency_[term] += 1;
            stats.total_tokens_ += count;
        }
        stats.doc_terms_[doc] = to_sorted_counts(pooled);
    }
    for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
        stats.average_lengths_[fi] = length_sums[fi] / static_cast<double>(n);
    }
    return stats;
}

// ---------------------------------------------------------------------------
// stats cache

namespace {

constexpr char kCacheMagic[8] = {'S', 'C', 'S', 'T', 'A', 'T', 'S', '\0'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& value) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

void put_counts(std::ostream& out, const std::vector<TermCount>& counts) {
    put(out, static_cast<std::uint64_t>(counts.size()));
    for (const auto& tc : counts) {
        put(out, tc.term);
        put(out, tc.count);
    }
}

bool get_counts(std::istream& in, std::vector<TermCount>& counts, std::size_t vocab) {
    std::uint64_t size = 0;
    if (!get(in, size) || size > vocab) return false;
    counts.resize(size);
    for (auto& tc : counts) {
        if (!get(in, tc.term) || !get(in, tc.count) || tc.term >= vocab) return false;
    }
    return true;
}

}  // namespace

class StatsCacheAccess {
  public:
    static void save(const CorpusStats& s, std::uint64_t hash, std::ostream& out) {
        out.write(kCacheMagic, sizeof kCacheMagic);
        put(out, kCacheVersion);
        put(out, hash);
        put(out, static_cast<std::uint64_t>(s.terms_.size()));
        for (const auto& t : s.terms_) {
            put(out, static_cast<std::uint32_t>(t.size()));
            out.write(t.data(), static_cast<std::streamsize>(t.size()));
        }
        put(out, static_cast<std::uint64_t>(s.doc_terms_.size()));
        for (std::size_t doc = 0; doc < s.doc_terms_.size(); ++doc) {
            for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
                put(out, s.field_lengths_[fi][doc]);
                put_counts(out, s.field_terms_[fi][doc]);
            }
        }
    }

    static std::optional<CorpusStats> load(std::istream& in, std::uint64_t hash) {
        char magic[sizeof kCacheMagic];
        std::uint32_t version = 0;
        std::uint64_t stored_hash = 0, vocab = 0, docs = 0;
        if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kCacheMagic) ||
            !get(in, version) || version != kCacheVersion || !get(in, stored_hash) ||
            stored_hash != hash || !get(in, vocab)) {
            return std::nullopt;
        }
        CorpusStats s;
        s.terms_.resize(vocab);
        for (auto& t : s.terms_) {
            std::uint32_t len = 0;
            if (!get(in, len) || len > (1U << 20)) return std::nullopt;
            t.resize(len);
            if (!in.read(t.data(), len)) return std::nullopt;
        }
        if (!get(in, docs) || docs == 0) return std::nullopt;
        for (auto& v : s.field_terms_) v.resize(docs);
        for (auto& v : s.field_lengths_) v.resize(docs);
        s.doc_terms_.resize(docs);
        s.corpus_frequency_.assign(vocab, 0);
        s.document_frequency_.assign(vocab, 0);

        std::array<double, kFieldCount> length_sums{};
        for (std::size_t doc = 0; doc < docs; ++doc) {
            std::map<TermId, std::uint32_t> pooled;
            for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
                if (!get(in, s.field_lengths_[fi][doc]) ||
                    !get_counts(in, s.field_terms_[fi][doc], vocab)) {
                    return std::nullopt;
                }
                length_sums[fi] += static_cast<double>(s.field_lengths_[fi][doc]);
                for (const auto& tc : s.field_terms_[fi][doc]) pooled[tc.term] += tc.count;
            }
            for (const auto& [term, count] : pooled) {
                s.corpus_frequency_[term] += count;
                s.document_frequency_[term] += 1;
                s.total_tokens_ += count;
            }
            s.doc_terms_[doc] = to_sorted_counts(pooled);
        }
        for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
            s.average_lengths_[fi] = length_sums[fi] / static_cast<double>(docs);
        }
        s.rebuild_lookup();
        return s;
    }
};

void save_stats_cache(const CorpusStats& stats, std::uint64_t corpus_hash,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    StatsCacheAccess::save(stats, corpus_hash, out);
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

std::optional<CorpusStats> load_stats_cache(const std::filesystem::path& path,
                                            std::uint64_t corpus_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return StatsCacheAccess::load(in, corpus_hash);
}

}  // namespace storychain
