#include "storychain/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "storychain/errors.hpp"

namespace storychain {

namespace {

double parse_double(std::string_view key, std::string_view value) {
    const std::string text(value);
    char* end = nullptr;
    const double parsed = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(parsed)) {
        throw ConfigError("config key '" + std::string(key) + "': '" + text + "' is not a number");
    }
    return parsed;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value) {
    std::uint64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                          "' is not a non-negative integer");
    }
    return parsed;
}

std::optional<double> parse_threshold(std::string_view key, std::string_view value) {
    if (value == "calibrate") return std::nullopt;
    return parse_double(key, value);
}

void check(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

// Shortest text that reads back to the same double.
std::string number(double v) {
    char buf[48];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace

Duration PipelineConfig::window() const {
    return Duration(static_cast<Duration::rep>(std::llround(window_days * 86400.0)));
}

void PipelineConfig::validate() const {
    check(window_days > 0.0, "window_days must be positive");
    check(keywords.top_k >= 1, "keyword_top_k must be at least 1");
    check(keywords.min_score >= 0.0, "keyword_min_score must be non-negative");
    check(bm25f.k1 > 0.0, "k1 must be positive");
    for (const Field f : kFields) {
        const char* name = f == Field::title ? "title" : "body";
        check(bm25f.b_of(f) > 0.0 && bm25f.b_of(f) <= 1.0, std::string("b_") + name + " must lie in (0, 1]");
        check(bm25f.boost_of(f) > 0.0, std::string("boost_") + name + " must be positive");
    }
    check(expansion_terms >= 1, "expansion_terms must be at least 1");
    for (const auto& [name, t] : {std::pair{"threshold_keyword", threshold_keyword},
                                  std::pair{"threshold_bm25f", threshold_bm25f},
                                  std::pair{"threshold_ensemble", threshold_ensemble}}) {
        if (t) check(*t > 0.0 && *t <= 1.0, std::string(name) + " must lie in (0, 1]");
    }
    check(teleport > 0.0 && teleport < 1.0, "teleport must lie in (0, 1)");
    check(trials >= 1, "trials must be at least 1");
    check(followup_min_cluster >= 2, "followup_min_cluster must be at least 2");
    check(histogram_bin_hours >= 1.0, "histogram_bin_hours must be at least 1");
}

void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value) {
    if (key == "corpus") {
        c.corpus = std::string(value);
    } else if (key == "format") {
        const auto format = parse_corpus_format(value);
        if (!format) throw ConfigError("config key 'format': expected jsonl or csv");
        c.format = *format;
    } else if (key == "labels") {
        c.labels = std::string(value);
    } else if (key == "output_dir") {
        c.output_dir = std::string(value);
    } else if (key == "window_days") {
        c.window_days = parse_double(key, value);
    } else if (key == "keyword_top_k") {
        c.keywords.top_k = parse_unsigned(key, value);
    } else if (key == "keyword_min_score") {
        c.keywords.min_score = parse_double(key, value);
    } else if (key == "k1") {
        c.bm25f.k1 = parse_double(key, value);
    } else if (key == "b_title") {
        c.bm25f.b[0] = parse_double(key, value);
    } else if (key == "b_body") {
        c.bm25f.b[1] = parse_double(key, value);
    } else if (key == "boost_title") {
        c.bm25f.boost[0] = parse_double(key, value);
    } else if (key == "boost_body") {
        c.bm25f.boost[1] = parse_double(key, value);
    } else if (key == "expansion_terms") {
        c.expansion_terms = parse_unsigned(key, value);
    } else if (key == "threshold_keyword") {
        c.threshold_keyword = parse_threshold(key, value);
    } else if (key == "threshold_bm25f") {
        c.threshold_bm25f = parse_threshold(key, value);
    } else if (key == "threshold_ensemble" || key == "threshold") {
        c.threshold_ensemble = parse_threshold(key, value);
    } else if (key == "teleport") {
        c.teleport = parse_double(key, value);
    } else if (key == "seed") {
        c.seed = parse_unsigned(key, value);
    } else if (key == "trials") {
        c.trials = parse_unsigned(key, value);
    } else if (key == "workers") {
        c.workers = parse_unsigned(key, value);
    } else if (key == "stats_level") {
        if (value == "top") {
            c.stats_level = ClusterLevel::top;
        } else if (value == "leaf") {
            c.stats_level = ClusterLevel::leaf;
        } else {
            throw ConfigError("config key 'stats_level': expected top or leaf");
        }
    } else if (key == "followup_min_cluster") {
        c.followup_min_cluster = parse_unsigned(key, value);
    } else if (key == "histogram_bin_hours") {
        c.histogram_bin_hours = parse_double(key, value);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void read_config(std::istream& in, PipelineConfig& config) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        apply_setting(config, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    PipelineConfig config;
    read_config(in, config);
    return config;
}

void write_config(std::ostream& out, const PipelineConfig& c) {
    auto threshold = [](const std::optional<double>& t) { return t ? number(*t) : std::string("calibrate"); };
    out << "corpus = " << c.corpus.string() << '\n'
        << "format = " << (c.format == CorpusFormat::jsonl ? "jsonl" : "csv") << '\n'
        << "labels = " << c.labels.string() << '\n'
        << "output_dir = " << c.output_dir.string() << '\n'
        << "window_days = " << number(c.window_days) << '\n'
        << "keyword_top_k = " << c.keywords.top_k << '\n'
        << "keyword_min_score = " << number(c.keywords.min_score) << '\n'
        << "k1 = " << number(c.bm25f.k1) << '\n'
        << "b_title = " << number(c.bm25f.b[0]) << '\n'
        << "b_body = " << number(c.bm25f.b[1]) << '\n'
        << "boost_title = " << number(c.bm25f.boost[0]) << '\n'
        << "boost_body = " << number(c.bm25f.boost[1]) << '\n'
        << "expansion_terms = " << c.expansion_terms << '\n'
        << "threshold_keyword = " << threshold(c.threshold_keyword) << '\n'
        << "threshold_bm25f = " << threshold(c.threshold_bm25f) << '\n'
        << "threshold_ensemble = " << threshold(c.threshold_ensemble) << '\n'
        << "teleport = " << number(c.teleport) << '\n'
        << "seed = " << c.seed << '\n'
        << "trials = " << c.trials << '\n'

        << "workers = " << c.workers << '\n'
        << "stats_level = " << (c.stats_level == ClusterLevel::top ? "top" : "leaf") << '\n'
        << "followup_min_cluster = " << c.followup_min_cluster << '\n'
        << "histogram_bin_hours = " << number(c.histogram_bin_hours) << '\n';
}

}  // namespace storychain
