#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "storychain/analysis.hpp"
#include "storychain/corpus.hpp"
#include "storychain/keywords.hpp"
#include "storychain/retrieval.hpp"

namespace storychain {

/// Every tunable of the pipeline. Thresholds left unset are calibrated on the
/// labels file when one is configured, and fall back to 0.35 otherwise.
struct PipelineConfig {
    std::filesystem::path corpus;
    CorpusFormat format = CorpusFormat::jsonl;
    std::filesystem::path labels;
    std::filesystem::path output_dir = "out";

    double window_days = 3.0;
    KeywordParams keywords;
    Bm25fParams bm25f;
    std::size_t expansion_terms = 20;

    std::optional<double> threshold_keyword;
    std::optional<double> threshold_bm25f;
    std::optional<double> threshold_ensemble;

    double teleport = 0.15;
    std::uint64_t seed = 42;
    std::size_t trials = 1;
    std::size_t workers = 0;

    ClusterLevel stats_level = ClusterLevel::top;
    std::size_t followup_min_cluster = 10;
    double histogram_bin_hours = 1.0;

    Duration window() const;

    /// Throws ConfigError naming the first out-of-range value.
    void validate() const;
};

inline constexpr double kFallbackThreshold = 0.35;

/// Sets one key from its textual value; unknown keys and unparseable values
/// throw ConfigError.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// Flat "key = value" lines; '#' starts a comment.
PipelineConfig load_config(const std::filesystem::path& path);
void read_config(std::istream& in, PipelineConfig& config);

/// The effective configuration in the same key = value format.
void write_config(std::ostream& out, const PipelineConfig& config);

}  // namespace storychain
