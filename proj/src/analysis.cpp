#include "storychain/analysis.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "csv.hpp"
#include "storychain/errors.hpp"

namespace storychain {

double Confusion::accuracy() const {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

double Confusion::precision() const {
    return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::recall() const {
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Confusion::f1() const {
    const double p = precision();
    const double r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

void Confusion::add(bool truth, bool predicted) {
    if (truth) {
        ++(predicted ? tp : fn);
    } else {
        ++(predicted ? fp : tn);
    }
}

double round3(double value) { return std::round(value * 1000.0) / 1000.0; }

const char* classifier_name(Classifier c) {
    switch (c) {
        case Classifier::keyword: return "keyword";
        case Classifier::bm25f: return "bm25f";
        case Classifier::ensemble: return "ensemble";
    }
    return "?";
}

double threshold_of(const Thresholds& t, Classifier c) {
    switch (c) {
        case Classifier::keyword: return t.keyword;
        case Classifier::bm25f: return t.bm25f;
        case Classifier::ensemble: return t.ensemble;
    }
    return t.ensemble;
}

namespace {

void set_threshold(Thresholds& t, Classifier c, double value) {
    switch (c) {
        case Classifier::keyword: t.keyword = value; break;
        case Classifier::bm25f: t.bm25f = value; break;
        case Classifier::ensemble: t.ensemble = value; break;
    }
}

}  // namespace

std::vector<LabeledPair> read_labels(std::istream& in, const Corpus& corpus) {
    detail::CsvReader reader(in);
    auto header = reader.next();
    if (!header) throw DataError("labels file is empty");
    for (auto& h : *header) h = detail::trim(h);
    if (*header != std::vector<std::string>{"id_a", "id_b", "related"}) {
        throw DataError("labels line 1: expected header 'id_a,id_b,related'");
    }
    std::vector<LabeledPair> labels;
    while (auto row = reader.next()) {
        if (row->size() == 1 && detail::trim(row->front()).empty()) continue;
        const auto where = "labels line " + std::to_string(reader.record_line()) + ": ";
        if (row->size() != 3) throw DataError(where + "expected 3 fields");
        const auto id_a = detail::trim((*row)[0]);
        const auto id_b = detail::trim((*row)[1]);
        const auto flag = detail::trim((*row)[2]);
        if (flag != "0" && flag != "1") throw DataError(where + "related must be 0 or 1");
        const auto a = corpus.find(id_a);
        if (!a) throw DataError(where + "unknown article id '" + id_a + "'");
        const auto b = corpus.find(id_b);
        if (!b) throw DataError(where + "unknown article id '" + id_b + "'");
        if (*a == *b) throw DataError(where + "pair repeats the same article");
        labels.push_back({*a, *b, flag == "1"});
    }
    return labels;
}

std::vector<LabeledPair> read_labels(const std::filesystem::path& path, const Corpus& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read labels file '" + path.string() + "'");
    return read_labels(in, corpus);
}

ScoredLabels score_labels(const Corpus& corpus, const std::vector<LabeledPair>& labels,
                          const PairScorer& scorer, Duration window) {
    ScoredLabels scored;
    for (const auto& label : labels) {
        const auto gap = corpus[label.a].published - corpus[label.b].published;
        if (std::chrono::abs(gap) > window) {
            ++scored.outside_window;
            continue;
        }
        const PairScore s = scorer.score(label.a, label.b);
        scored.pairs.push_back({label.a, label.b, label.related, {s.keyword, s.bm25f_symmetric(), s.symmetric()}});
    }
    return scored;
}

std::vector<double> threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
    return grid;
}

Calibration calibrate(const std::vector<ScoredPair>& pairs, const std::vector<double>& grid) {
    Calibration calibration;
    for (const double threshold : grid) {
        CalibrationPoint point{threshold, {}};
        for (const auto& p : pairs) {
            for (const auto c : kClassifiers) {
                point.confusion[static_cast<std::size_t>(c)].add(p.related, classify_pair(p.score_of(c), threshold));
            }
        }
        calibration.curve.push_back(point);
    }
    for (const auto c : kClassifiers) {
        double best_f1 = -1.0;
        for (const auto& point : calibration.curve) {
            const double f1 = point.confusion[static_cast<std::size_t>(c)].f1();
            if (f1 > best_f1) {
                best_f1 = f1;
                set_threshold(calibration.best, c, point.threshold);
            }
        }
    }
    return calibration;
}

EvalReport evaluate(const ScoredLabels& scored, const Thresholds& thresholds) {
    EvalReport report;
    report.thresholds = thresholds;
    report.outside_window = scored.outside_window;
    report.pairs = scored.pairs.size();
    std::set<DocId> articles;
    for (const auto& p : scored.pairs) {
        articles.insert(p.a);
        articles.insert(p.b);
        for (const auto c : kClassifiers) {
            report.confusion[static_cast<std::size_t>(c)].add(
                p.related, classify_pair(p.score_of(c), threshold_of(thresholds, c)));
        }
    }
    report.articles = articles.size();
    return report;
}

void write_eval_table(std::ostream& out, const EvalReport& report) {
    char line[160];
    auto row3 = [&](const char* label, auto value) {
        std::snprintf(line, sizeof line, "%-18s %10.3f %10.3f %10.3f\n", label, value(Classifier::keyword),
                      value(Classifier::bm25f), value(Classifier::ensemble));
        out << line;
    };
    auto row_n = [&](const char* label, auto value) {
        std::snprintf(line, sizeof line, "%-18s %10llu %10llu %10llu\n", label,
                      static_cast<unsigned long long>(value(Classifier::keyword)),
                      static_cast<unsigned long long>(value(Classifier::bm25f)),
                      static_cast<unsigned long long>(value(Classifier::ensemble)));
        out << line;
    };
    std::snprintf(line, sizeof line, "%-18s %10s %10s %10s\n", "Classifier:", "Keyword", "BM25F", "Ensemble");
    out << line;
    const std::string rule(51, '-');
    out << rule << '\n';
    row3("Accuracy", [&](Classifier c) { return round3(report.of(c).accuracy()); });
    row3("Precision", [&](Classifier c) { return round3(report.of(c).precision()); });
    row3("Recall", [&](Classifier c) { return round3(report.of(c).recall()); });
    row3("F1", [&](Classifier c) { return round3(report.of(c).f1()); });
    out << rule << '\n';
    row_n("True Positive", [&](Classifier c) { return report.of(c).tp; });
    row_n("True Negative", [&](Classifier c) { return report.of(c).tn; });
    row_n("False Positive", [&](Classifier c) { return report.of(c).fp; });
    row_n("False Negative", [&](Classifier c) { return report.of(c).fn; });
    out << rule << '\n';
    row_n("N articles", [&](Classifier) { return report.articles; });
    row_n("N article pairs", [&](Classifier) { return report.pairs; });
    row3("Threshold", [&](Classifier c) { return threshold_of(report.thresholds, c); });
    if (report.outside_window > 0) {
        out << "(" << report.outside_window << " labelled pairs outside the window were excluded)\n";
    }
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
    out << "classifier,threshold,accuracy,precision,recall,f1,tp,tn,fp,fn,n_articles,n_pairs\n";
    char line[256];
    for (const auto c : kClassifiers) {
        const auto& m = report.of(c);
        std::snprintf(line, sizeof line, "%s,%.2f,%.3f,%.3f,%.3f,%.3f,%llu,%llu,%llu,%llu,%zu,%zu\n",
                      classifier_name(c), threshold_of(report.thresholds, c), round3(m.accuracy()),
                      round3(m.precision()), round3(m.recall()), round3(m.f1()),
                      static_cast<unsigned long long>(m.tp), static_cast<unsigned long long>(m.tn),
                      static_cast<unsigned long long>(m.fp), static_cast<unsigned long long>(m.fn), report.articles,
                      report.pairs);
        out << line;
    }
}

void write_calibration_csv(std::ostream& out, const Calibration& calibration) {
    out << "threshold,keyword_f1,bm25f_f1,ensemble_f1\n";
    char line[128];
    for (const auto& point : calibration.curve) {
        std::snprintf(line, sizeof line, "%.2f,%.6f,%.6f,%.6f\n", point.threshold, point.confusion[0].f1(),
                      point.confusion[1].f1(), point.confusion[2].f1());
        out << line;
    }
    std::snprintf(line, sizeof line, "# best,%.2f,%.2f,%.2f\n", calibration.best.keyword, calibration.best.bm25f,
                  calibration.best.ensemble);
    out << line;
}

void write_predictions(std::ostream& out, const ScoredLabels& scored, const Thresholds& thresholds,
                       const Corpus& corpus) {
    for (const auto& p : scored.pairs) {
        out << corpus[p.a].id << '\t' << corpus[p.b].id;
        for (const auto c : kClassifiers) {
            out << '\t' << (classify_pair(p.score_of(c), threshold_of(thresholds, c)) ? 1 : 0);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Story statistics

std::vector<std::vector<DocId>> clusters_at(const ClusterTree& tree, ClusterLevel level) {
    std::vector<std::vector<DocId>> clusters;
    if (level == ClusterLevel::top) {
        for (const auto& m : tree.modules) clusters.push_back(m.members());
    } else {
        for (const auto* m : tree.leaf_modules()) clusters.push_back(m->members());
    }
    return clusters;
}

double duration_days(const std::vector<DocId>& members, const Corpus& corpus) {
    if (members.empty()) return 0.0;
    auto first = corpus[members.front()].published;
    auto last = first;
    for (const auto d : members) {
        first = std::min(first, corpus[d].published);
        last = std::max(last, corpus[d].published);
    }
    return static_cast<double>((last - first).count()) / 86400.0;
}

SizeTable cluster_size_table(const ClusterTree& tree, const Corpus& corpus, ClusterLevel level) {
    SizeTable table;
    table.corpus_articles = corpus.size();
    table.bins = {{"2-10", 2, 10},
                  {"11-20", 11, 20},
                  {"21-30", 21, 30},
                  {"31-40", 31, 40},
                  {"40+", 41, SIZE_MAX}};
    table.total = {"Total", 2, SIZE_MAX};

    std::vector<double> duration_sums(table.bins.size(), 0.0);
    double total_duration = 0.0;
    for (const auto& members : clusters_at(tree, level)) {
        const auto size = members.size();
        if (size < 2) continue;
        const double days = duration_days(members, corpus);
        for (std::size_t i = 0; i < table.bins.size(); ++i) {
            auto& bin = table.bins[i];
            if (size >= bin.min_size && size <= bin.max_size) {
                ++bin.clusters;
                bin.articles += size;
                duration_sums[i] += days;
            }
        }
        ++table.total.clusters;
        table.total.articles += size;
        total_duration += days;
    }
    const double n = static_cast<double>(corpus.size());
    for (std::size_t i = 0; i < table.bins.size(); ++i) {
        auto& bin = table.bins[i];
        bin.percent = n > 0 ? 100.0 * static_cast<double>(bin.articles) / n : 0.0;
        bin.mean_duration = bin.clusters > 0 ? duration_sums[i] / static_cast<double>(bin.clusters) : 0.0;
    }
    table.total.percent = n > 0 ? 100.0 * static_cast<double>(table.total.articles) / n : 0.0;
    table.total.mean_duration =
        table.total.clusters > 0 ? total_duration / static_cast<double>(table.total.clusters) : 0.0;
    return table;
}

double AssociationStats::same_source_percent() const {
    return articles == 0 ? 0.0 : 100.0 * static_cast<double>(same_source) / static_cast<double>(articles);
}

double AssociationStats::cross_source_percent() const {
    return articles == 0 ? 0.0 : 100.0 * static_cast<double>(cross_source) / static_cast<double>(articles);
}

AssociationStats association_stats(const ClusterTree& tree, const Corpus& corpus, ClusterLevel level) {
    AssociationStats stats;
    stats.articles = corpus.size();
    for (const auto& members : clusters_at(tree, level)) {
        if (members.size() < 2) continue;
        std::map<std::string_view, std::size_t> per_source;
        for (const auto d : members) ++per_source[corpus[d].source];
        for (const auto d : members) {
            const auto own = per_source[corpus[d].source];
            if (own > 1) ++stats.same_source;
            if (own < members.size()) ++stats.cross_source;
        }
    }
    return stats;
}

FollowupHistogram followup_histogram(const ClusterTree& tree, const Corpus& corpus, std::size_t min_cluster,
                                     Duration bin, ClusterLevel level) {
    if (bin.count() <= 0) throw std::invalid_argument("histogram bin width must be positive");
    FollowupHistogram histogram;
    histogram.bin_hours = std::max<std::int64_t>(1, bin.count() / 3600);
    std::map<std::int64_t, std::size_t> counts;
    for (auto members : clusters_at(tree, level)) {
        if (members.size() < std::max<std::size_t>(2, min_cluster)) continue;
        ++histogram.clusters;
        std::sort(members.begin(), members.end(), [&corpus](DocId x, DocId y) {
            return corpus[x].published != corpus[y].published ? corpus[x].published < corpus[y].published : x < y;
        });
        const auto first = corpus[members.front()].published;
        for (std::size_t i = 1; i < members.size(); ++i) {
            const auto delay = corpus[members[i]].published - first;
            ++counts[delay.count() / bin.count()];
            ++histogram.followups;
        }
    }
    if (counts.empty()) return histogram;
    const auto last = counts.rbegin()->first;
    for (std::int64_t b = 0; b <= last; ++b) {
        const auto it = counts.find(b);
        const std::size_t count = it == counts.end() ? 0 : it->second;
        histogram.bins.push_back({b * bin.count() / 3600, count,
                                  100.0 * static_cast<double>(count) / static_cast<double>(histogram.followups)});
    }
    return histogram;
}

void write_size_table(std::ostream& out, const SizeTable& table) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %8s %12s %8s %16s\n", "Cluster size", "N", "Articles", "% total",
                  "Avg duration (d)");
    out << line << std::string(62, '-') << '\n';
    auto row = [&](const SizeBin& bin) {
        std::snprintf(line, sizeof line, "%-14s %8zu %12zu %7.0f%% %16.1f\n", bin.label.c_str(), bin.clusters,
                      bin.articles, bin.percent, bin.mean_duration);
        out << line;
    };
    for (const auto& bin : table.bins) row(bin);
    out << std::string(62, '-') << '\n';
    row(table.total);
}

void write_size_csv(std::ostream& out, const SizeTable& table) {
    out << "cluster_size,n_clusters,articles,percent_of_corpus,mean_duration_days\n";
    char line[160];
    auto row = [&](const SizeBin& bin) {
        std::snprintf(line, sizeof line, "%s,%zu,%zu,%.3f,%.3f\n", bin.label.c_str(), bin.clusters, bin.articles,
                      bin.percent, bin.mean_duration);
        out << line;
    };
    for (const auto& bin : table.bins) row(bin);
    row(table.total);
}

void write_associations(std::ostream& out, const AssociationStats& stats) {
    char line[160];
    std::snprintf(line, sizeof line, "%-56s %8zu\n", "Number of articles", stats.articles);
    out << line;
    std::snprintf(line, sizeof line, "%-56s %8zu %5.0f%%\n", "Articles associated with an article from the same source",
                  stats.same_source, stats.same_source_percent());
    out << line;
    std::snprintf(line, sizeof line, "%-56s %8zu %5.0f%%\n", "Articles associated with an article from another source",
                  stats.cross_source, stats.cross_source_percent());
    out << line;
}

void write_associations_csv(std::ostream& out, const AssociationStats& stats) {
    char line[160];
    out << "measure,count,percent\n";
    std::snprintf(line, sizeof line, "articles,%zu,100.000\n", stats.articles);
    out << line;
    std::snprintf(line, sizeof line, "same_source,%zu,%.3f\n", stats.same_source, stats.same_source_percent());
    out << line;
    std::snprintf(line, sizeof line, "cross_source,%zu,%.3f\n", stats.cross_source, stats.cross_source_percent());
    out << line;
}

void write_histogram_csv(std::ostream& out, const FollowupHistogram& histogram) {
    out << "hours,percent\n";
    char line[64];
    for (const auto& bin : histogram.bins) {
        std::snprintf(line, sizeof line, "%lld,%.6f\n", static_cast<long long>(bin.start_hours), bin.percent);
        out << line;
    }
}

}  // namespace storychain
