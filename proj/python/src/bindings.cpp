// Python bindings. Stateful pieces (statistics, scorer) are bundled in
// Collection so their lifetimes follow the corpus.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "storychain/community.hpp"
#include "storychain/config.hpp"
#include "storychain/errors.hpp"
#include "storychain/keywords.hpp"
#include "storychain/pipeline.hpp"

namespace py = pybind11;
using namespace storychain;

namespace {

Timestamp timestamp_of(const std::string& text) {
    const auto ts = parse_timestamp(text);
    if (!ts) throw py::value_error("unparseable timestamp '" + text + "'");
    return *ts;
}

struct Collection {
    Corpus corpus;
    PipelineConfig config;
    std::unique_ptr<CorpusStats> stats;
    std::unique_ptr<PairScorer> scorer;

    Collection(Corpus c, PipelineConfig cfg) : corpus(std::move(c)), config(std::move(cfg)) {
        stats = std::make_unique<CorpusStats>(build_stats(corpus));
        scorer = std::make_unique<PairScorer>(*stats, scoring_params(config));
    }

    DocId doc(const std::string& id) const {
        const auto d = corpus.find(id);
        if (!d) throw py::key_error(id);
        return *d;
    }
};

py::dict module_dict(const ClusterModule& m, const Corpus* corpus) {
    py::dict out;
    py::list children, leaves;
    for (const auto& c : m.children) children.append(module_dict(c, corpus));
    for (const auto n : m.leaves) {
        if (corpus) {
            leaves.append((*corpus)[n].id);
        } else {
            leaves.append(n);
        }
    }
    out["children"] = children;
    out["leaves"] = leaves;
    out["codelength"] = m.codelength;
    return out;
}

py::dict tree_dict(const ClusterTree& tree, const Corpus* corpus) {
    py::list modules;
    for (const auto& m : tree.modules) modules.append(module_dict(m, corpus));
    py::dict out;
    out["modules"] = modules;
    out["codelength"] = tree.codelength;
    out["depth"] = tree.depth();
    return out;
}

DirectedGraph graph_of(std::size_t nodes, const std::vector<std::tuple<NodeId, NodeId, double>>& edges) {
    std::vector<WeightedEdge> out;
    out.reserve(edges.size());
    for (const auto& [u, v, w] : edges) out.push_back({u, v, w});
    return DirectedGraph(nodes, std::move(out));
}

template <typename Fn>
std::string logged(Fn&& fn) {
    std::ostringstream log;
    fn(log);
    return log.str();
}

}  // namespace

PYBIND11_MODULE(_storychain, m) {
    m.doc() = "Story chain detection over timestamped news articles";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("tokenize", [](const std::string& text) { return tokenize(text); });

    py::class_<Article>(m, "Article")
        .def(py::init([](std::string id, std::string title, std::string body, const std::string& published,
                         std::string source) {
                 Article a;
                 a.id = std::move(id);
                 a.title = std::move(title);
                 a.body = std::move(body);
                 a.source = std::move(source);
                 a.published = timestamp_of(published);
                 return a;
             }),
             py::arg("id"), py::arg("title"), py::arg("body"), py::arg("published"), py::arg("source") = "")
        .def_readwrite("id", &Article::id)
        .def_readwrite("source", &Article::source)
        .def_readwrite("title", &Article::title)
        .def_readwrite("body", &Article::body)
        .def_property(
            "published", [](const Article& a) { return format_timestamp(a.published); },
            [](Article& a, const std::string& text) { a.published = timestamp_of(text); })
        .def("__repr__", [](const Article& a) { return "<Article " + a.id + ">"; });

    py::class_<PipelineConfig>(m, "Config")
        .def(py::init([](const py::kwargs& settings) {
            PipelineConfig c;
            for (const auto& [key, value] : settings) {
                apply_setting(c, py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
            }
            c.validate();
            return c;
        }))
        .def_static("load", &load_config, py::arg("path"))
        .def("set", [](PipelineConfig& c, const std::string& key, const py::object& value) {
            apply_setting(c, key, py::str(value).cast<std::string>());
            c.validate();
        })
        .def("__str__", [](const PipelineConfig& c) {
            std::ostringstream out;
            write_config(out, c);
            return out.str();
        });

    py::class_<PairScore>(m, "PairScore")
        .def_readonly("keyword", &PairScore::keyword)
        .def_readonly("bm25f_forward", &PairScore::bm25f_forward)
        .def_readonly("bm25f_backward", &PairScore::bm25f_backward)
        .def_readonly("ensemble_forward", &PairScore::ensemble_forward)
        .def_readonly("ensemble_backward", &PairScore::ensemble_backward)
        .def_property_readonly("ensemble", &PairScore::symmetric);

    py::class_<Collection>(m, "Collection")
        .def(py::init([](const std::vector<Article>& articles, std::optional<PipelineConfig> config) {
                 return std::make_unique<Collection>(Corpus::from_articles(articles), config.value_or(PipelineConfig{}));
             }),
             py::arg("articles"), py::arg("config") = py::none())
        .def_static(
            "load",
            [](const std::filesystem::path& path, const std::string& format, std::optional<PipelineConfig> config) {
                const auto f = parse_corpus_format(format);
                if (!f) throw py::value_error("unknown format '" + format + "'");
                auto loaded = load_corpus(path, *f);
                return std::make_unique<Collection>(std::move(loaded.corpus), config.value_or(PipelineConfig{}));
            },
            py::arg("path"), py::arg("format") = "jsonl", py::arg("config") = py::none())
        .def("__len__", [](const Collection& c) { return c.corpus.size(); })
        .def_property_readonly("ids", [](const Collection& c) {
            std::vector<std::string> ids;
            for (const auto& a : c.corpus) ids.push_back(a.id);
            return ids;
        })
        .def("kwscore", [](const Collection& c, const std::string& term, const std::string& id) {
            return kwscore(term, c.doc(id), *c.stats);
        })
        .def("keywords", [](const Collection& c, const std::string& id) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& e : c.scorer->profiles()[c.doc(id)].entries) out.emplace_back(c.stats->term_text(e.term), e.score);
            return out;
        })
        .def("score", [](const Collection& c, const std::string& a, const std::string& b) {
            return c.scorer->score(c.doc(a), c.doc(b));
        })
        .def("window_pairs", [](const Collection& c) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& [a, b] : window_pairs(c.corpus, c.config.window())) out.emplace_back(c.corpus[a].id, c.corpus[b].id);
            return out;
        })
        .def(
            "cluster",
            [](const Collection& c, std::optional<double> threshold) {
                const double t = threshold.value_or(c.config.threshold_ensemble.value_or(kFallbackThreshold));
                const auto result = cluster_articles(c.corpus, *c.scorer, c.config, t);
                auto out = tree_dict(result.tree, &c.corpus);
                out["edges"] = result.network.edges.size();
                out["pairs_compared"] = result.network.pairs_compared;
                return out;
            },
            py::arg("threshold") = py::none());

    m.def(
        "visit_rates",
        [](std::size_t nodes, const std::vector<std::tuple<NodeId, NodeId, double>>& edges, double teleport) {
            return visit_rates(graph_of(nodes, edges), teleport).node;
        },
        py::arg("nodes"), py::arg("edges"), py::arg("teleport") = 0.15);
    m.def(
        "codelength",
        [](std::size_t nodes, const std::vector<std::tuple<NodeId, NodeId, double>>& edges,
           const std::vector<ModuleId>& partition, double teleport) {
            const auto g = graph_of(nodes, edges);
            if (partition.size() != nodes) throw py::value_error("partition needs one module per node");
            return map_equation(g, partition, visit_rates(g, teleport)).total();
        },
        py::arg("nodes"), py::arg("edges"), py::arg("partition"), py::arg("teleport") = 0.15);
    m.def(
        "hierarchical_cluster",
        [](std::size_t nodes, const std::vector<std::tuple<NodeId, NodeId, double>>& edges, double teleport,
           std::uint64_t seed) {
            HierarchyOptions options;
            options.teleport = teleport;
            options.partition.seed = seed;
            return tree_dict(hierarchical_cluster(graph_of(nodes, edges), options), nullptr);
        },
        py::arg("nodes"), py::arg("edges"), py::arg("teleport") = 0.15, py::arg("seed") = 42);

    m.def("run_ingest", [](const PipelineConfig& c) { return logged([&](std::ostream& log) { run_ingest(c, log); }); });
    m.def("run_eval", [](const PipelineConfig& c) { return logged([&](std::ostream& log) { run_eval(c, log); }); });
    m.def("run_cluster", [](const PipelineConfig& c) { return logged([&](std::ostream& log) { run_cluster(c, log); }); });
    m.def("run_stats", [](const PipelineConfig& c) { return logged([&](std::ostream& log) { run_stats(c, log); }); });
    m.def("run_all", [](const PipelineConfig& c) { return logged([&](std::ostream& log) { run_all(c, log); }); });
}
