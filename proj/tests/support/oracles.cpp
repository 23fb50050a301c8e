#include "oracles.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace storychain::testing {

std::vector<double> dense_visit_rates(const DirectedGraph& graph, double teleport) {
    const auto n = static_cast<Eigen::Index>(graph.node_count());
    // Column-stochastic transition matrix T: p_next = T p.
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        const auto out = graph.out_weight(static_cast<NodeId>(u));
        if (out <= 0.0) {
            t.col(u).setConstant(1.0 / static_cast<double>(n));
            continue;
        }
        t.col(u).setConstant(teleport / static_cast<double>(n));
        for (const auto& e : graph.out_edges(static_cast<NodeId>(u))) t(e.to, u) += (1.0 - teleport) * e.weight / out;
    }
    // (T - I) p = 0 with the last equation replaced by sum(p) = 1.
    Eigen::MatrixXd a = t - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    const Eigen::VectorXd p = a.fullPivLu().solve(rhs);
    return std::vector<double>(p.data(), p.data() + n);
}

namespace {

double entropy_term(double part, double whole) { return part > 0.0 ? -part / whole * std::log2(part / whole) : 0.0; }

}  // namespace

double oracle_codelength(const DirectedGraph& graph, const std::vector<ModuleId>& partition,
                         const std::vector<double>& node, const std::vector<double>& edge) {
    ModuleId modules = 0;
    for (auto m : partition) modules = std::max<ModuleId>(modules, m + 1);
    std::vector<double> enter(modules, 0.0), exit(modules, 0.0);
    std::vector<std::vector<double>> members(modules);
    for (std::size_t u = 0; u < partition.size(); ++u) members[partition[u]].push_back(node[u]);
    const auto edges = graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto a = partition[edges[i].from];
        const auto b = partition[edges[i].to];
        if (a != b) {
            exit[a] += edge[i];
            enter[b] += edge[i];
        }
    }
    double q = 0.0;
    for (auto e : enter) q += e;
    double index = 0.0;
    if (q > 0.0) {
        double h = 0.0;
        for (auto e : enter) h += entropy_term(e, q);
        index = q * h;
    }
    double within = 0.0;
    for (ModuleId m = 0; m < modules; ++m) {
        double total = exit[m];
        for (auto p : members[m]) total += p;
        if (total <= 0.0) continue;
        double h = entropy_term(exit[m], total);
        for (auto p : members[m]) h += entropy_term(p, total);
        within += total * h;
    }
    return index + within;
}

ExhaustiveResult exhaustive_optimum(const DirectedGraph& graph, const VisitRates& rates) {
    ExhaustiveResult result;
    result.best = std::numeric_limits<double>::infinity();
    for_each_set_partition(graph.node_count(), [&](const std::vector<ModuleId>& p) {
        ++result.partitions;
        const double l = oracle_codelength(graph, p, rates.node, rates.edge);
        if (l < result.best) {
            result.best = l;
            result.partition = p;
        }
    });
    return result;
}

namespace {

void both_ways(std::vector<WeightedEdge>& edges, NodeId a, NodeId b, double w) {
    edges.push_back({a, b, w});
    edges.push_back({b, a, w});
}

void clique(std::vector<WeightedEdge>& edges, NodeId first, NodeId size, double w) {
    for (NodeId i = first; i < first + size; ++i) {
        for (NodeId j = i + 1; j < first + size; ++j) both_ways(edges, i, j, w);
    }
}

}  // namespace

std::vector<NamedGraph> small_graph_suite() {
    std::vector<NamedGraph> suite;
    auto add = [&](std::string name, std::size_t n, std::vector<WeightedEdge> edges) {
        suite.push_back({std::move(name), DirectedGraph(n, std::move(edges))});
    };

    for (NodeId a = 2; a <= 4; ++a) {
        for (NodeId b = 2; a + b <= 8; ++b) {
            for (double bridge : {0.05, 0.25, 1.0}) {
                std::vector<WeightedEdge> edges;
                clique(edges, 0, a, 1.0);
                clique(edges, a, b, 1.0);
                both_ways(edges, a - 1, a, bridge);
                add("cliques " + std::to_string(a) + "+" + std::to_string(b) + " bridge " + std::to_string(bridge), a + b,
                    edges);
                edges.pop_back();  // one-way bridge
                add("cliques " + std::to_string(a) + "+" + std::to_string(b) + " one-way " + std::to_string(bridge),
                    a + b, std::move(edges));
            }
        }
    }
    for (NodeId n = 3; n <= 8; ++n) {
        std::vector<WeightedEdge> directed, undirected, uneven;
        for (NodeId i = 0; i < n; ++i) {
            directed.push_back({i, (i + 1) % n, 1.0});
            both_ways(undirected, i, (i + 1) % n, 1.0);
            both_ways(uneven, i, (i + 1) % n, i % 2 == 0 ? 1.0 : 0.1);
        }
        add("directed ring " + std::to_string(n), n, std::move(directed));
        add("ring " + std::to_string(n), n, std::move(undirected));
        add("alternating ring " + std::to_string(n), n, std::move(uneven));

        std::vector<WeightedEdge> star, out_star, in_star;
        for (NodeId i = 1; i < n; ++i) {
            both_ways(star, 0, i, 1.0 + 0.25 * i);
            out_star.push_back({0, i, 1.0});
            in_star.push_back({i, 0, 1.0});
        }
        add("star " + std::to_string(n), n, std::move(star));
        add("out-star " + std::to_string(n), n, std::move(out_star));
        add("in-star " + std::to_string(n), n, std::move(in_star));
    }
    for (NodeId n = 4; n <= 8; ++n) {
        // two rings sharing a weak chord
        std::vector<WeightedEdge> edges;
        const NodeId half = n / 2;
        for (NodeId i = 0; i < half; ++i) both_ways(edges, i, (i + 1) % half, 1.0);
        for (NodeId i = 0; i < n - half; ++i) both_ways(edges, half + i, half + (i + 1) % (n - half), 1.0);
        both_ways(edges, 0, half, 0.1);
        add("ring pair " + std::to_string(n), n, std::move(edges));
    }
    return suite;
}

}  // namespace storychain::testing
