#include "storychain/community.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "storychain/errors.hpp"

namespace storychain {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// DirectedGraph

DirectedGraph::DirectedGraph(std::size_t node_count, std::vector<WeightedEdge> edges) {
    for (const auto& e : edges) {
        if (e.from >= node_count || e.to >= node_count) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (e.from == e.to) throw std::invalid_argument("self-loop on node " + std::to_string(e.from));
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            throw std::invalid_argument("edge weights must be positive and finite");
        }
    }
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    for (const auto& e : edges) {
        if (!edges_.empty() && edges_.back().from == e.from && edges_.back().to == e.to) {
            edges_.back().weight += e.weight;
        } else {
            edges_.push_back(e);
        }
    }
    offsets_.assign(node_count + 1, 0);
    out_weight_.assign(node_count, 0.0);
    for (const auto& e : edges_) {
        ++offsets_[e.from + 1];
        out_weight_[e.from] += e.weight;
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

DirectedGraph DirectedGraph::induced(std::span<const NodeId> nodes) const {
    std::vector<NodeId> local(node_count(), static_cast<NodeId>(-1));
    for (NodeId i = 0; i < nodes.size(); ++i) local[nodes[i]] = i;
    std::vector<WeightedEdge> sub;
    for (const NodeId u : nodes) {
        for (const auto& e : out_edges(u)) {
            if (local[e.to] != static_cast<NodeId>(-1)) sub.push_back({local[u], local[e.to], e.weight});
        }
    }
    return DirectedGraph(nodes.size(), std::move(sub));
}

// ---------------------------------------------------------------------------
// Flow

VisitRates visit_rates(const DirectedGraph& graph, double teleport) {
    if (!(teleport > 0.0 && teleport < 1.0)) {
        throw std::invalid_argument("teleport probability must lie in (0, 1)");
    }
    const std::size_t n = graph.node_count();
    VisitRates rates;
    if (n == 0) return rates;

    const double uniform = 1.0 / static_cast<double>(n);
    std::vector<double> p(n, uniform);
    std::vector<double> next(n);
    constexpr std::size_t kMaxIterations = 1000;
    constexpr double kTolerance = 1e-12;

    for (rates.iterations = 0; rates.iterations < kMaxIterations;) {
        double jump = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            jump += graph.out_weight(u) > 0.0 ? teleport * p[u] : p[u];
        }
        std::fill(next.begin(), next.end(), jump * uniform);
        for (NodeId u = 0; u < n; ++u) {
            const double w = graph.out_weight(u);
            if (w <= 0.0) continue;
            const double scale = (1.0 - teleport) * p[u] / w;
            for (const auto& e : graph.out_edges(u)) next[e.to] += scale * e.weight;
        }
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double residual = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            next[u] /= total;
            residual += std::abs(next[u] - p[u]);
        }
        p.swap(next);
        ++rates.iterations;
        rates.residual = residual;
        if (residual < kTolerance) break;
    }

    rates.edge.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) rates.edge.push_back(p[e.from] * e.weight / graph.out_weight(e.from));
    rates.node = std::move(p);
    return rates;
}

Codelength map_equation(const DirectedGraph& graph, std::span<const ModuleId> partition,
                        const VisitRates& rates) {
    const std::size_t n = graph.node_count();
    if (partition.size() != n || rates.node.size() != n || rates.edge.size() != graph.edge_count()) {
        throw std::invalid_argument("partition and rates must cover every node and edge");
    }
    ModuleId modules = 0;
    for (const auto m : partition) modules = std::max<ModuleId>(modules, m + 1);

    std::vector<double> enter(modules, 0.0), exit(modules, 0.0), flow(modules, 0.0);
    for (NodeId u = 0; u < n; ++u) flow[partition[u]] += rates.node[u];
    const auto edges = graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto a = partition[edges[i].from];
        const auto b = partition[edges[i].to];
        if (a == b) continue;
        exit[a] += rates.edge[i];
        enter[b] += rates.edge[i];
    }

    double total_enter = 0.0, enter_log_enter = 0.0, exit_log_exit = 0.0, codebook_log = 0.0;
    for (ModuleId m = 0; m < modules; ++m) {
        total_enter += enter[m];
        enter_log_enter += plogp(enter[m]);
        exit_log_exit += plogp(exit[m]);
        codebook_log += plogp(exit[m] + flow[m]);
    }
    double node_log_node = 0.0;
    for (const double p : rates.node) node_log_node += plogp(p);

    Codelength length;
    length.index = std::max(0.0, plogp(total_enter) - enter_log_enter);
    length.modules = std::max(0.0, codebook_log - exit_log_exit - node_log_node);
    return length;
}

// ---------------------------------------------------------------------------
// Greedy optimisation

namespace {

struct Link {
    NodeId other;
    double flow;
};

// One level of the coarsening hierarchy: nodes are groups of leaf nodes.
struct FlowLevel {
    std::vector<double> flow;
    std::vector<std::vector<Link>> out;
    std::vector<std::vector<Link>> in;
    std::vector<double> out_total;
    std::vector<double> in_total;

    std::size_t size() const { return flow.size(); }
};

FlowLevel leaf_level(const DirectedGraph& graph, const VisitRates& rates) {
    const std::size_t n = graph.node_count();
    FlowLevel level;
    level.flow = rates.node;
    level.out.resize(n);
    level.in.resize(n);
    level.out_total.assign(n, 0.0);
    level.in_total.assign(n, 0.0);
    const auto edges = graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const double f = rates.edge[i];
        if (f <= 0.0) continue;
        level.out[edges[i].from].push_back({edges[i].to, f});
        level.in[edges[i].to].push_back({edges[i].from, f});
        level.out_total[edges[i].from] += f;
        level.in_total[edges[i].to] += f;
    }
    return level;
}

// Coarsens `leaf` by a canonical partition (ids 0..k-1); intra-module flow is dropped.
FlowLevel aggregate(const FlowLevel& leaf, std::span<const ModuleId> part, std::size_t k) {
    FlowLevel level;
    level.flow.assign(k, 0.0);
    level.out.resize(k);
    level.in.resize(k);
    level.out_total.assign(k, 0.0);
    level.in_total.assign(k, 0.0);

    struct Triple {
        ModuleId from, to;
        double flow;
    };
    std::vector<Triple> triples;
    for (NodeId u = 0; u < leaf.size(); ++u) {
        level.flow[part[u]] += leaf.flow[u];
        for (const auto& l : leaf.out[u]) {
            if (part[u] != part[l.other]) triples.push_back({part[u], part[l.other], l.flow});
        }
    }
    std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    for (std::size_t i = 0; i < triples.size();) {
        const auto from = triples[i].from, to = triples[i].to;
        double f = 0.0;
        for (; i < triples.size() && triples[i].from == from && triples[i].to == to; ++i) f += triples[i].flow;
        level.out[from].push_back({to, f});
        level.in[to].push_back({from, f});
        level.out_total[from] += f;
        level.in_total[to] += f;
    }
    return level;
}

std::size_t canonicalize(std::vector<ModuleId>& part) {
    std::vector<ModuleId> remap(part.size(), static_cast<ModuleId>(-1));
    ModuleId next = 0;
    for (auto& m : part) {
        if (remap[m] == static_cast<ModuleId>(-1)) remap[m] = next++;
        m = remap[m];
    }
    return next;
}

void shuffle(std::vector<NodeId>& order, std::mt19937_64& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = rng() % i;
        std::swap(order[i - 1], order[j]);
    }
}

// Single-node moves on one level, with the map-equation terms kept
// incrementally up to date.
class LocalMover {
  public:
    LocalMover(const FlowLevel& level, std::vector<ModuleId> modules, double node_log_node)
        : level_(level), module_of_(std::move(modules)), node_log_node_(node_log_node) {
        const std::size_t n = level.size();
        enter_.assign(n, 0.0);
        exit_.assign(n, 0.0);
        flow_.assign(n, 0.0);
        members_.assign(n, 0);
        out_to_.assign(n, 0.0);
        in_from_.assign(n, 0.0);
        seen_.assign(n, 0);
        for (NodeId u = 0; u < n; ++u) {
            const auto m = module_of_[u];
            flow_[m] += level.flow[u];
            ++members_[m];
            for (const auto& l : level.out[u]) {
                if (module_of_[l.other] != m) {
                    exit_[m] += l.flow;
                    enter_[module_of_[l.other]] += l.flow;
                }
            }
        }
        for (ModuleId m = 0; m < n; ++m) {
            if (members_[m] == 0) {
                empty_.push_back(m);
                continue;
            }
            total_enter_ += enter_[m];
            enter_log_enter_ += plogp(enter_[m]);
            exit_log_exit_ += plogp(exit_[m]);
            codebook_log_ += plogp(exit_[m] + flow_[m]);
        }
        std::reverse(empty_.begin(), empty_.end());
    }

    double codelength() const {
        return plogp(total_enter_) - enter_log_enter_ - exit_log_exit_ - node_log_node_ + codebook_log_;
    }

    const std::vector<ModuleId>& modules() const { return module_of_; }

    // Sweeps until nothing moves; returns the number of moves made.
    std::size_t optimize(std::mt19937_64& rng, double min_improvement) {
        std::vector<NodeId> order(level_.size());
        std::iota(order.begin(), order.end(), NodeId{0});
        std::size_t total_moves = 0;
        constexpr std::size_t kMaxSweeps = 200;
        for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
            shuffle(order, rng);
            std::size_t moves = 0;
            for (const NodeId u : order) {
                if (try_move(u, min_improvement)) ++moves;
            }
            total_moves += moves;
            if (moves == 0) break;
        }
        return total_moves;
    }

  private:
    struct ModuleTerms {
        double enter, exit, flow;
    };

    double delta_for(const ModuleTerms& old_a, const ModuleTerms& new_a, const ModuleTerms& old_b,
                     const ModuleTerms& new_b) const {
        const double total_enter = total_enter_ - old_a.enter - old_b.enter + new_a.enter + new_b.enter;
        double delta = plogp(total_enter) - plogp(total_enter_);
        delta -= plogp(new_a.enter) + plogp(new_b.enter) - plogp(old_a.enter) - plogp(old_b.enter);
        delta -= plogp(new_a.exit) + plogp(new_b.exit) - plogp(old_a.exit) - plogp(old_b.exit);
        delta += plogp(new_a.exit + new_a.flow) + plogp(new_b.exit + new_b.flow) -
                 plogp(old_a.exit + old_a.flow) - plogp(old_b.exit + old_b.flow);
        return delta;
    }

    bool try_move(NodeId u, double min_improvement) {
        const ModuleId current = module_of_[u];
        touched_.clear();
        auto touch = [this](ModuleId m) {
            if (!seen_[m]) {
                seen_[m] = 1;
                touched_.push_back(m);
            }
        };
        touch(current);
        for (const auto& l : level_.out[u]) {
            const auto m = module_of_[l.other];
            touch(m);
            out_to_[m] += l.flow;
        }
        for (const auto& l : level_.in[u]) {
            const auto m = module_of_[l.other];
            touch(m);
            in_from_[m] += l.flow;
        }

        const double node_flow = level_.flow[u];
        const double out_u = level_.out_total[u];
        const double in_u = level_.in_total[u];

        const ModuleTerms old_a{enter_[current], exit_[current], flow_[current]};
        const ModuleTerms new_a{
            std::max(0.0, old_a.enter - in_u + in_from_[current] + out_to_[current]),
            std::max(0.0, old_a.exit - out_u + out_to_[current] + in_from_[current]),
            std::max(0.0, old_a.flow - node_flow)};

        ModuleId best = current;
        double best_delta = -min_improvement;
        ModuleTerms best_terms{};
        auto consider = [&](ModuleId target) {
            const ModuleTerms old_b{enter_[target], exit_[target], flow_[target]};
            const ModuleTerms new_b{
                std::max(0.0, old_b.enter + in_u - in_from_[target] - out_to_[target]),
                std::max(0.0, old_b.exit + out_u - out_to_[target] - in_from_[target]),
                old_b.flow + node_flow};
            const double delta = delta_for(old_a, new_a, old_b, new_b);
            if (delta < best_delta) {
                best_delta = delta;
                best = target;
                best_terms = new_b;
            }
        };
        for (const auto m : touched_) {
            if (m != current) consider(m);
        }
        if (members_[current] > 1 && !empty_.empty()) consider(empty_.back());

        for (const auto m : touched_) {
            seen_[m] = 0;
            out_to_[m] = 0.0;
            in_from_[m] = 0.0;
        }
        if (best == current) return false;

        // apply
        const ModuleTerms old_b{enter_[best], exit_[best], flow_[best]};
        if (members_[best] == 0) empty_.pop_back();
        total_enter_ += new_a.enter + best_terms.enter - old_a.enter - old_b.enter;
        enter_log_enter_ += plogp(new_a.enter) + plogp(best_terms.enter) - plogp(old_a.enter) - plogp(old_b.enter);
        exit_log_exit_ += plogp(new_a.exit) + plogp(best_terms.exit) - plogp(old_a.exit) - plogp(old_b.exit);
        codebook_log_ += plogp(new_a.exit + new_a.flow) + plogp(best_terms.exit + best_terms.flow) -
                         plogp(old_a.exit + old_a.flow) - plogp(old_b.exit + old_b.flow);
        enter_[current] = new_a.enter;
        exit_[current] = new_a.exit;
        flow_[current] = new_a.flow;
        enter_[best] = best_terms.enter;
        exit_[best] = best_terms.exit;
        flow_[best] = best_terms.flow;
        --members_[current];
        ++members_[best];
        if (members_[current] == 0) {
            enter_[current] = exit_[current] = flow_[current] = 0.0;
            empty_.push_back(current);
        }
        module_of_[u] = best;
        return true;
    }

    const FlowLevel& level_;
    std::vector<ModuleId> module_of_;
    double node_log_node_;

    std::vector<double> enter_, exit_, flow_;
    std::vector<std::size_t> members_;
    std::vector<ModuleId> empty_;
    double total_enter_ = 0.0;
    double enter_log_enter_ = 0.0;
    double exit_log_exit_ = 0.0;
    double codebook_log_ = 0.0;

    std::vector<double> out_to_, in_from_;
    std::vector<char> seen_;
    std::vector<ModuleId> touched_;
};

std::vector<ModuleId> single_trial(const FlowLevel& leaf, double node_log_node, std::mt19937_64& rng,
                                   double min_improvement) {
    const std::size_t n = leaf.size();
    std::vector<ModuleId> part(n);
    std::iota(part.begin(), part.end(), ModuleId{0});
    double best = LocalMover(leaf, part, node_log_node).codelength();

    constexpr std::size_t kMaxRounds = 100;
    for (std::size_t round = 0; round < kMaxRounds; ++round) {
        // Leaf moves: from singletons on the first round, fine-tuning afterwards.
        LocalMover fine(leaf, part, node_log_node);
        fine.optimize(rng, min_improvement);
        part = fine.modules();
        std::size_t k = canonicalize(part);
        double length = fine.codelength();

        // Coarse moves: merge whole modules, repeatedly.
        while (k > 1) {
            const FlowLevel coarse = aggregate(leaf, part, k);
            std::vector<ModuleId> identity(k);
            std::iota(identity.begin(), identity.end(), ModuleId{0});
            LocalMover mover(coarse, std::move(identity), node_log_node);
            if (mover.optimize(rng, min_improvement) == 0) break;
            auto merged = mover.modules();
            canonicalize(merged);
            for (auto& m : part) m = merged[m];
            k = canonicalize(part);
            length = mover.codelength();
        }

        if (length < best - min_improvement) {
            best = length;
        } else {
            break;
        }
    }
    canonicalize(part);
    return part;
}

}  // namespace

Partition optimize_partition(const DirectedGraph& graph, const VisitRates& rates,
                             const PartitionOptions& options) {
    const std::size_t n = graph.node_count();
    if (rates.node.size() != n || rates.edge.size() != graph.edge_count()) {
        throw std::invalid_argument("visit rates do not match the graph");
    }
    Partition result;
    if (n == 0) return result;

    const FlowLevel leaf = leaf_level(graph, rates);
    double node_log_node = 0.0;
    for (const double p : rates.node) node_log_node += plogp(p);

    std::mt19937_64 rng(options.seed);
    const std::size_t trials = std::max<std::size_t>(1, options.trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        auto part = single_trial(leaf, node_log_node, rng, options.min_improvement);
        const double length = map_equation(graph, part, rates).total();
        if (trial == 0 || length < result.codelength - options.min_improvement) {
            result.module_of = std::move(part);
            result.codelength = length;
        }
    }

    const std::vector<ModuleId> one_module(n, 0);
    const double one_length = map_equation(graph, one_module, rates).total();
    if (one_length <= result.codelength) {
        result.module_of = one_module;
        result.codelength = one_length;
    }
    result.module_count = canonicalize(result.module_of);
    return result;
}

// ---------------------------------------------------------------------------
// Hierarchy

std::size_t ClusterModule::size() const {
    std::size_t total = leaves.size();
    for (const auto& c : children) total += c.size();
    return total;
}

NodeId ClusterModule::min_node() const {
    NodeId best = static_cast<NodeId>(-1);
    if (!leaves.empty()) best = leaves.front();
    for (const auto& c : children) best = std::min(best, c.min_node());
    return best;
}

std::vector<NodeId> ClusterModule::members() const {
    std::vector<NodeId> out(leaves);
    for (const auto& c : children) {
        const auto sub = c.members();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t ClusterModule::depth() const {
    std::size_t deepest = 0;
    for (const auto& c : children) deepest = std::max(deepest, c.depth());
    return deepest + 1;
}

std::size_t ClusterTree::node_count() const {
    std::size_t total = 0;
    for (const auto& m : modules) total += m.size();
    return total;
}

std::size_t ClusterTree::depth() const {
    std::size_t deepest = 0;
    for (const auto& m : modules) deepest = std::max(deepest, m.depth());
    return deepest;
}

namespace {

void collect_leaf_modules(const ClusterModule& m, std::vector<const ClusterModule*>& out) {
    if (m.children.empty()) {
        out.push_back(&m);
        return;
    }
    for (const auto& c : m.children) collect_leaf_modules(c, out);
}

void sort_modules(std::vector<ClusterModule>& modules) {
    std::sort(modules.begin(), modules.end(), [](const ClusterModule& a, const ClusterModule& b) {
        const auto sa = a.size(), sb = b.size();
        return sa != sb ? sa > sb : a.min_node() < b.min_node();
    });
}

std::vector<std::vector<NodeId>> group(std::span<const NodeId> nodes, const Partition& part) {
    std::vector<std::vector<NodeId>> groups(part.module_count);
    for (std::size_t i = 0; i < nodes.size(); ++i) groups[part.module_of[i]].push_back(nodes[i]);
    return groups;
}

// `nodes` are ids in `root`, ascending.
ClusterModule refine(const DirectedGraph& root, std::vector<NodeId> nodes, const HierarchyOptions& options) {
    ClusterModule module;
    std::sort(nodes.begin(), nodes.end());
    const DirectedGraph sub = root.induced(nodes);
    const VisitRates rates = visit_rates(sub, options.teleport);
    const std::vector<ModuleId> whole(nodes.size(), 0);
    const double whole_length = map_equation(sub, whole, rates).total();
    module.codelength = whole_length;
    // a split needs at least two modules that are not all singletons
    if (nodes.size() < 3 || sub.edge_count() == 0) {
        module.leaves = std::move(nodes);
        return module;
    }

    const Partition part = optimize_partition(sub, rates, options.partition);
    if (part.module_count <= 1 || part.module_count >= nodes.size() ||
        !(part.codelength < whole_length - options.partition.min_improvement)) {
        module.leaves = std::move(nodes);
        return module;
    }
    module.codelength = part.codelength;
    for (auto& members : group(nodes, part)) {
        module.children.push_back(refine(root, std::move(members), options));
    }
    sort_modules(module.children);
    return module;
}

}  // namespace

std::vector<const ClusterModule*> ClusterTree::leaf_modules() const {
    std::vector<const ClusterModule*> out;
    for (const auto& m : modules) collect_leaf_modules(m, out);
    return out;
}

ClusterTree hierarchical_cluster(const DirectedGraph& graph, const HierarchyOptions& options) {
    ClusterTree tree;
    const std::size_t n = graph.node_count();
    if (n == 0) return tree;

    const VisitRates rates = visit_rates(graph, options.teleport);
    const Partition top = optimize_partition(graph, rates, options.partition);
    tree.codelength = top.codelength;

    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    std::vector<ClusterModule> modules;
    for (auto& members : group(all, top)) modules.push_back(refine(graph, std::move(members), options));

    sort_modules(modules);
    tree.modules = std::move(modules);
    return tree;
}

}  // namespace storychain

// ---------------------------------------------------------------------------
// Tree I/O

namespace storychain {

namespace {

void write_module(std::ostream& out, const ClusterModule& module, std::string& path,
                  const std::function<std::string(NodeId)>& name) {
    const std::size_t base = path.size();
    if (module.children.empty()) {
        for (std::size_t i = 0; i < module.leaves.size(); ++i) {
            out << path << ':' << (i + 1) << ' ' << name(module.leaves[i]) << '\n';
        }
        return;
    }
    for (std::size_t i = 0; i < module.children.size(); ++i) {
        path += ':' + std::to_string(i + 1);
        write_module(out, module.children[i], path, name);
        path.resize(base);
    }
}

// Path-keyed builder used while reading a tree back.
struct TreeBuilder {
    std::map<std::size_t, TreeBuilder> children;
    std::vector<std::pair<std::size_t, NodeId>> leaves;

    ClusterModule build() const {
        ClusterModule m;
        for (const auto& [index, child] : children) m.children.push_back(child.build());
        std::vector<std::pair<std::size_t, NodeId>> ordered(leaves);
        std::sort(ordered.begin(), ordered.end());
        for (const auto& leaf : ordered) m.leaves.push_back(leaf.second);
        return m;
    }
};

}  // namespace

void write_tree(std::ostream& out, const ClusterTree& tree, const std::function<std::string(NodeId)>& name) {
    for (std::size_t i = 0; i < tree.modules.size(); ++i) {
        std::string path = std::to_string(i + 1);
        write_module(out, tree.modules[i], path, name);
    }
}

ClusterTree read_tree(std::istream& in, const std::function<std::optional<NodeId>(std::string_view)>& lookup) {
    TreeBuilder root;
    std::set<NodeId> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto where = "tree line " + std::to_string(line_no) + ": ";
        const auto space = line.find(' ');
        if (space == std::string::npos || space == 0 || space + 1 == line.size()) {
            throw DataError(where + "expected '<path> <id>'");
        }
        std::vector<std::size_t> path;
        std::string_view text(line.data(), space);
        while (!text.empty()) {
            const auto colon = text.find(':');
            const auto part = text.substr(0, colon);
            std::size_t value = 0;
            const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
            if (ec != std::errc{} || ptr != part.data() + part.size() || value == 0) {
                throw DataError(where + "malformed module path");
            }
            path.push_back(value);
            text = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
        }
        if (path.size() < 2) throw DataError(where + "path needs a module and a leaf index");
        const std::string_view name(line.data() + space + 1, line.size() - space - 1);
        const auto node = lookup(name);
        if (!node) throw DataError(where + "unknown id '" + std::string(name) + "'");
        if (!seen.insert(*node).second) throw DataError(where + "id '" + std::string(name) + "' repeats");

        TreeBuilder* at = &root;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) at = &at->children[path[i]];
        at->leaves.emplace_back(path.back(), *node);
    }
    ClusterTree tree;
    for (const auto& [index, child] : root.children) {
        if (!child.leaves.empty() && !child.children.empty()) {
            throw DataError("tree module " + std::to_string(index) + " mixes leaves and sub-modules");
        }
        tree.modules.push_back(child.build());
    }
    return tree;
}

void write_tree_summary(std::ostream& out, const ClusterTree& tree) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", tree.codelength);
    out << "modules " << tree.modules.size() << '\n'
        << "leaf_modules " << tree.leaf_modules().size() << '\n'
        << "codelength " << buf << '\n'
        << "depth " << tree.depth() << '\n'
        << "nodes " << tree.node_count() << '\n';
}

}  // namespace storychain
