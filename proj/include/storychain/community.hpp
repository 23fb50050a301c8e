#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <span>
#include <vector>

namespace storychain {

using NodeId = std::uint32_t;
using ModuleId = std::uint32_t;

struct WeightedEdge {
    NodeId from;
    NodeId to;
    double weight;

    friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Weighted directed graph in compressed sparse row form. Parallel edges are
/// merged by summing weights; self-loops and non-positive weights are rejected
/// with std::invalid_argument.
class DirectedGraph {
  public:
    DirectedGraph() = default;
    DirectedGraph(std::size_t node_count, std::vector<WeightedEdge> edges);

    std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const { return edges_.size(); }

    /// All edges ordered by (from, to).
    std::span<const WeightedEdge> edges() const { return edges_; }
    std::span<const WeightedEdge> out_edges(NodeId node) const {
        return std::span(edges_).subspan(offsets_[node], offsets_[node + 1] - offsets_[node]);
    }
    double out_weight(NodeId node) const { return out_weight_[node]; }

    /// Subgraph on `nodes` (renumbered in the given order), keeping internal edges.
    DirectedGraph induced(std::span<const NodeId> nodes) const;

  private:
    std::vector<std::size_t> offsets_;
    std::vector<WeightedEdge> edges_;
    std::vector<double> out_weight_;
};

/// Stationary distribution of the teleporting random walk, and the flow on
/// each edge (aligned with DirectedGraph::edges()).
struct VisitRates {
    std::vector<double> node;
    std::vector<double> edge;
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Power iteration: with probability `teleport` (always, from a node without
/// out-edges) the walker jumps to a uniformly random node, otherwise it
/// follows an out-edge chosen proportionally to weight. Runs until the L1
/// change between sweeps drops below 1e-12 or 1000 sweeps have been made.
///
/// Teleportation shapes the visit rates but is not itself encoded: the flow on
/// edge u->v is node[u] * w(u,v) / out_weight(u).
VisitRates visit_rates(const DirectedGraph& graph, double teleport = 0.15);

struct Codelength {
    double index = 0.0;    // q * H(Q): describing movements between modules
    double modules = 0.0;  // sum_i p_i * H(P_i): describing movements within modules
    double total() const { return index + modules; }
};

/// Two-level map equation for a flat partition (module id per node).
/// Module entry flows drive the index codebook; each module codebook covers
/// its exit flow plus the visit rates of its nodes.
Codelength map_equation(const DirectedGraph& graph, std::span<const ModuleId> partition,
                        const VisitRates& rates);

struct PartitionOptions {
    std::uint64_t seed = 42;
    /// Independent optimisation runs; the shortest codelength wins.
    std::size_t trials = 1;
    double min_improvement = 1e-10;
};

struct Partition {
    /// Module ids are 0..module_count-1 in order of each module's first node.
    std::vector<ModuleId> module_of;
    std::size_t module_count = 0;
    double codelength = 0.0;
};

/// Greedy map-equation minimisation: sweeps of single-node moves in seeded
/// random order, aggregation of modules into nodes and repetition on the
/// coarser graph, then fine-tuning of individual nodes against the result,
/// all until no move shortens the code by more than `min_improvement`.
/// Never returns a partition worse than putting everything in one module.
Partition optimize_partition(const DirectedGraph& graph, const VisitRates& rates,
                             const PartitionOptions& options = {});

struct ClusterModule {
    /// Sub-modules; empty when the module's members are listed in `leaves`.
    std::vector<ClusterModule> children;
    /// Nodes directly under this module, ascending.
    std::vector<NodeId> leaves;
    /// Codelength of the walk restricted to this module, sub-structure included.
    double codelength = 0.0;

    std::size_t size() const;
    NodeId min_node() const;
    /// Every node below this module, ascending.
    std::vector<NodeId> members() const;
    std::size_t depth() const;
};

struct ClusterTree {
    /// Top-level modules, by size descending then smallest node.
    std::vector<ClusterModule> modules;
    double codelength = 0.0;

    std::size_t node_count() const;
    /// 1 for a flat partition.
    std::size_t depth() const;
    /// Innermost modules, i.e. those that hold leaves, in depth-first order.
    std::vector<const ClusterModule*> leaf_modules() const;
};

struct HierarchyOptions {
    double teleport = 0.15;
    PartitionOptions partition;
};

/// Partition at the top level, then re-partition each module's induced
/// subgraph under its own re-normalised walk, keeping a split only when it
/// strictly shortens that module's description. Recurses to a fixed point.
ClusterTree hierarchical_cluster(const DirectedGraph& graph, const HierarchyOptions& options = {});

/// One line per node: the colon-separated 1-based path of module indices down
/// to the node's position within its innermost module, a space, then the
/// node's name ("2:1 a_3141"). Lines follow a depth-first walk of the tree.
void write_tree(std::ostream& out, const ClusterTree& tree,
                const std::function<std::string(NodeId)>& name);

/// Inverse of write_tree. Codelengths are not stored in the file and come back
/// as zero. Throws DataError on malformed lines, unknown names, or names that
/// repeat.
ClusterTree read_tree(std::istream& in, const std::function<std::optional<NodeId>(std::string_view)>& lookup);

/// "modules <n>\nleaf_modules <n>\ncodelength <bits>\ndepth <d>\nnodes <n>\n"
void write_tree_summary(std::ostream& out, const ClusterTree& tree);

}  // namespace storychain
