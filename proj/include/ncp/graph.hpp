#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncp::topo {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Edge {
    int u, v;
    double cost;
};

/// Undirected multigraph. Nodes are non-negative integer ids declared up
/// front; parallel edges are allowed, self-loops are not.
class Graph {
public:
    void add_node(int id, std::string label = "");
    int add_edge(int u, int v, double cost);

    bool has_node(int id) const { return id >= 0 && id < static_cast<int>(present_.size()) && present_[id]; }
    int node_count() const { return node_count_; }
    int max_node_id() const { return static_cast<int>(present_.size()) - 1; }
    std::vector<int> nodes() const;
    const std::string& label(int id) const;

    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& incident(int id) const;  // edge indices at a node
    /// Number of parallel edges joining u and v.
    int multiplicity(int u, int v) const;
    /// True iff some edge joins u and v.
    bool adjacent(int u, int v) const { return multiplicity(u, v) > 0; }
    double min_edge_cost() const;

    void require_node(int id, const char* what) const;

private:
    int node_count_ = 0;
    std::vector<bool> present_;
    std::vector<std::string> labels_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> incident_;
};

/// Parses the line-oriented topology format:
///   node <id> [label]
///   edge <u> <v> <cost>
/// with '#' comments. Errors carry the offending line number.
Graph load_graph(std::istream& in);
Graph load_graph_file(const std::string& path);

struct Demand {
    int id;
    int s, t;
};

/// Parses the traffic format: one `conn <s> <t>` per line, ids assigned in
/// file order starting at 0.
std::vector<Demand> load_traffic(std::istream& in, const Graph& g);
std::vector<Demand> load_traffic_file(const std::string& path, const Graph& g);

/// Number of pairwise link-disjoint s-t paths (edge connectivity between the
/// pair), via unit-capacity max-flow.
int k_connectivity(const Graph& g, int s, int t);

/// Node sequence of a minimum-cost path, or nullopt if t is unreachable.
/// Edges whose index appears in `banned` are not used.
std::optional<std::vector<int>> shortest_path(const Graph& g, int s, int t,
                                              const std::vector<bool>& banned = {});
double path_cost(const Graph& g, const std::vector<int>& nodes);

/// Minimum-total-cost pair of link-disjoint s-t paths (the 1+1 shape), or
/// nullopt when the pair does not exist.
std::optional<std::pair<std::vector<int>, std::vector<int>>> disjoint_pair(const Graph& g, int s,
                                                                           int t);

}  // namespace ncp::topo
