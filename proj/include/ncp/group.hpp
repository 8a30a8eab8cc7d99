#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncp/graph.hpp"

namespace ncp::topo {

/// A protected bidirectional connection. `working` is the node sequence of
/// its primary path (endpoints first/last); it may repeat neither nodes nor
/// links within a group, which validate_group enforces.
struct Connection {
    int id;
    int a, b;
    std::vector<int> working;
};

/// A protection route given as a node sequence. It is a walk: nodes and links
/// may repeat, every consecutive pair must be joined by an edge.
struct Walk {
    std::vector<int> nodes;
};

/// One end node's place in a group: which side it landed on during
/// enumeration and its 1-based index there.
struct Station {
    int node;
    int conn;        // connection id
    bool low_side;   // true: enumerated ascending from the low extreme
    int index;       // S_i or T_j index
};

/// A protection walk, the connections it protects, and the enumeration
/// artifacts the protocol needs: the two ordered end-node sets, partner maps
/// and successor maps along both traversal directions.
class ProtectionGroup {
public:
    /// Runs the traversal enumeration. The walk is re-oriented so the extreme
    /// with the smaller node id leads. Throws TopologyError when an endpoint
    /// is missing from the walk, endpoints repeat across members, or a
    /// connection fails to straddle the two sides.
    static ProtectionGroup build(const Graph& g, Walk walk, std::vector<Connection> members);

    const Walk& walk() const { return walk_; }
    const std::vector<Connection>& members() const { return members_; }
    const Connection& member(int conn_id) const;

    /// Stations in forward (low-extreme to far-extreme) order.
    const std::vector<Station>& stations() const { return stations_; }
    const Station& station_at(int node) const;
    bool has_station(int node) const { return by_node_.count(node) > 0; }

    /// Node ids by index: side_s()[i-1] is the node labeled index i on the
    /// ascending side; side_t()[j-1] likewise on the descending side.
    const std::vector<int>& side_s() const { return side_s_; }
    const std::vector<int>& side_t() const { return side_t_; }

    int partner_of(int node) const;

    /// Successor maps over stations. Forward runs from the low extreme;
    /// reverse is the same station sequence backwards.
    std::optional<int> next_forward(int node) const;
    std::optional<int> prev_forward(int node) const;
    std::optional<int> next_reverse(int node) const { return prev_forward(node); }
    std::optional<int> prev_reverse(int node) const { return next_forward(node); }

    /// Sub-walk node sequence between consecutive stations, forward
    /// orientation: segment(i) joins stations()[i] to stations()[i+1].
    std::vector<int> segment(int i) const;
    int segment_count() const { return static_cast<int>(stations_.size()) - 1; }

private:
    Walk walk_;
    std::vector<Connection> members_;
    std::vector<Station> stations_;
    std::vector<int> station_walk_pos_;  // first-occurrence index into walk_.nodes
    std::map<int, int> by_node_;         // node -> station order index
    std::vector<int> side_s_, side_t_;
    std::map<int, int> partner_;
};

struct Violation {
    enum Kind {
        kWalkGap,              // consecutive walk nodes not adjacent
        kEndpointMissing,      // connection endpoint not on the walk
        kWorkingOverlap,       // two workings of one group share a link
        kWalkWorkingOverlap,   // group walk shares a link with a member working
        kPairedWalksOverlap,   // two walks protecting one connection share a link
        kWorkingBroken,        // working path missing or not a path in the graph
    };
    Kind kind;
    std::string detail;
};

/// Checks one group's internal disjointness rules. Violations are data, not
/// errors; an empty result means the group is sound.
std::vector<Violation> validate_group(const Graph& g, const ProtectionGroup& group);

/// Per-group checks plus the cross-group rule: walks protecting the same
/// connection must be link disjoint.
std::vector<Violation> validate_groups(const Graph& g, std::span<const ProtectionGroup> groups);

std::string to_string(const Violation& v);

}  // namespace ncp::topo
