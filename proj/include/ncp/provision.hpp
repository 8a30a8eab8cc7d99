#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ncp/graph.hpp"
#include "ncp/group.hpp"
#include "ncp/lp.hpp"

namespace ncp::prov {

class ProvisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The joint working/protection ILP. Index layout, for N demands on a graph
/// with V nodes and E edges:
///   p[j][e], q[j][e]      working and protection flow of demand j
///   f[i][e]               protection path slot i (one slot per demand)
///   Zp[j][m], Zq[j][m], Zf[i][m]   node-degree parity integers
///   U[i][j]               slot i protects demand j
/// plus the hypothetical source/sink edge flows fs[i][v], ft[i][v] over the
/// demand end nodes, which anchor each path's extremes. The formula count
/// 3N|V| + 3N|E| + N^2 covers the first seven families; the fs/ft anchors are
/// the modified-graph edges and are tallied separately.
class ProvisionModel {
public:
    lp::Problem lp;
    topo::Graph graph;
    std::vector<topo::Demand> demands;
    std::vector<int> end_nodes;  // distinct demand endpoints, sorted

    // Variable index maps.
    std::vector<std::vector<int>> p, q, f;     // [demand or slot][edge]
    std::vector<std::vector<int>> zp, zq, zf;  // [demand or slot][node slot]
    std::vector<std::vector<int>> u;           // [slot][demand]
    std::vector<std::vector<int>> fs, ft;      // [slot][end-node slot]
    std::vector<int> node_ids;                 // node slot -> node id

    int core_variable_count() const;   // 3N|V| + 3N|E| + N^2
    int anchor_variable_count() const; // the fs/ft family
    std::vector<int> lazy_rows;        // big sharing/linking families
    std::vector<int> branch_priority;
};

ProvisionModel build_model(const topo::Graph& g, std::span<const topo::Demand> demands);

/// Serializes the model in the LP text dialect, byte-stable for equal models.
std::string export_model(const ProvisionModel& model);

struct GroupPlan {
    std::vector<int> walk;        // node sequence
    std::vector<int> demand_ids;  // members
};

enum class Quality { kProvedOptimal, kHeuristic, kBoundGap };

struct ProvisionSolution {
    std::map<int, std::vector<int>> working;  // demand id -> node path
    std::vector<GroupPlan> groups;
    double cost = 0;
    Quality quality = Quality::kHeuristic;
    double bound = 0;            // proved lower bound when quality != heuristic
    std::vector<int> flagged;    // demands left with plain duplication or none
};

/// Branch-and-bound solve of the built model; proved optimal within budget or
/// best found with its bound. Demands whose endpoints are not 2-connected
/// make the model infeasible; that is reported with the offending pair.
ProvisionSolution solve_exact(const ProvisionModel& model, long budget_ms);

/// Greedy group construction: every demand starts as its own disjoint pair,
/// then cost-reducing merges are attempted under seeded restarts. Always
/// constraint-valid, never claimed optimal, and never worse than plain
/// per-demand duplication.
ProvisionSolution solve_heuristic(const topo::Graph& g, std::span<const topo::Demand> demands,
                                  uint64_t seed);

/// Per-demand minimum-cost link-disjoint path pair; no sharing.
ProvisionSolution baseline_one_plus_one(const topo::Graph& g,
                                        std::span<const topo::Demand> demands);

/// Shared backup path protection: per-demand working and backup flows with
/// backup reservations shared where single failures cannot collide. Exact via
/// failure-scenario row generation.
ProvisionSolution baseline_sbpp(const topo::Graph& g, std::span<const topo::Demand> demands,
                                long budget_ms);

/// Rebuilds protection groups from a solution and re-runs every structural
/// check; empty result means the solution is sound.
std::vector<topo::Violation> recheck(const topo::Graph& g, std::span<const topo::Demand> demands,
                                     const ProvisionSolution& sol);

/// Total cost of a solution's paths and walks straight from the graph.
double solution_cost(const topo::Graph& g, const ProvisionSolution& sol);

}  // namespace ncp::prov
