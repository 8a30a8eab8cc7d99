#pragma once

#include <span>
#include <string>
#include <vector>

#include "ncp/coeffs.hpp"
#include "ncp/group.hpp"

namespace ncp::analysis {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bipartite connections-versus-walks structure with the scaling coefficient
/// on each protection edge. Columns index conn_ids; rows index walks.
struct RecoveryGraph {
    std::vector<int> conn_ids;
    std::vector<std::vector<int>> walk_members;  // per walk: connection columns
    std::vector<std::vector<int>> conn_walks;    // per column: walk indices
    coding::CoeffMatrix coeffs;

    int conns() const { return static_cast<int>(conn_ids.size()); }
    int walks() const { return static_cast<int>(walk_members.size()); }
};

/// Edge (l, k) exists iff walk k protects connection l; its label is the
/// scaling coefficient. A zero coefficient on an existing protection
/// relation is a construction error.
RecoveryGraph build_recovery_graph(std::span<const topo::ProtectionGroup> groups,
                                   const std::vector<int>& conn_ids,
                                   const coding::CoeffMatrix& coeffs);

/// A set of simultaneous failures: connection columns and walk indices.
struct FailurePattern {
    std::vector<int> conn_cols;
    std::vector<int> walk_idx;

    size_t total() const { return conn_cols.size() + walk_idx.size(); }
};

/// Per failed connection: the equation system its end nodes can assemble
/// (rows = surviving protecting walks, unknowns = failed connections those
/// walks protect) and whether that system pins down its own unknown.
struct ConnVerdict {
    int conn_col;
    bool recoverable;
    std::vector<int> eq_walks;
    std::vector<int> unknown_cols;
};

struct PatternVerdict {
    FailurePattern pattern;
    std::vector<ConnVerdict> verdicts;  // one per failed connection
    bool all_recoverable;
};

/// The pruning-and-solvability procedure for one failure pattern: drop intact
/// connections and failed walks, then test per failed connection whether its
/// coordinate is determined in every solution of its equation system.
PatternVerdict check_pattern(const RecoveryGraph& rg, const FailurePattern& f);

struct SweepResult {
    std::vector<PatternVerdict> unrecoverable;  // patterns with a failing verdict
    std::vector<coding::RankDemand> demands;    // submatrices whose full rank
                                                // would make every verdict pass
    long patterns_checked = 0;
    bool truncated = false;  // pattern budget exhausted: partial result
};

/// Checks every failure pattern with 1..max_failures total failures, in
/// deterministic lexicographic order, up to `budget` patterns.
SweepResult sweep(const RecoveryGraph& rg, int max_failures, long budget = 1000000);

struct ConditionViolation {
    int conn_col;
    std::string detail;
};

/// Theorem-level necessary conditions: every connection needs at least
/// max_failures protecting walks, pairwise link disjoint. Unique-solvability
/// under concrete patterns is sweep's job.
std::vector<ConditionViolation> necessary_conditions(const topo::Graph& g,
                                                     std::span<const topo::ProtectionGroup> groups,
                                                     const std::vector<int>& conn_ids,
                                                     int max_failures);

}  // namespace ncp::analysis
