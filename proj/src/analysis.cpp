#include "ncp/analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "ncp/gfmat.hpp"

namespace ncp::analysis {

RecoveryGraph build_recovery_graph(std::span<const topo::ProtectionGroup> groups,
                                   const std::vector<int>& conn_ids,
                                   const coding::CoeffMatrix& coeffs) {
    if (coeffs.a.rows() != static_cast<int>(groups.size()) ||
        coeffs.a.cols() != static_cast<int>(conn_ids.size()))
        throw AnalysisError("coefficient matrix shape does not match groups/connections");
    RecoveryGraph rg{conn_ids, {}, {}, coeffs};
    rg.conn_walks.resize(conn_ids.size());
    for (size_t k = 0; k < groups.size(); ++k) {
        std::vector<int> members;
        for (const topo::Connection& c : groups[k].members()) {
            auto it = std::find(conn_ids.begin(), conn_ids.end(), c.id);
            if (it == conn_ids.end())
                throw AnalysisError("group protects unknown connection id " + std::to_string(c.id));
            int col = static_cast<int>(it - conn_ids.begin());
            if (coeffs.alpha(static_cast<int>(k), col) == 0)
                throw AnalysisError("coefficient missing for protection of connection " +
                                    std::to_string(c.id) + " by walk " + std::to_string(k));
            members.push_back(col);
            rg.conn_walks[col].push_back(static_cast<int>(k));
        }
        std::sort(members.begin(), members.end());
        rg.walk_members.push_back(std::move(members));
    }
    return rg;
}

PatternVerdict check_pattern(const RecoveryGraph& rg, const FailurePattern& f) {
    PatternVerdict out{f, {}, true};
    std::set<int> failed_conns(f.conn_cols.begin(), f.conn_cols.end());
    std::set<int> failed_walks(f.walk_idx.begin(), f.walk_idx.end());
    const gf::Field& fld = rg.coeffs.a.field();

    for (int col : f.conn_cols) {
        ConnVerdict v;
        v.conn_col = col;
        for (int k : rg.conn_walks[col])
            if (!failed_walks.count(k)) v.eq_walks.push_back(k);
        std::set<int> unknowns{col};
        for (int k : v.eq_walks)
            for (int m : rg.walk_members[k])
                if (failed_conns.count(m)) unknowns.insert(m);
        v.unknown_cols.assign(unknowns.begin(), unknowns.end());

        gf::Matrix a(fld, static_cast<int>(v.eq_walks.size()),
                     static_cast<int>(v.unknown_cols.size()));
        for (size_t r = 0; r < v.eq_walks.size(); ++r) {
            int k = v.eq_walks[r];
            for (size_t c = 0; c < v.unknown_cols.size(); ++c) {
                int m = v.unknown_cols[c];
                bool protects = std::binary_search(rg.walk_members[k].begin(),
                                                   rg.walk_members[k].end(), m);
                if (protects) a.at(static_cast<int>(r), static_cast<int>(c)) =
                    rg.coeffs.alpha(k, m);
            }
        }
        int own = static_cast<int>(std::find(v.unknown_cols.begin(), v.unknown_cols.end(), col) -
                                   v.unknown_cols.begin());
        v.recoverable = !v.eq_walks.empty() && gf::coordinate_determined(a, own);
        out.all_recoverable &= v.recoverable;
        out.verdicts.push_back(std::move(v));
    }
    return out;
}

SweepResult sweep(const RecoveryGraph& rg, int max_failures, long budget) {
    if (max_failures < 0) throw AnalysisError("max_failures must be non-negative");
    SweepResult res;
    std::set<coding::RankDemand> demand_set;
    int n = rg.conns(), k = rg.walks();
    int total = n + k;

    // Lexicographic subsets of the combined (connections, walks) index space.
    std::vector<int> pick;
    std::function<bool(int)> rec = [&](int start) -> bool {
        if (!pick.empty()) {
            if (res.patterns_checked >= budget) {
                res.truncated = true;
                return false;
            }
            ++res.patterns_checked;
            FailurePattern f;
            for (int x : pick)
                (x < n ? f.conn_cols : f.walk_idx).push_back(x < n ? x : x - n);
            PatternVerdict pv = check_pattern(rg, f);
            for (const ConnVerdict& v : pv.verdicts) {
                if (v.eq_walks.empty()) continue;
                coding::RankDemand d{v.eq_walks, v.unknown_cols};
                demand_set.insert(std::move(d));
            }
            if (!pv.all_recoverable) res.unrecoverable.push_back(std::move(pv));
        }
        if (static_cast<int>(pick.size()) == max_failures) return true;
        for (int i = start; i < total; ++i) {
            pick.push_back(i);
            bool go_on = rec(i + 1);
            pick.pop_back();
            if (!go_on) return false;
        }
        return true;
    };
    rec(0);
    res.demands.assign(demand_set.begin(), demand_set.end());
    return res;
}

std::vector<ConditionViolation> necessary_conditions(
    const topo::Graph& g, std::span<const topo::ProtectionGroup> groups,
    const std::vector<int>& conn_ids, int max_failures) {
    std::vector<ConditionViolation> out;
    for (size_t col = 0; col < conn_ids.size(); ++col) {
        int id = conn_ids[col];
        std::vector<int> protecting;
        for (size_t k = 0; k < groups.size(); ++k)
            for (const topo::Connection& c : groups[k].members())
                if (c.id == id) protecting.push_back(static_cast<int>(k));
        if (static_cast<int>(protecting.size()) < max_failures) {
            out.push_back({static_cast<int>(col),
                           "connection " + std::to_string(id) + " has only " +
                               std::to_string(protecting.size()) + " protecting walks, needs " +
                               std::to_string(max_failures)});
        }
        // Pairwise link disjointness among this connection's walks.
        for (size_t i = 0; i < protecting.size(); ++i) {
            for (size_t j = i + 1; j < protecting.size(); ++j) {
                std::map<std::pair<int, int>, int> uses;
                auto count = [&](const std::vector<int>& nodes) {
                    for (size_t p = 0; p + 1 < nodes.size(); ++p) {
                        auto key = std::minmax(nodes[p], nodes[p + 1]);
                        ++uses[{key.first, key.second}];
                    }
                };
                count(groups[protecting[i]].walk().nodes);
                std::map<std::pair<int, int>, int> first = uses;
                count(groups[protecting[j]].walk().nodes);
                for (auto& [pr, total] : uses) {
                    auto fit = first.find(pr);
                    int a_uses = fit == first.end() ? 0 : fit->second;
                    if (a_uses > 0 && total > a_uses &&
                        total > g.multiplicity(pr.first, pr.second)) {
                        out.push_back({static_cast<int>(col),
                                       "walks " + std::to_string(protecting[i]) + " and " +
                                           std::to_string(protecting[j]) +
                                           " protecting connection " + std::to_string(id) +
                                           " share link (" + std::to_string(pr.first) + "," +
                                           std::to_string(pr.second) + ")"});
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace ncp::analysis
