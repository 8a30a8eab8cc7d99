#include "ncp/provision.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace ncp::prov {

namespace {

uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() { return state = mix(state); }
    uint32_t below(uint32_t n) { return n ? static_cast<uint32_t>(next() % n) : 0; }
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(static_cast<uint32_t>(i))]);
    }
};

}  // namespace

int ProvisionModel::core_variable_count() const {
    int n = static_cast<int>(demands.size());
    int e = static_cast<int>(graph.edges().size());
    int v = static_cast<int>(node_ids.size());
    return 3 * n * e + 3 * n * v + n * n;
}

int ProvisionModel::anchor_variable_count() const {
    return 2 * static_cast<int>(demands.size()) * static_cast<int>(end_nodes.size());
}

ProvisionModel build_model(const topo::Graph& g, std::span<const topo::Demand> demands) {
    if (demands.empty()) throw ProvisionError("no demands to provision");
    ProvisionModel m;
    m.graph = g;
    m.demands.assign(demands.begin(), demands.end());
    for (const topo::Demand& d : demands) {
        g.require_node(d.s, "demand endpoint");
        g.require_node(d.t, "demand endpoint");
    }
    m.node_ids = g.nodes();
    std::map<int, int> node_slot;
    for (size_t i = 0; i < m.node_ids.size(); ++i) node_slot[m.node_ids[i]] = static_cast<int>(i);
    {
        std::set<int> ends;
        for (const topo::Demand& d : demands) {
            ends.insert(d.s);
            ends.insert(d.t);
        }
        m.end_nodes.assign(ends.begin(), ends.end());
    }
    const int n = static_cast<int>(demands.size());
    const int ne = static_cast<int>(g.edges().size());
    const int nv = static_cast<int>(m.node_ids.size());
    const int nc = static_cast<int>(m.end_nodes.size());
    lp::Problem& p = m.lp;

    auto deg_cap = [&](int node) { return static_cast<double>(g.incident(node).size() / 2); };

    m.p.assign(n, std::vector<int>(ne));
    m.q.assign(n, std::vector<int>(ne));
    m.f.assign(n, std::vector<int>(ne));
    m.zp.assign(n, std::vector<int>(nv));
    m.zq.assign(n, std::vector<int>(nv));
    m.zf.assign(n, std::vector<int>(nv));
    m.u.assign(n, std::vector<int>(n));
    m.fs.assign(n, std::vector<int>(nc));
    m.ft.assign(n, std::vector<int>(nc));
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e)
            m.p[j][e] = p.add_var("p" + std::to_string(j) + "_e" + std::to_string(e), 0, 1,
                                  g.edges()[e].cost, true);
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e)
            m.q[j][e] =
                p.add_var("q" + std::to_string(j) + "_e" + std::to_string(e), 0, 1, 0, true);
    for (int i = 0; i < n; ++i)
        for (int e = 0; e < ne; ++e)
            m.f[i][e] = p.add_var("f" + std::to_string(i) + "_e" + std::to_string(e), 0, 1,
                                  g.edges()[e].cost, true);
    for (int j = 0; j < n; ++j)
        for (int v = 0; v < nv; ++v)
            m.zp[j][v] = p.add_var("Zp" + std::to_string(j) + "_n" + std::to_string(m.node_ids[v]),
                                   0, deg_cap(m.node_ids[v]), 0, true);
    for (int j = 0; j < n; ++j)
        for (int v = 0; v < nv; ++v)
            m.zq[j][v] = p.add_var("Zq" + std::to_string(j) + "_n" + std::to_string(m.node_ids[v]),
                                   0, deg_cap(m.node_ids[v]), 0, true);
    for (int i = 0; i < n; ++i)
        for (int v = 0; v < nv; ++v)
            m.zf[i][v] = p.add_var("Zf" + std::to_string(i) + "_n" + std::to_string(m.node_ids[v]),
                                   0, deg_cap(m.node_ids[v]), 0, true);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m.u[i][j] =
                p.add_var("U" + std::to_string(i) + "_" + std::to_string(j), 0, 1, 0, true);
    for (int i = 0; i < n; ++i)
        for (int v = 0; v < nc; ++v) {
            m.fs[i][v] = p.add_var(
                "fs" + std::to_string(i) + "_n" + std::to_string(m.end_nodes[v]), 0, 1, 0, true);
            m.ft[i][v] = p.add_var(
                "ft" + std::to_string(i) + "_n" + std::to_string(m.end_nodes[v]), 0, 1, 0, true);
        }

    m.branch_priority.assign(p.num_vars(), 5);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m.branch_priority[m.u[i][j]] = 0;
        for (int v = 0; v < nc; ++v)
            m.branch_priority[m.fs[i][v]] = m.branch_priority[m.ft[i][v]] = 1;
        for (int e = 0; e < ne; ++e) {
            m.branch_priority[m.f[i][e]] = 2;
            m.branch_priority[m.p[i][e]] = 3;
            m.branch_priority[m.q[i][e]] = 4;
        }
    }

    auto incident_terms = [&](const std::vector<int>& vars, int node) {
        std::vector<lp::Term> terms;
        for (int e : g.incident(node)) terms.push_back({vars[e], 1.0});
        return terms;
    };

    // Working flow conservation: unit flow out of the source, even degree at
    // transit nodes.
    for (int j = 0; j < n; ++j) {
        p.add_row({incident_terms(m.p[j], demands[j].s), lp::Rel::kEq, 1,
                   "w_src_" + std::to_string(j)});
        for (int v = 0; v < nv; ++v) {
            int node = m.node_ids[v];
            if (node == demands[j].s || node == demands[j].t) continue;
            auto terms = incident_terms(m.p[j], node);
            terms.push_back({m.zp[j][v], -2.0});
            p.add_row({std::move(terms), lp::Rel::kEq, 0,
                       "w_deg_" + std::to_string(j) + "_" + std::to_string(node)});
        }
    }
    // Protection flow conservation per demand.
    for (int j = 0; j < n; ++j) {
        p.add_row({incident_terms(m.q[j], demands[j].s), lp::Rel::kEq, 1,
                   "q_src_" + std::to_string(j)});
        for (int v = 0; v < nv; ++v) {
            int node = m.node_ids[v];
            if (node == demands[j].s || node == demands[j].t) continue;
            auto terms = incident_terms(m.q[j], node);
            terms.push_back({m.zq[j][v], -2.0});
            p.add_row({std::move(terms), lp::Rel::kEq, 0,
                       "q_deg_" + std::to_string(j) + "_" + std::to_string(node)});
        }
    }
    // Protection path conservation: at most one unit leaves the hypothetical
    // source; it must also arrive; degree parity everywhere with the anchor
    // edges patching the two extremes.
    std::map<int, int> end_slot;
    for (int v = 0; v < nc; ++v) end_slot[m.end_nodes[v]] = v;
    for (int i = 0; i < n; ++i) {
        std::vector<lp::Term> starts, ends;
        for (int v = 0; v < nc; ++v) {
            starts.push_back({m.fs[i][v], 1.0});
            ends.push_back({m.ft[i][v], 1.0});
        }
        p.add_row({starts, lp::Rel::kLe, 1, "f_start_" + std::to_string(i)});
        auto balance = ends;
        for (int v = 0; v < nc; ++v) balance.push_back({m.fs[i][v], -1.0});
        p.add_row({std::move(balance), lp::Rel::kEq, 0, "f_end_" + std::to_string(i)});
        for (int v = 0; v < nv; ++v) {
            int node = m.node_ids[v];
            auto terms = incident_terms(m.f[i], node);
            auto es = end_slot.find(node);
            if (es != end_slot.end()) {
                terms.push_back({m.fs[i][es->second], 1.0});
                terms.push_back({m.ft[i][es->second], 1.0});
            }
            terms.push_back({m.zf[i][v], -2.0});
            p.add_row({std::move(terms), lp::Rel::kEq, 0,
                       "f_deg_" + std::to_string(i) + "_" + std::to_string(node)});
        }
    }
    // Assignment and activation.
    for (int j = 0; j < n; ++j) {
        std::vector<lp::Term> terms;
        for (int i = 0; i < n; ++i) terms.push_back({m.u[i][j], 1.0});
        p.add_row({std::move(terms), lp::Rel::kEq, 1, "assign_" + std::to_string(j)});
    }
    for (int i = 0; i < n; ++i) {
        std::vector<lp::Term> terms;
        for (int j = 0; j < n; ++j) terms.push_back({m.u[i][j], 1.0});
        for (int v = 0; v < nc; ++v) terms.push_back({m.fs[i][v], -static_cast<double>(n)});
        p.add_row({std::move(terms), lp::Rel::kLe, 0, "activate_" + std::to_string(i)});
    }
    // The heavy pairwise families are enforced lazily by the solver.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int e = 0; e < ne; ++e) {
                m.lazy_rows.push_back(static_cast<int>(p.rows.size()));
                p.add_row({{{m.q[j][e], 1.0}, {m.u[i][j], 1.0}, {m.f[i][e], -1.0}},
                           lp::Rel::kLe,
                           1,
                           "link_" + std::to_string(i) + "_" + std::to_string(j) + "_e" +
                               std::to_string(e)});
            }
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e) {
            m.lazy_rows.push_back(static_cast<int>(p.rows.size()));
            p.add_row({{{m.p[j][e], 1.0}, {m.q[j][e], 1.0}},
                       lp::Rel::kLe,
                       1,
                       "wp_disj_" + std::to_string(j) + "_e" + std::to_string(e)});
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int e = 0; e < ne; ++e) {
                m.lazy_rows.push_back(static_cast<int>(p.rows.size()));
                p.add_row({{{m.p[j][e], 1.0}, {m.f[i][e], 1.0}, {m.u[i][j], 1.0}},
                           lp::Rel::kLe,
                           2,
                           "wf_disj_" + std::to_string(i) + "_" + std::to_string(j) + "_e" +
                               std::to_string(e)});
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int e = 0; e < ne; ++e) {
                    m.lazy_rows.push_back(static_cast<int>(p.rows.size()));
                    p.add_row({{{m.p[j][e], 1.0},
                                {m.p[k][e], 1.0},
                                {m.u[i][j], 1.0},
                                {m.u[i][k], 1.0}},
                               lp::Rel::kLe,
                               3,
                               "ww_disj_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                                   std::to_string(k) + "_e" + std::to_string(e)});
                }
    return m;
}

std::string export_model(const ProvisionModel& model) {
    const lp::Problem& p = model.lp;
    std::ostringstream out;
    out << "\\ joint working/protection provisioning model\n";
    out << "Minimize\n obj:";
    bool first = true;
    for (int j = 0; j < p.num_vars(); ++j) {
        if (p.objective[j] == 0) continue;
        out << (first ? " " : " + ") << p.objective[j] << " " << p.var_names[j];
        first = false;
    }
    if (first) out << " 0 " << p.var_names[0];
    out << "\nSubject To\n";
    for (const lp::Row& r : p.rows) {
        out << " " << r.name << ":";
        for (size_t t = 0; t < r.terms.size(); ++t) {
            double c = r.terms[t].coeff;
            if (t == 0)
                out << " " << c;
            else
                out << (c < 0 ? " - " : " + ") << std::abs(c);
            out << " " << p.var_names[r.terms[t].var];
        }
        out << (r.rel == lp::Rel::kLe ? " <= " : r.rel == lp::Rel::kGe ? " >= " : " = ");
        out << r.rhs << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < p.num_vars(); ++j)
        if (!(p.lower[j] == 0 && p.upper[j] == 1))
            out << " " << p.lower[j] << " <= " << p.var_names[j] << " <= " << p.upper[j] << "\n";
    out << "Binaries\n";
    for (int j = 0; j < p.num_vars(); ++j)
        if (p.integral[j] && p.lower[j] == 0 && p.upper[j] == 1) out << " " << p.var_names[j] << "\n";
    out << "Generals\n";
    for (int j = 0; j < p.num_vars(); ++j)
        if (p.integral[j] && !(p.lower[j] == 0 && p.upper[j] == 1))
            out << " " << p.var_names[j] << "\n";
    out << "End\n";
    return out.str();
}

namespace {

// Follows the selected edge set from `from`, consuming edges, and returns the
// node trail. With source degree 1 and even transit parity this reproduces
// the flow's path; leftover cycle edges stay unused.
std::optional<std::vector<int>> trail_from(const topo::Graph& g, std::vector<char>& chosen,
                                           int from, int to) {
    std::vector<int> path{from};
    int cur = from;
    while (cur != to) {
        int next_edge = -1;
        for (int e : g.incident(cur))
            if (chosen[e]) {
                next_edge = e;
                break;
            }
        if (next_edge < 0) return std::nullopt;
        chosen[next_edge] = 0;
        const topo::Edge& ed = g.edges()[next_edge];
        cur = (ed.u == cur) ? ed.v : ed.u;
        path.push_back(cur);
    }
    return path;
}

// Hierholzer trail over exactly the chosen edges, from v0; succeeds iff all
// edges are consumed in one open trail ending at v1.
std::optional<std::vector<int>> euler_trail(const topo::Graph& g, std::vector<char> chosen,
                                            int v0, int v1, int edge_count) {
    std::vector<int> stack{v0};
    std::vector<int> out;
    int used = 0;
    while (!stack.empty()) {
        int v = stack.back();
        int e_pick = -1;
        for (int e : g.incident(v))
            if (chosen[e]) {
                e_pick = e;
                break;
            }
        if (e_pick < 0) {
            out.push_back(v);
            stack.pop_back();
        } else {
            chosen[e_pick] = 0;
            ++used;
            const topo::Edge& ed = g.edges()[e_pick];
            stack.push_back(ed.u == v ? ed.v : ed.u);
        }
    }
    std::reverse(out.begin(), out.end());
    if (used != edge_count) return std::nullopt;
    if (out.front() != v0 || out.back() != v1) return std::nullopt;
    return out;
}

struct DecodeFailure {
    int slot;
    std::vector<int> f_edges;
};

std::optional<ProvisionSolution> decode_solution(const ProvisionModel& m,
                                                 const std::vector<double>& x,
                                                 DecodeFailure* fail) {
    const topo::Graph& g = m.graph;
    int n = static_cast<int>(m.demands.size());
    int ne = static_cast<int>(g.edges().size());
    ProvisionSolution sol;
    for (int j = 0; j < n; ++j) {
        std::vector<char> chosen(ne, 0);
        for (int e = 0; e < ne; ++e) chosen[e] = x[m.p[j][e]] > 0.5;
        auto path = trail_from(g, chosen, m.demands[j].s, m.demands[j].t);
        if (!path)
            throw ProvisionError("working-flow decode failed: conservation rows violated");
        sol.working[m.demands[j].id] = *path;
    }
    for (int i = 0; i < n; ++i) {
        bool used = false;
        for (int j = 0; j < n; ++j) used |= x[m.u[i][j]] > 0.5;
        if (!used) continue;
        int v0 = -1, v1 = -1;
        for (size_t v = 0; v < m.end_nodes.size(); ++v) {
            if (x[m.fs[i][v]] > 0.5) v0 = m.end_nodes[v];
            if (x[m.ft[i][v]] > 0.5) v1 = m.end_nodes[v];
        }
        std::vector<char> chosen(ne, 0);
        std::vector<int> f_edges;
        int count = 0;
        for (int e = 0; e < ne; ++e)
            if (x[m.f[i][e]] > 0.5) {
                chosen[e] = 1;
                f_edges.push_back(e);
                ++count;
            }
        auto bad = [&]() {
            if (fail) *fail = {i, f_edges};
            return std::nullopt;
        };
        if (v0 < 0 || v1 < 0 || v0 == v1) return bad();
        auto walk = euler_trail(g, chosen, v0, v1, count);
        if (!walk) return bad();
        GroupPlan gp;
        gp.walk = *walk;
        for (int j = 0; j < n; ++j)
            if (x[m.u[i][j]] > 0.5) gp.demand_ids.push_back(m.demands[j].id);
        sol.groups.push_back(std::move(gp));
    }
    sol.cost = solution_cost(g, sol);
    return sol;
}

// Maps a structured solution back onto the model's variable space; nullopt
// when the structure cannot be expressed (a walk reusing an edge, say).
std::optional<std::vector<double>> encode_solution(const ProvisionModel& m,
                                                   const ProvisionSolution& sol) {
    const topo::Graph& g = m.graph;
    int ne = static_cast<int>(g.edges().size());
    std::vector<double> x(m.lp.num_vars(), 0.0);
    std::map<int, int> demand_slot;
    for (size_t j = 0; j < m.demands.size(); ++j) demand_slot[m.demands[j].id] = static_cast<int>(j);
    std::map<int, int> node_slot;
    for (size_t v = 0; v < m.node_ids.size(); ++v) node_slot[m.node_ids[v]] = static_cast<int>(v);
    std::map<int, int> end_slot;
    for (size_t v = 0; v < m.end_nodes.size(); ++v) end_slot[m.end_nodes[v]] = static_cast<int>(v);

    auto pick_edges = [&](const std::vector<int>& nodes) -> std::optional<std::vector<int>> {
        std::vector<char> used(ne, 0);
        std::vector<int> picked;
        for (size_t i = 0; i + 1 < nodes.size(); ++i) {
            int best = -1;
            for (int e : g.incident(nodes[i])) {
                const topo::Edge& ed = g.edges()[e];
                int w = (ed.u == nodes[i]) ? ed.v : ed.u;
                if (w == nodes[i + 1] && !used[e] &&
                    (best < 0 || ed.cost < g.edges()[best].cost))
                    best = e;
            }
            if (best < 0) return std::nullopt;  // edge reuse: not expressible
            used[best] = 1;
            picked.push_back(best);
        }
        return picked;
    };
    auto apply_parity = [&](const std::vector<int>& zvars, const std::vector<int>& edges,
                            std::set<int> skip) {
        std::map<int, int> touch;
        for (int e : edges) {
            ++touch[g.edges()[e].u];
            ++touch[g.edges()[e].v];
        }
        for (auto [node, cnt] : touch) {
            if (skip.count(node)) continue;
            x[zvars[node_slot[node]]] = cnt / 2;
        }
    };

    for (const auto& [id, path] : sol.working) {
        if (!demand_slot.count(id)) return std::nullopt;
        int j = demand_slot[id];
        auto edges = pick_edges(path);
        if (!edges) return std::nullopt;
        for (int e : *edges) x[m.p[j][e]] = 1;
        apply_parity(m.zp[j], *edges, {m.demands[j].s, m.demands[j].t});
    }
    for (const GroupPlan& gp : sol.groups) {
        // Slot = smallest member index: the canonical labeling, and a free
        // choice in the unrestricted model.
        int slot = static_cast<int>(m.demands.size());
        for (int id : gp.demand_ids)
            if (demand_slot.count(id)) slot = std::min(slot, demand_slot[id]);
        if (slot >= static_cast<int>(m.demands.size())) return std::nullopt;
        auto wedges = pick_edges(gp.walk);
        if (!wedges) return std::nullopt;
        for (int e : *wedges) x[m.f[slot][e]] = 1;
        if (!end_slot.count(gp.walk.front()) || !end_slot.count(gp.walk.back()) ||
            gp.walk.front() == gp.walk.back())
            return std::nullopt;
        x[m.fs[slot][end_slot[gp.walk.front()]]] = 1;
        x[m.ft[slot][end_slot[gp.walk.back()]]] = 1;
        apply_parity(m.zf[slot], *wedges, {});
        // Anchor parity: the extremes get one hypothetical edge each.
        for (int endpoint : {gp.walk.front(), gp.walk.back()}) {
            std::map<int, int> touch;
            for (int e : *wedges) {
                ++touch[g.edges()[e].u];
                ++touch[g.edges()[e].v];
            }
            x[m.zf[slot][node_slot[endpoint]]] = (touch[endpoint] + 1) / 2;
        }
        for (int id : gp.demand_ids) {
            if (!demand_slot.count(id)) return std::nullopt;
            int j = demand_slot[id];
            x[m.u[slot][j]] = 1;
            // Protection flow: the sub-walk between the demand's endpoints.
            auto first = std::find(gp.walk.begin(), gp.walk.end(), m.demands[j].s);
            auto second = std::find(gp.walk.begin(), gp.walk.end(), m.demands[j].t);
            if (first == gp.walk.end() || second == gp.walk.end()) return std::nullopt;
            auto lo = std::min(first, second), hi = std::max(first, second);
            std::vector<int> sub(lo, hi + 1);
            auto qedges = pick_edges(sub);
            if (!qedges) return std::nullopt;
            for (int e : *qedges) x[m.q[j][e]] = 1;
            apply_parity(m.zq[j], *qedges, {m.demands[j].s, m.demands[j].t});
        }
    }
    return x;
}

}  // namespace

double solution_cost(const topo::Graph& g, const ProvisionSolution& sol) {
    double c = 0;
    for (const auto& [id, path] : sol.working) c += topo::path_cost(g, path);
    for (const GroupPlan& gp : sol.groups) c += topo::path_cost(g, gp.walk);
    return c;
}

namespace {

// One group's subproblem: the members' mutually disjoint workings plus a
// shared walk, exactly as the full model restricted to a single active slot.
struct GroupResult {
    bool feasible = false;
    bool decided = false;  // proved infeasible (vs ran out of budget)
    bool proved = false;
    double cost = 0;
    double bound = 0;
    GroupPlan plan;
    std::map<int, std::vector<int>> working;
};

GroupResult solve_group(const topo::Graph& g, const std::vector<topo::Demand>& members,
                        long budget_ms, double cutoff) {
    GroupResult out;
    if (members.size() == 1) {
        // Flow decomposition with positive costs makes the single-demand
        // optimum exactly the minimum disjoint pair.
        out.decided = true;
        auto pair = topo::disjoint_pair(g, members[0].s, members[0].t);
        if (!pair) return out;
        out.feasible = out.proved = true;
        out.working[members[0].id] = pair->first;
        out.plan = {pair->second, {members[0].id}};
        out.cost = out.bound =
            topo::path_cost(g, pair->first) + topo::path_cost(g, pair->second);
        return out;
    }
    {
        // Distinct endpoints are a structural requirement for joint groups.
        std::set<int> ends;
        for (const topo::Demand& d : members) {
            if (!ends.insert(d.s).second || !ends.insert(d.t).second) {
                out.decided = true;
                return out;
            }
        }
    }

    ProvisionModel sub = build_model(g, members);
    lp::Problem work = sub.lp;
    const int k = static_cast<int>(members.size());
    const int ne = static_cast<int>(g.edges().size());
    // Single active slot: slot 0 protects everyone, the rest are dark.
    for (int j = 0; j < k; ++j) work.lower[sub.u[0][j]] = 1;
    for (int i = 1; i < k; ++i) {
        for (int j = 0; j < k; ++j) work.upper[sub.u[i][j]] = 0;
        for (int e = 0; e < ne; ++e) work.upper[sub.f[i][e]] = 0;
        for (size_t v = 0; v < sub.end_nodes.size(); ++v)
            work.upper[sub.fs[i][v]] = work.upper[sub.ft[i][v]] = 0;
    }
    // Valid bounds: workings cost at least their shortest paths; the walk at
    // least the cheapest endpoint tour in the shortest-path metric.
    std::map<std::pair<int, int>, double> dist;
    auto metric = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = dist.find({key.first, key.second});
        if (it != dist.end()) return it->second;
        auto path = topo::shortest_path(g, a, b);
        double d = path ? topo::path_cost(g, *path) : 1e18;
        dist[{key.first, key.second}] = d;
        return d;
    };
    for (int j = 0; j < k; ++j) {
        lp::Row r;
        r.rel = lp::Rel::kGe;
        r.rhs = metric(members[j].s, members[j].t);
        r.name = "wlb_" + std::to_string(j);
        for (int e = 0; e < ne; ++e) r.terms.push_back({sub.p[j][e], g.edges()[e].cost});
        work.add_row(std::move(r));
    }
    {
        std::vector<int> pts;
        for (const topo::Demand& d : members) {
            pts.push_back(d.s);
            pts.push_back(d.t);
        }
        std::sort(pts.begin(), pts.end());
        double lb = 1e18;
        do {
            double c = 0;
            for (size_t i = 0; i + 1 < pts.size(); ++i) c += metric(pts[i], pts[i + 1]);
            lb = std::min(lb, c);
        } while (std::next_permutation(pts.begin(), pts.end()));
        if (lb < 1e17) {
            lp::Row r;
            r.rel = lp::Rel::kGe;
            r.rhs = lb;
            r.name = "tour";
            for (int e = 0; e < ne; ++e) r.terms.push_back({sub.f[0][e], g.edges()[e].cost});
            work.add_row(std::move(r));
        }
    }

    lp::MilpOptions opt;
    opt.branch_priority = sub.branch_priority;
    opt.lazy_rows = sub.lazy_rows;
    opt.cutoff = cutoff;
    // The walk spans every protected endpoint, so each vertex cut between
    // two endpoints carries at least one walk edge. Separated by max-flow
    // over the fractional f values.
    std::vector<int> endpoints;
    for (const topo::Demand& d : members) {
        endpoints.push_back(d.s);
        endpoints.push_back(d.t);
    }
    opt.separate = [&g, &sub, endpoints, ne](const std::vector<double>& x) {
        std::vector<lp::Row> cuts;
        int root = endpoints[0];
        for (size_t t = 1; t < endpoints.size(); ++t) {
            // Edmonds-Karp with capacities x[f], tracking the source side.
            std::vector<double> cap(2 * ne);
            for (int e = 0; e < ne; ++e)
                cap[2 * e] = cap[2 * e + 1] = std::max(0.0, x[sub.f[0][e]]);
            double flow = 0;
            for (;;) {
                std::vector<int> pred(g.max_node_id() + 1, -1);
                std::vector<char> seen(g.max_node_id() + 1, 0);
                std::vector<int> queue{root};
                seen[root] = 1;
                for (size_t qi = 0; qi < queue.size() && !seen[endpoints[t]]; ++qi) {
                    int u = queue[qi];
                    for (int e : g.incident(u)) {
                        const topo::Edge& ed = g.edges()[e];
                        int arc = (ed.u == u) ? 2 * e : 2 * e + 1;
                        int w = (ed.u == u) ? ed.v : ed.u;
                        if (!seen[w] && cap[arc] > 1e-7) {
                            seen[w] = 1;
                            pred[w] = arc;
                            queue.push_back(w);
                        }
                    }
                }
                if (!seen[endpoints[t]]) {
                    if (flow < 1.0 - 1e-6) {
                        // seen[] is the cut's source side.
                        lp::Row r;
                        r.rel = lp::Rel::kGe;
                        r.rhs = 1;
                        r.name = "steiner_cut";
                        for (int e = 0; e < ne; ++e) {
                            const topo::Edge& ed = g.edges()[e];
                            if (seen[ed.u] != seen[ed.v]) r.terms.push_back({sub.f[0][e], 1.0});
                        }
                        if (!r.terms.empty()) cuts.push_back(std::move(r));
                    }
                    break;
                }
                double aug = 1e18;
                for (int v = endpoints[t]; v != root;) {
                    aug = std::min(aug, cap[pred[v]]);
                    const topo::Edge& ed = g.edges()[pred[v] / 2];
                    v = (pred[v] % 2 == 0) ? ed.u : ed.v;
                }
                for (int v = endpoints[t]; v != root;) {
                    int arc = pred[v];
                    cap[arc] -= aug;
                    cap[arc ^ 1] += aug;
                    const topo::Edge& ed = g.edges()[arc / 2];
                    v = (arc % 2 == 0) ? ed.u : ed.v;
                }
                flow += aug;
                if (flow >= 1.0 - 1e-6) break;  // cut cannot be violated
            }
            if (!cuts.empty()) break;  // one cut per round keeps LPs lean
        }
        return cuts;
    };
    // Warm start from the greedy walk builder when it finds this grouping.
    try {
        auto h = solve_heuristic(g, members, 3);
        if (h.groups.size() == 1 && h.flagged.empty()) {
            if (auto x = encode_solution(sub, h)) opt.warm_starts.push_back(std::move(*x));
        }
    } catch (const ProvisionError&) {
    }

    auto t0 = std::chrono::steady_clock::now();
    auto left = [&] {
        auto used = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        return budget_ms - used;
    };
    for (;;) {
        opt.budget_ms = std::max(left(), 100l);
        lp::MilpResult r = lp::solve_milp(work, opt);
        if (r.status == lp::MilpStatus::kInfeasible) {
            out.decided = true;
            return out;
        }
        if (r.x.empty()) return out;  // budget ran dry with nothing in hand
        DecodeFailure fail{-1, {}};
        auto sol = decode_solution(sub, r.x, &fail);
        if (sol) {
            out.feasible = true;
            out.decided = true;
            out.proved = r.status == lp::MilpStatus::kOptimal;
            out.cost = sol->cost;
            out.bound = out.proved ? out.cost : r.bound;
            out.plan = sol->groups.at(0);
            out.working = sol->working;
            return out;
        }
        if (fail.slot < 0) throw ProvisionError("group decode failed on working flows");
        lp::Row cut;
        cut.rel = lp::Rel::kLe;
        cut.rhs = static_cast<double>(fail.f_edges.size()) - 1;
        cut.name = "nogood_" + std::to_string(work.rows.size());
        std::vector<char> in_set(ne, 0);
        for (int e : fail.f_edges) in_set[e] = 1;
        for (int e = 0; e < ne; ++e)
            cut.terms.push_back({sub.f[0][e], in_set[e] ? 1.0 : -1.0});
        work.add_row(std::move(cut));
        if (left() < 200) return out;  // infeasible-by-budget
    }
}

}  // namespace

ProvisionSolution solve_exact(const ProvisionModel& model, long budget_ms) {
    const topo::Graph& g = model.graph;
    for (const topo::Demand& d : model.demands)
        if (topo::k_connectivity(g, d.s, d.t) < 2)
            throw ProvisionError("demand (" + std::to_string(d.s) + "," + std::to_string(d.t) +
                                 ") is not 2-edge-connected: protection is impossible");

    const int n = static_cast<int>(model.demands.size());
    auto t0 = std::chrono::steady_clock::now();
    auto left = [&] {
        auto used = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        return budget_ms - used;
    };

    // Fixing the assignment variables decouples the groups: nothing in the
    // formulation links two slots once U is integral. Branching U first
    // therefore amounts to enumerating demand partitions (in canonical
    // restricted-growth order) and solving each group's remainder on its own,
    // with results cached across partitions.
    std::vector<std::vector<int>> partitions;  // restricted growth strings
    {
        std::vector<int> rgs(n, 0);
        std::function<void(int, int)> rec = [&](int i, int maxv) {
            if (i == n) {
                partitions.push_back(rgs);
                return;
            }
            for (int v = 0; v <= std::min(maxv + 1, n - 1); ++v) {
                rgs[i] = v;
                rec(i + 1, std::max(maxv, v));
            }
        };
        rec(0, -1);
    }

    // Cheap lower bound per group mask: shortest-path metric tour over the
    // endpoints plus each member's own shortest path.
    std::map<std::pair<int, int>, double> dist;
    auto metric = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = dist.find({key.first, key.second});
        if (it != dist.end()) return it->second;
        auto path = topo::shortest_path(g, a, b);
        double d = path ? topo::path_cost(g, *path) : 1e18;
        dist[{key.first, key.second}] = d;
        return d;
    };
    auto mask_lb = [&](uint32_t mask) {
        std::vector<int> pts;
        double sp_sum = 0;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) {
                pts.push_back(model.demands[j].s);
                pts.push_back(model.demands[j].t);
                sp_sum += metric(model.demands[j].s, model.demands[j].t);
            }
        std::sort(pts.begin(), pts.end());
        double lb = 1e18;
        do {
            double c = 0;
            for (size_t i = 0; i + 1 < pts.size(); ++i) c += metric(pts[i], pts[i + 1]);
            lb = std::min(lb, c);
        } while (std::next_permutation(pts.begin(), pts.end()));
        return sp_sum + lb;
    };
    std::map<uint32_t, double> lb_cache;
    auto group_lb = [&](uint32_t mask) {
        auto it = lb_cache.find(mask);
        if (it != lb_cache.end()) return it->second;
        return lb_cache[mask] = mask_lb(mask);
    };

    struct PartitionInfo {
        std::vector<uint32_t> masks;
        double lb;
    };
    std::vector<PartitionInfo> order;
    for (const auto& rgs : partitions) {
        PartitionInfo pi;
        std::map<int, uint32_t> bymask;
        for (int j = 0; j < n; ++j) bymask[rgs[j]] |= 1u << j;
        pi.lb = 0;
        for (auto& [grp, mask] : bymask) {
            pi.masks.push_back(mask);
            pi.lb += group_lb(mask);
        }
        order.push_back(std::move(pi));
    }
    std::sort(order.begin(), order.end(),
              [](const PartitionInfo& a, const PartitionInfo& b) { return a.lb < b.lb; });

    struct CacheEntry {
        long budget = 0;
        double cutoff = 0;
        GroupResult result;
    };
    std::map<uint32_t, CacheEntry> cache;
    auto group_of = [&](uint32_t mask, long slice, double cutoff) -> const GroupResult& {
        auto it = cache.find(mask);
        if (it != cache.end()) {
            const CacheEntry& ce = it->second;
            // A proved optimum below its cutoff is universally valid; a
            // proved "nothing below the cutoff" covers any smaller cutoff;
            // an undecided entry only stands if it had at least this budget.
            if (ce.result.decided && ce.result.feasible && ce.result.cost < ce.cutoff - 1e-9)
                return ce.result;
            if (ce.result.decided && !ce.result.feasible && cutoff <= ce.cutoff + 1e-9)
                return ce.result;
            if (!ce.result.decided && ce.budget >= slice && cutoff >= ce.cutoff - 1e-9)
                return ce.result;
        }
        std::vector<topo::Demand> members;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) members.push_back(model.demands[j]);
        CacheEntry& slot = cache[mask];
        slot.budget = slice;
        slot.cutoff = cutoff;
        slot.result = solve_group(g, members, slice, cutoff);
        return slot.result;
    };

    ProvisionSolution best;
    bool have = false;
    bool exhausted = true;
    double open_bound = lp::kInf;
    double incumbent = lp::kInf;
    try {
        std::vector<topo::Demand> dvec = model.demands;
        auto h = solve_heuristic(g, dvec, 1);
        // Only walks expressible with distinct edges live in the model's
        // solution space; a link-repeating walk would not be comparable.
        auto expressible = [&](const std::vector<int>& walk) {
            std::vector<char> used(g.edges().size(), 0);
            for (size_t i = 0; i + 1 < walk.size(); ++i) {
                int pick = -1;
                for (int e : g.incident(walk[i])) {
                    const topo::Edge& ed = g.edges()[e];
                    int w = (ed.u == walk[i]) ? ed.v : ed.u;
                    if (w == walk[i + 1] && !used[e]) {
                        pick = e;
                        break;
                    }
                }
                if (pick < 0) return false;
                used[pick] = 1;
            }
            return true;
        };
        bool ok = h.flagged.empty();
        for (const GroupPlan& gp : h.groups) ok &= expressible(gp.walk);
        if (ok) {
            incumbent = h.cost;
            best = std::move(h);
            have = true;
        }
    } catch (const ProvisionError&) {
    }
    for (const PartitionInfo& pi : order) {
        if (pi.lb >= incumbent - 1e-9) break;  // sorted: the rest are no better
        if (left() < 200) {
            exhausted = false;
            open_bound = std::min(open_bound, pi.lb);
            continue;
        }
        double cost = 0, bound = 0;
        bool ok = true, proved = true;
        std::vector<const GroupResult*> parts;
        double rest_lb = pi.lb;
        for (uint32_t mask : pi.masks) {
            rest_lb -= group_lb(mask);
            if (cost + group_lb(mask) + rest_lb >= incumbent - 1e-9) {
                ok = false;  // proven hopeless from bounds alone
                break;
            }
            long slice = std::max(500l, left() * 3 / 4);
            // The group may cost at most what the incumbent leaves after
            // lower-bounding everything else in this partition.
            double cutoff = incumbent - cost - rest_lb;
            const GroupResult& gr = group_of(mask, slice, cutoff);
            if (!gr.feasible) {
                ok = false;
                if (!gr.decided) {
                    exhausted = false;
                    open_bound = std::min(open_bound, pi.lb);
                }
                break;
            }
            proved &= gr.proved;
            cost += gr.cost;
            bound += gr.bound;
            parts.push_back(&gr);
        }
        if (!ok) continue;
        if (!proved) {
            exhausted = false;
            open_bound = std::min(open_bound, std::max(bound, pi.lb));
        }
        if (cost < incumbent) {
            incumbent = cost;
            ProvisionSolution sol;
            for (const GroupResult* gr : parts) {
                sol.groups.push_back(gr->plan);
                for (const auto& [id, path] : gr->working) sol.working[id] = path;
            }
            sol.cost = cost;
            best = std::move(sol);
            have = true;
        }
    }
    if (!have) throw ProvisionError("no feasible provisioning found within budget");
    best.quality = exhausted ? Quality::kProvedOptimal : Quality::kBoundGap;
    best.bound = exhausted ? best.cost : std::min(open_bound, best.cost);
    return best;
}

ProvisionSolution baseline_one_plus_one(const topo::Graph& g,
                                        std::span<const topo::Demand> demands) {
    ProvisionSolution sol;
    sol.quality = Quality::kProvedOptimal;
    for (const topo::Demand& d : demands) {
        auto pair = topo::disjoint_pair(g, d.s, d.t);
        if (!pair)
            throw ProvisionError("demand (" + std::to_string(d.s) + "," + std::to_string(d.t) +
                                 ") admits no link-disjoint path pair");
        sol.working[d.id] = pair->first;
        sol.groups.push_back({pair->second, {d.id}});
    }
    sol.cost = solution_cost(g, sol);
    sol.bound = sol.cost;
    return sol;
}

namespace {

struct HeurGroup {
    std::vector<topo::Demand> members;
    std::map<int, std::vector<int>> working;
    std::vector<int> walk;
    double cost;
};

std::vector<char> ban_path_edges(const topo::Graph& g, std::vector<char> banned,
                                 const std::vector<int>& nodes) {
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        // Ban every parallel edge of the hop; walks must avoid the pair.
        for (int e : g.incident(nodes[i])) {
            const topo::Edge& ed = g.edges()[e];
            int w = (ed.u == nodes[i]) ? ed.v : ed.u;
            if (w == nodes[i + 1]) banned[e] = 1;
        }
    }
    return banned;
}

std::optional<HeurGroup> try_group(const topo::Graph& g, std::vector<topo::Demand> members,
                                   Rng& rng) {
    std::set<int> endpoints;
    for (const topo::Demand& d : members) {
        if (!endpoints.insert(d.s).second || !endpoints.insert(d.t).second) return std::nullopt;
    }
    rng.shuffle(members);
    // Workings: sequential shortest paths, each avoiding the previous ones.
    HeurGroup out;
    out.members = members;
    std::vector<char> banned(g.edges().size(), 0);
    for (const topo::Demand& d : members) {
        auto sp = topo::shortest_path(g, d.s, d.t,
                                      std::vector<bool>(banned.begin(), banned.end()));
        if (!sp) return std::nullopt;
        out.working[d.id] = *sp;
        banned = ban_path_edges(g, std::move(banned), *sp);
    }
    // Walk: nearest-neighbor endpoint tour over the working-free graph.
    std::vector<int> todo(endpoints.begin(), endpoints.end());
    rng.shuffle(todo);
    std::vector<int> walk{todo.back()};
    todo.pop_back();
    std::vector<bool> walk_banned(banned.begin(), banned.end());
    while (!todo.empty()) {
        int cur = walk.back();
        int best = -1;
        double best_cost = 0;
        std::vector<int> best_path;
        for (size_t c = 0; c < todo.size(); ++c) {
            auto sp = topo::shortest_path(g, cur, todo[c], walk_banned);
            if (!sp) continue;
            double cost = topo::path_cost(g, *sp);
            if (best < 0 || cost < best_cost) {
                best = static_cast<int>(c);
                best_cost = cost;
                best_path = *sp;
            }
        }
        if (best < 0) return std::nullopt;
        walk.insert(walk.end(), best_path.begin() + 1, best_path.end());
        todo.erase(todo.begin() + best);
    }
    out.walk = walk;

    // Structural check via the real validators.
    std::vector<topo::Connection> conns;
    for (const topo::Demand& d : members) conns.push_back({d.id, d.s, d.t, out.working[d.id]});
    try {
        auto grp = topo::ProtectionGroup::build(g, topo::Walk{walk}, conns);
        if (!topo::validate_group(g, grp).empty()) return std::nullopt;
    } catch (const topo::TopologyError&) {
        return std::nullopt;
    }
    out.cost = topo::path_cost(g, walk);
    for (const auto& [id, path] : out.working) out.cost += topo::path_cost(g, path);
    return out;
}

}  // namespace

ProvisionSolution solve_heuristic(const topo::Graph& g, std::span<const topo::Demand> demands,
                                  uint64_t seed) {
    ProvisionSolution best;
    double best_cost = lp::kInf;
    std::vector<int> flagged_base;

    // Singleton fallback for everything; demands without a disjoint pair are
    // flagged and carried with a bare shortest path.
    std::map<int, HeurGroup> singleton;
    for (const topo::Demand& d : demands) {
        auto pair = topo::disjoint_pair(g, d.s, d.t);
        if (!pair) {
            auto sp = topo::shortest_path(g, d.s, d.t);
            if (!sp)
                throw ProvisionError("demand (" + std::to_string(d.s) + "," +
                                     std::to_string(d.t) + ") is disconnected");
            flagged_base.push_back(d.id);
            continue;
        }
        HeurGroup hg;
        hg.members = {d};
        hg.working[d.id] = pair->first;
        hg.walk = pair->second;
        hg.cost = topo::path_cost(g, pair->first) + topo::path_cost(g, pair->second);
        singleton.emplace(d.id, std::move(hg));
    }

    const int restarts = 6;
    for (int rs = 0; rs < restarts; ++rs) {
        Rng rng(mix(seed) + rs);
        std::vector<HeurGroup> groups;
        for (auto& [id, hg] : singleton) groups.push_back(hg);
        bool improved = true;
        while (improved) {
            improved = false;
            for (size_t a = 0; a < groups.size() && !improved; ++a) {
                for (size_t b = a + 1; b < groups.size() && !improved; ++b) {
                    if (groups[a].members.size() + groups[b].members.size() > 4) continue;
                    std::vector<topo::Demand> merged = groups[a].members;
                    merged.insert(merged.end(), groups[b].members.begin(),
                                  groups[b].members.end());
                    auto cand = try_group(g, merged, rng);
                    if (cand && cand->cost < groups[a].cost + groups[b].cost - 1e-9) {
                        groups[a] = std::move(*cand);
                        groups.erase(groups.begin() + b);
                        improved = true;
                    }
                }
            }
        }
        double total = 0;
        for (const HeurGroup& hg : groups) total += hg.cost;
        if (total < best_cost) {
            best_cost = total;
            ProvisionSolution sol;
            for (const HeurGroup& hg : groups) {
                GroupPlan gp;
                gp.walk = hg.walk;
                for (const topo::Demand& d : hg.members) {
                    gp.demand_ids.push_back(d.id);
                    sol.working[d.id] = hg.working.at(d.id);
                }
                sol.groups.push_back(std::move(gp));
            }
            sol.cost = total;
            sol.quality = Quality::kHeuristic;
            best = std::move(sol);
        }
    }
    for (int id : flagged_base) {
        best.flagged.push_back(id);
        for (const topo::Demand& d : demands)
            if (d.id == id) best.working[id] = *topo::shortest_path(g, d.s, d.t);
    }
    best.cost = solution_cost(g, best);
    return best;
}

ProvisionSolution baseline_sbpp(const topo::Graph& g, std::span<const topo::Demand> demands,
                                long budget_ms) {
    const int n = static_cast<int>(demands.size());
    const int ne = static_cast<int>(g.edges().size());
    auto nodes = g.nodes();

    lp::Problem p;
    std::vector<std::vector<int>> w(n, std::vector<int>(ne)), b(n, std::vector<int>(ne));
    std::vector<std::vector<int>> zw(n), zb(n);
    std::vector<int> r(ne);
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e)
            w[j][e] = p.add_var("w" + std::to_string(j) + "_e" + std::to_string(e), 0, 1,
                                g.edges()[e].cost, true);
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e)
            b[j][e] = p.add_var("b" + std::to_string(j) + "_e" + std::to_string(e), 0, 1, 0, true);
    for (int e = 0; e < ne; ++e)
        r[e] = p.add_var("r_e" + std::to_string(e), 0, n, g.edges()[e].cost, true);
    for (int j = 0; j < n; ++j) {
        zw[j].resize(nodes.size());
        zb[j].resize(nodes.size());
        for (size_t v = 0; v < nodes.size(); ++v) {
            double cap = static_cast<double>(g.incident(nodes[v]).size() / 2);
            zw[j][v] = p.add_var("Zw" + std::to_string(j) + "_" + std::to_string(nodes[v]), 0, cap,
                                 0, true);
            zb[j][v] = p.add_var("Zb" + std::to_string(j) + "_" + std::to_string(nodes[v]), 0, cap,
                                 0, true);
        }
    }

    auto flow_rows = [&](const std::vector<std::vector<int>>& flow,
                         const std::vector<std::vector<int>>& z, const char* tag) {
        for (int j = 0; j < n; ++j) {
            std::vector<lp::Term> src;
            for (int e : g.incident(demands[j].s)) src.push_back({flow[j][e], 1.0});
            p.add_row({std::move(src), lp::Rel::kEq, 1, std::string(tag) + "_src_" + std::to_string(j)});
            for (size_t v = 0; v < nodes.size(); ++v) {
                if (nodes[v] == demands[j].s || nodes[v] == demands[j].t) continue;
                std::vector<lp::Term> terms;
                for (int e : g.incident(nodes[v])) terms.push_back({flow[j][e], 1.0});
                terms.push_back({z[j][v], -2.0});
                p.add_row({std::move(terms), lp::Rel::kEq, 0,
                           std::string(tag) + "_deg_" + std::to_string(j) + "_" +
                               std::to_string(nodes[v])});
            }
        }
    };
    flow_rows(w, zw, "w");
    flow_rows(b, zb, "b");
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e)
            p.add_row({{{w[j][e], 1.0}, {b[j][e], 1.0}},
                       lp::Rel::kLe,
                       1,
                       "disj_" + std::to_string(j) + "_e" + std::to_string(e)});
    for (int j = 0; j < n; ++j)
        for (int e = 0; e < ne; ++e)
            p.add_row({{{b[j][e], 1.0}, {r[e], -1.0}},
                       lp::Rel::kLe,
                       0,
                       "resv_" + std::to_string(j) + "_e" + std::to_string(e)});

    // Valid bounds: each working costs at least its shortest path, and since
    // every backup is covered by reservations, reservations plus working
    // beat the demand's best disjoint pair.
    for (int j = 0; j < n; ++j) {
        auto sp = topo::shortest_path(g, demands[j].s, demands[j].t);
        if (sp) {
            lp::Row row;
            row.rel = lp::Rel::kGe;
            row.rhs = topo::path_cost(g, *sp);
            row.name = "wlb_" + std::to_string(j);
            for (int e = 0; e < ne; ++e) row.terms.push_back({w[j][e], g.edges()[e].cost});
            p.add_row(std::move(row));
        }
        auto pair = topo::disjoint_pair(g, demands[j].s, demands[j].t);
        if (pair) {
            lp::Row row;
            row.rel = lp::Rel::kGe;
            row.rhs = topo::path_cost(g, pair->first) + topo::path_cost(g, pair->second);
            row.name = "plb_" + std::to_string(j);
            for (int e = 0; e < ne; ++e) {
                row.terms.push_back({w[j][e], g.edges()[e].cost});
                row.terms.push_back({r[e], g.edges()[e].cost});
            }
            p.add_row(std::move(row));
        }
    }

    lp::MilpOptions opt;
    opt.budget_ms = budget_ms;
    // Warm start: the disjoint pairs with unshared reservations.
    {
        std::vector<double> x(p.num_vars(), 0.0);
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) {
            auto pair = topo::disjoint_pair(g, demands[j].s, demands[j].t);
            if (!pair) {
                ok = false;
                break;
            }
            auto mark = [&](const std::vector<int>& path, const std::vector<std::vector<int>>& fv,
                            const std::vector<std::vector<int>>& zv) {
                std::vector<char> used(ne, 0);
                for (size_t i = 0; i + 1 < path.size(); ++i) {
                    int best = -1;
                    for (int e : g.incident(path[i])) {
                        const topo::Edge& ed = g.edges()[e];
                        int to = (ed.u == path[i]) ? ed.v : ed.u;
                        if (to == path[i + 1] && !used[e] &&
                            (best < 0 || ed.cost < g.edges()[best].cost))
                            best = e;
                    }
                    if (best < 0) {
                        ok = false;
                        return;
                    }
                    used[best] = 1;
                    x[fv[j][best]] = 1;
                }
                std::map<int, int> touch;
                for (int e = 0; e < ne; ++e)
                    if (x[fv[j][e]] > 0.5) {
                        ++touch[g.edges()[e].u];
                        ++touch[g.edges()[e].v];
                    }
                for (size_t v = 0; v < nodes.size(); ++v) {
                    if (nodes[v] == demands[j].s || nodes[v] == demands[j].t) continue;
                    if (touch.count(nodes[v])) x[zv[j][v]] = touch[nodes[v]] / 2;
                }
            };
            mark(pair->first, w, zw);
            mark(pair->second, b, zb);
        }
        if (ok) {
            for (int e = 0; e < ne; ++e) {
                double sum = 0;
                for (int j = 0; j < n; ++j) sum += x[b[j][e]];
                x[r[e]] = sum;
            }
            opt.warm_starts.push_back(std::move(x));
        }
    }

    auto t0 = std::chrono::steady_clock::now();
    auto left = [&] {
        auto used = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        return budget_ms - used;
    };

    lp::MilpResult res;
    bool proved = true;
    for (;;) {
        opt.budget_ms = std::max(left(), 100l);
        res = lp::solve_milp(p, opt);
        if (res.status == lp::MilpStatus::kInfeasible)
            throw ProvisionError("shared-backup model is infeasible");
        if (res.x.empty()) throw ProvisionError("shared-backup solver found no solution in budget");
        proved = res.status == lp::MilpStatus::kOptimal;
        // Scenario check: a single link failure must not oversubscribe any
        // backup reservation.
        int added = 0;
        for (int e = 0; e < ne && !added; ++e) {
            std::vector<int> users;
            for (int j = 0; j < n; ++j)
                if (res.x[b[j][e]] > 0.5) users.push_back(j);
            if (users.size() < 2) continue;
            for (int l = 0; l < ne && !added; ++l) {
                std::vector<int> rerouted;
                for (int j : users)
                    if (res.x[w[j][l]] > 0.5) rerouted.push_back(j);
                if (static_cast<double>(rerouted.size()) > res.x[r[e]] + 0.5) {
                    lp::Row cut;
                    cut.rel = lp::Rel::kGe;
                    cut.rhs = -static_cast<double>(rerouted.size());
                    cut.name = "scen_" + std::to_string(p.rows.size());
                    cut.terms.push_back({r[e], 1.0});
                    for (int j : rerouted) {
                        cut.terms.push_back({b[j][e], -1.0});
                        cut.terms.push_back({w[j][l], -1.0});
                    }
                    p.add_row(std::move(cut));
                    ++added;
                }
            }
        }
        if (!added) break;
        if (left() < 200) {
            proved = false;
            break;
        }
    }

    ProvisionSolution sol;
    for (int j = 0; j < n; ++j) {
        std::vector<char> chosen(ne, 0);
        for (int e = 0; e < ne; ++e) chosen[e] = res.x[w[j][e]] > 0.5;
        auto wp = trail_from(g, chosen, demands[j].s, demands[j].t);
        if (!wp) throw ProvisionError("shared-backup decode failed");
        sol.working[demands[j].id] = *wp;
        for (int e = 0; e < ne; ++e) chosen[e] = res.x[b[j][e]] > 0.5;
        auto bp = trail_from(g, chosen, demands[j].s, demands[j].t);
        if (!bp) throw ProvisionError("shared-backup decode failed");
        sol.groups.push_back({*bp, {demands[j].id}});
    }
    sol.cost = res.obj;
    sol.bound = proved ? res.obj : res.bound;
    sol.quality = proved ? Quality::kProvedOptimal : Quality::kBoundGap;
    return sol;
}

std::vector<topo::Violation> recheck(const topo::Graph& g, std::span<const topo::Demand> demands,
                                     const ProvisionSolution& sol) {
    std::vector<topo::Violation> out;
    std::map<int, const topo::Demand*> by_id;
    for (const topo::Demand& d : demands) by_id[d.id] = &d;
    std::map<int, int> protected_count;
    std::vector<topo::ProtectionGroup> groups;
    for (const GroupPlan& gp : sol.groups) {
        std::vector<topo::Connection> conns;
        for (int id : gp.demand_ids) {
            auto it = by_id.find(id);
            auto wp = sol.working.find(id);
            if (it == by_id.end() || wp == sol.working.end()) {
                out.push_back({topo::Violation::kWorkingBroken,
                               "group references demand " + std::to_string(id) +
                                   " without a working path"});
                continue;
            }
            conns.push_back({id, it->second->s, it->second->t, wp->second});
            ++protected_count[id];
        }
        try {
            groups.push_back(topo::ProtectionGroup::build(g, topo::Walk{gp.walk}, conns));
        } catch (const topo::TopologyError& e) {
            out.push_back({topo::Violation::kEndpointMissing, e.what()});
        }
    }
    auto v = topo::validate_groups(g, groups);
    out.insert(out.end(), v.begin(), v.end());
    for (const topo::Demand& d : demands) {
        bool flagged = std::find(sol.flagged.begin(), sol.flagged.end(), d.id) != sol.flagged.end();
        if (!flagged && protected_count[d.id] != 1)
            out.push_back({topo::Violation::kEndpointMissing,
                           "demand " + std::to_string(d.id) + " protected by " +
                               std::to_string(protected_count[d.id]) + " paths, expected 1"});
    }
    return out;
}

}  // namespace ncp::prov
