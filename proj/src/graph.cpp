#include "ncp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace ncp::topo {

void Graph::add_node(int id, std::string label) {
    if (id < 0) throw TopologyError("node id must be non-negative");
    if (id >= static_cast<int>(present_.size())) {
        present_.resize(id + 1, false);
        labels_.resize(id + 1);
        incident_.resize(id + 1);
    }
    if (present_[id]) throw TopologyError("duplicate node id " + std::to_string(id));
    present_[id] = true;
    labels_[id] = std::move(label);
    ++node_count_;
}

int Graph::add_edge(int u, int v, double cost) {
    require_node(u, "edge endpoint");
    require_node(v, "edge endpoint");
    if (u == v) throw TopologyError("self-loop at node " + std::to_string(u));
    if (cost < 0) throw TopologyError("negative edge cost");
    int idx = static_cast<int>(edges_.size());
    edges_.push_back({u, v, cost});
    incident_[u].push_back(idx);
    incident_[v].push_back(idx);
    return idx;
}

std::vector<int> Graph::nodes() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(present_.size()); ++i)
        if (present_[i]) out.push_back(i);
    return out;
}

const std::string& Graph::label(int id) const {
    require_node(id, "label lookup");
    return labels_[id];
}

const std::vector<int>& Graph::incident(int id) const {
    require_node(id, "adjacency lookup");
    return incident_[id];
}

int Graph::multiplicity(int u, int v) const {
    require_node(u, "multiplicity");
    require_node(v, "multiplicity");
    int n = 0;
    for (int e : incident_[u]) {
        const Edge& ed = edges_[e];
        if ((ed.u == u && ed.v == v) || (ed.u == v && ed.v == u)) ++n;
    }
    return n;
}

double Graph::min_edge_cost() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Edge& e : edges_) m = std::min(m, e.cost);
    return m;
}

void Graph::require_node(int id, const char* what) const {
    if (!has_node(id))
        throw TopologyError(std::string(what) + ": unknown node id " + std::to_string(id));
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

[[noreturn]] void fail(int lineno, const std::string& msg) {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg);
}

int parse_int(const std::string& s, int lineno) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(lineno, "expected integer, got '" + s + "'");
    }
}

double parse_num(const std::string& s, int lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(lineno, "expected number, got '" + s + "'");
    }
}

}  // namespace

Graph load_graph(std::istream& in) {
    Graph g;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        try {
            if (toks[0] == "node") {
                if (toks.size() < 2 || toks.size() > 3) fail(lineno, "usage: node <id> [label]");
                g.add_node(parse_int(toks[1], lineno), toks.size() == 3 ? toks[2] : "");
            } else if (toks[0] == "edge") {
                if (toks.size() != 4) fail(lineno, "usage: edge <u> <v> <cost>");
                g.add_edge(parse_int(toks[1], lineno), parse_int(toks[2], lineno),
                           parse_num(toks[3], lineno));
            } else {
                fail(lineno, "unknown directive '" + toks[0] + "'");
            }
        } catch (const TopologyError& e) {
            fail(lineno, e.what());
        }
    }
    return g;
}

Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open topology file " + path);
    return load_graph(in);
}

std::vector<Demand> load_traffic(std::istream& in, const Graph& g) {
    std::vector<Demand> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0] != "conn" || toks.size() != 3) fail(lineno, "usage: conn <s> <t>");
        int s = parse_int(toks[1], lineno);
        int t = parse_int(toks[2], lineno);
        try {
            g.require_node(s, "conn endpoint");
            g.require_node(t, "conn endpoint");
        } catch (const TopologyError& e) {
            fail(lineno, e.what());
        }
        if (s == t) fail(lineno, "connection endpoints must differ");
        out.push_back({static_cast<int>(out.size()), s, t});
    }
    return out;
}

std::vector<Demand> load_traffic_file(const std::string& path, const Graph& g) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open traffic file " + path);
    return load_traffic(in, g);
}

int k_connectivity(const Graph& g, int s, int t) {
    g.require_node(s, "k_connectivity");
    g.require_node(t, "k_connectivity");
    if (s == t) throw TopologyError("k_connectivity: endpoints must differ");
    // Unit-capacity max-flow; each undirected edge is one unit in each
    // direction. Residual capacity tracked per (edge, direction).
    int m = static_cast<int>(g.edges().size());
    std::vector<int> cap(2 * m, 1);  // 2e = u->v, 2e+1 = v->u
    int flow = 0;
    for (;;) {
        std::vector<int> pred_arc(g.max_node_id() + 1, -1);
        std::deque<int> q{s};
        std::vector<bool> seen(g.max_node_id() + 1, false);
        seen[s] = true;
        while (!q.empty() && !seen[t]) {
            int u = q.front();
            q.pop_front();
            for (int e : g.incident(u)) {
                const Edge& ed = g.edges()[e];
                int arc = (ed.u == u) ? 2 * e : 2 * e + 1;
                int w = (ed.u == u) ? ed.v : ed.u;
                if (!seen[w] && cap[arc] > 0) {
                    seen[w] = true;
                    pred_arc[w] = arc;
                    q.push_back(w);
                }
            }
        }
        if (!seen[t]) break;
        int v = t;
        while (v != s) {
            int arc = pred_arc[v];
            cap[arc] -= 1;
            cap[arc ^ 1] += 1;
            const Edge& ed = g.edges()[arc / 2];
            v = (arc % 2 == 0) ? ed.u : ed.v;
        }
        ++flow;
    }
    return flow;
}

std::optional<std::vector<int>> shortest_path(const Graph& g, int s, int t,
                                              const std::vector<bool>& banned) {
    g.require_node(s, "shortest_path");
    g.require_node(t, "shortest_path");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.max_node_id() + 1, inf);
    std::vector<int> pred(g.max_node_id() + 1, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        if (u == t) break;
        for (int e : g.incident(u)) {
            if (e < static_cast<int>(banned.size()) && banned[e]) continue;
            const Edge& ed = g.edges()[e];
            int w = (ed.u == u) ? ed.v : ed.u;
            if (dist[u] + ed.cost < dist[w]) {
                dist[w] = dist[u] + ed.cost;
                pred[w] = u;
                pq.push({dist[w], w});
            }
        }
    }
    if (dist[t] == inf) return std::nullopt;
    std::vector<int> path{t};
    for (int v = t; v != s; v = pred[v]) path.push_back(pred[v]);
    std::reverse(path.begin(), path.end());
    return path;
}

double path_cost(const Graph& g, const std::vector<int>& nodes) {
    double c = 0;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int e : g.incident(nodes[i])) {
            const Edge& ed = g.edges()[e];
            int w = (ed.u == nodes[i]) ? ed.v : ed.u;
            if (w == nodes[i + 1]) best = std::min(best, ed.cost);
        }
        if (!std::isfinite(best))
            throw TopologyError("path_cost: nodes " + std::to_string(nodes[i]) + " and " +
                                std::to_string(nodes[i + 1]) + " are not adjacent");
        c += best;
    }
    return c;
}

namespace {

// Bellman-Ford over directed arcs with possibly negative costs (used for the
// residual step of the disjoint-pair computation).
struct Arc {
    int from, to, edge;
    double cost;
};

std::optional<std::vector<int>> bellman_ford_arcs(int n, const std::vector<Arc>& arcs, int s,
                                                  int t) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<int> pred(n, -1);
    dist[s] = 0;
    for (int it = 0; it < n; ++it) {
        bool changed = false;
        for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
            const Arc& arc = arcs[a];
            if (dist[arc.from] + arc.cost < dist[arc.to] - 1e-12) {
                dist[arc.to] = dist[arc.from] + arc.cost;
                pred[arc.to] = a;
                changed = true;
            }
        }
        if (!changed) break;
    }
    if (dist[t] == inf) return std::nullopt;
    std::vector<int> arcs_used;
    for (int v = t; v != s;) {
        arcs_used.push_back(pred[v]);
        v = arcs[pred[v]].from;
    }
    std::reverse(arcs_used.begin(), arcs_used.end());
    return arcs_used;
}

}  // namespace

std::optional<std::pair<std::vector<int>, std::vector<int>>> disjoint_pair(const Graph& g, int s,
                                                                           int t) {
    auto p1 = shortest_path(g, s, t);
    if (!p1) return std::nullopt;

    // Mark the first path's edge set (cheapest parallel edge per hop).
    int m = static_cast<int>(g.edges().size());
    std::vector<bool> on_p1(m, false);
    std::vector<int> p1_dir(m, 0);  // +1: traversed u->v, -1: v->u
    for (size_t i = 0; i + 1 < p1->size(); ++i) {
        int a = (*p1)[i], b = (*p1)[i + 1];
        int best = -1;
        for (int e : g.incident(a)) {
            const Edge& ed = g.edges()[e];
            int w = (ed.u == a) ? ed.v : ed.u;
            if (w == b && !on_p1[e] && (best < 0 || ed.cost < g.edges()[best].cost)) best = e;
        }
        on_p1[best] = true;
        p1_dir[best] = (g.edges()[best].u == a) ? 1 : -1;
    }

    // Residual graph: path edges only reversed at negative cost.
    std::vector<Arc> arcs;
    for (int e = 0; e < m; ++e) {
        const Edge& ed = g.edges()[e];
        if (on_p1[e]) {
            if (p1_dir[e] > 0)
                arcs.push_back({ed.v, ed.u, e, -ed.cost});
            else
                arcs.push_back({ed.u, ed.v, e, -ed.cost});
        } else {
            arcs.push_back({ed.u, ed.v, e, ed.cost});
            arcs.push_back({ed.v, ed.u, e, ed.cost});
        }
    }
    auto aug = bellman_ford_arcs(g.max_node_id() + 1, arcs, s, t);
    if (!aug) return std::nullopt;

    // Union of the two unit flows, cancelling edges traversed both ways.
    std::vector<int> use(m, 0);  // net traversals: +1 forward, -1 backward
    for (int e = 0; e < m; ++e)
        if (on_p1[e]) use[e] += p1_dir[e];
    for (int a : *aug) {
        const Arc& arc = arcs[a];
        int dir = (g.edges()[arc.edge].u == arc.from) ? 1 : -1;
        use[arc.edge] += dir;
    }
    // Walk out two edge-disjoint paths from s by following net flow.
    auto extract = [&](void) -> std::vector<int> {
        std::vector<int> path{s};
        int cur = s;
        while (cur != t) {
            bool advanced = false;
            for (int e : g.incident(cur)) {
                const Edge& ed = g.edges()[e];
                int dir = (ed.u == cur) ? 1 : -1;
                if (use[e] == dir) {
                    use[e] = 0;
                    cur = (ed.u == cur) ? ed.v : ed.u;
                    path.push_back(cur);
                    advanced = true;
                    break;
                }
            }
            if (!advanced) throw TopologyError("disjoint_pair: flow decomposition failed");
        }
        return path;
    };
    std::vector<int> q1 = extract();
    std::vector<int> q2 = extract();
    return std::make_pair(q1, q2);
}

}  // namespace ncp::topo
