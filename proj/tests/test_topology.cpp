#include <doctest.h>

#include <functional>
#include <set>
#include <sstream>

#include "ncp/graph.hpp"
#include "ncp/group.hpp"

using namespace ncp::topo;

namespace {

Graph ring(int n) {
    Graph g;
    for (int i = 0; i < n; ++i) g.add_node(i);
    for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n, 1.0);
    return g;
}

// Exhaustive DFS over simple paths; counts a maximum set of pairwise
// link-disjoint s-t paths by brute force. Oracle for k_connectivity.
int count_disjoint_oracle(const Graph& g, int s, int t) {
    std::vector<std::vector<int>> paths;  // as edge-index lists
    std::vector<int> cur;
    std::vector<bool> used_node(g.max_node_id() + 1, false);
    std::function<void(int)> dfs = [&](int u) {
        if (u == t) {
            paths.push_back(cur);
            return;
        }
        for (int e : g.incident(u)) {
            const Edge& ed = g.edges()[e];
            int w = (ed.u == u) ? ed.v : ed.u;
            if (used_node[w]) continue;
            used_node[w] = true;
            cur.push_back(e);
            dfs(w);
            cur.pop_back();
            used_node[w] = false;
        }
    };
    used_node[s] = true;
    dfs(s);
    // Try all subsets for the largest mutually disjoint family.
    int best = 0;
    int np = static_cast<int>(paths.size());
    for (int mask = 0; mask < (1 << np); ++mask) {
        std::set<int> edges_used;
        bool ok = true;
        int cnt = 0;
        for (int i = 0; i < np && ok; ++i) {
            if (!(mask & (1 << i))) continue;
            ++cnt;
            for (int e : paths[i])
                if (!edges_used.insert(e).second) ok = false;
        }
        if (ok) best = std::max(best, cnt);
    }
    return best;
}

}  // namespace

TEST_CASE("topology parsing") {
    std::istringstream in(
        "# comment\n"
        "node 0 seattle\n"
        "node 1\n"
        "node 2\n"
        "edge 0 1 100.5\n"
        "edge 1 2 3  # trailing comment\n");
    Graph g = load_graph(in);
    CHECK(g.node_count() == 3);
    CHECK(g.edges().size() == 2);
    CHECK(g.label(0) == "seattle");
    CHECK(g.adjacent(1, 2));

    std::istringstream empty("node 0\nnode 1\n");
    Graph g2 = load_graph(empty);
    CHECK(g2.node_count() == 2);
    CHECK(g2.edges().empty());

    std::istringstream dup("node 3\nnode 3\n");
    CHECK_THROWS_WITH_AS(load_graph(dup), "line 2: duplicate node id 3", ParseError);
    std::istringstream bad("node 0\nedge 0 1\n");
    CHECK_THROWS_AS(load_graph(bad), ParseError);
    std::istringstream loop("node 0\nedge 0 0 1\n");
    CHECK_THROWS_AS(load_graph(loop), ParseError);
}

TEST_CASE("traffic parsing") {
    Graph g = ring(4);
    std::istringstream in("conn 0 2\nconn 1 3\n");
    auto demands = load_traffic(in, g);
    REQUIRE(demands.size() == 2);
    CHECK(demands[0].id == 0);
    CHECK(demands[0].s == 0);
    CHECK(demands[1].t == 3);
    std::istringstream bad("conn 0 9\n");
    CHECK_THROWS_AS(load_traffic(bad, g), ParseError);
    std::istringstream same("conn 2 2\n");
    CHECK_THROWS_AS(load_traffic(same, g), ParseError);
}

TEST_CASE("k_connectivity basics and ring oracle") {
    Graph two;
    two.add_node(0);
    two.add_node(1);
    two.add_edge(0, 1, 1);
    CHECK(k_connectivity(two, 0, 1) == 1);

    Graph tri = ring(3);
    CHECK(k_connectivity(tri, 0, 1) == 2);
    CHECK(k_connectivity(tri, 1, 2) == 2);

    for (int n = 4; n <= 8; ++n) {
        Graph r = ring(n);
        for (int s = 0; s < n; ++s)
            for (int t = s + 1; t < n; ++t) {
                CHECK(k_connectivity(r, s, t) == 2);
                CHECK(k_connectivity(r, s, t) == count_disjoint_oracle(r, s, t));
            }
    }
    CHECK_THROWS_AS(k_connectivity(two, 0, 5), TopologyError);
}

TEST_CASE("k_connectivity is symmetric and capped by degree") {
    Graph g = ring(6);
    g.add_edge(0, 3, 1);
    g.add_edge(1, 4, 1);
    for (int s = 0; s < 6; ++s)
        for (int t = 0; t < 6; ++t) {
            if (s == t) continue;
            int k = k_connectivity(g, s, t);
            CHECK(k == k_connectivity(g, t, s));
            CHECK(k <= std::min(g.incident(s).size(), g.incident(t).size()));
            CHECK(k == count_disjoint_oracle(g, s, t));
        }
}

TEST_CASE("disjoint pair: trap graph needs joint optimization") {
    // Greedy shortest-then-remove fails here; the joint pair must avoid the
    // tempting middle path.
    Graph g;
    for (int i = 0; i < 4; ++i) g.add_node(i);
    g.add_edge(0, 1, 1);
    g.add_edge(1, 3, 1);
    g.add_edge(0, 2, 2);
    g.add_edge(2, 3, 2);
    g.add_edge(1, 2, 0.1);
    auto pr = disjoint_pair(g, 0, 3);
    REQUIRE(pr.has_value());
    double total = path_cost(g, pr->first) + path_cost(g, pr->second);
    CHECK(total == doctest::Approx(6.0));

    Graph chain;
    chain.add_node(0);
    chain.add_node(1);
    chain.add_node(2);
    chain.add_edge(0, 1, 1);
    chain.add_edge(1, 2, 1);
    CHECK_FALSE(disjoint_pair(chain, 0, 2).has_value());
}

TEST_CASE("enumeration: NSFNET walk from the provisioning example") {
    Graph g;
    for (int i : {3, 4, 5, 8, 10, 12}) g.add_node(i);
    g.add_edge(3, 4, 1);
    g.add_edge(4, 5, 1);
    g.add_edge(5, 8, 1);
    g.add_edge(8, 10, 1);
    g.add_edge(10, 12, 1);
    // Workings irrelevant for enumeration; leave unset.
    std::vector<Connection> conns{{1, 3, 12, {}}, {2, 4, 10, {}}};
    auto grp = ProtectionGroup::build(g, Walk{{3, 4, 5, 8, 10, 12}}, conns);
    CHECK(grp.side_s() == std::vector<int>{3, 4});
    CHECK(grp.side_t() == std::vector<int>{12, 10});  // T1 = 12, T2 = 10
    CHECK(grp.partner_of(3) == 12);
    CHECK(grp.partner_of(10) == 4);
    CHECK(grp.station_at(10).index == 2);
    CHECK_FALSE(grp.station_at(10).low_side);
}

TEST_CASE("enumeration: single connection and transit node") {
    Graph g;
    for (int i : {0, 1, 2}) g.add_node(i);
    g.add_edge(0, 1, 1);
    g.add_edge(1, 2, 1);
    auto grp = ProtectionGroup::build(g, Walk{{0, 1, 2}}, {{0, 0, 2, {}}});
    CHECK(grp.side_s() == std::vector<int>{0});
    CHECK(grp.side_t() == std::vector<int>{2});
    CHECK(grp.stations().size() == 2);
    CHECK(grp.segment(0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("enumeration: five-connection interleaved pattern") {
    // Station order along the walk: S1 S2 S3 S4 T5 S5 T4 T3 T2 T1 with
    // partners (S1,T2) (S2,T5) (S3,T1) (S4,T4) (S5,T3). Nodes are ids 0..9 in
    // walk order.
    Graph g;
    for (int i = 0; i < 10; ++i) g.add_node(i);
    for (int i = 0; i + 1 < 10; ++i) g.add_edge(i, i + 1, 1);
    std::vector<Connection> conns{
        {1, 0, 8, {}}, {2, 1, 4, {}}, {3, 2, 9, {}}, {4, 3, 6, {}}, {5, 5, 7, {}}};
    auto grp = ProtectionGroup::build(g, Walk{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}, conns);
    CHECK(grp.side_s() == std::vector<int>{0, 1, 2, 3, 5});
    CHECK(grp.side_t() == std::vector<int>{9, 8, 7, 6, 4});
    // The first far-side assignment is the highest index, partnered with S2.
    const Station& t5 = grp.station_at(4);
    CHECK_FALSE(t5.low_side);
    CHECK(t5.index == 5);
    CHECK(grp.partner_of(4) == 1);
    CHECK(grp.station_at(1).index == 2);
    // Successor maps: forward successor of S5 (node 5) is T4 (node 6).
    CHECK(grp.next_forward(5) == 6);
    CHECK(grp.prev_forward(4) == 3);   // sigma^-1(T5) = S4
    CHECK(grp.next_reverse(6) == 5);   // tau(T4) = S5
    CHECK(grp.prev_reverse(5) == 6);   // tau^-1(S5) = T4
    // Composing successor and predecessor is identity away from extremes.
    for (int node = 1; node <= 8; ++node) {
        CHECK(*grp.prev_forward(*grp.next_forward(node)) == node);
        CHECK(*grp.next_reverse(*grp.prev_reverse(node)) == node);
    }
    // Partner maps are mutually inverse.
    for (const Station& st : grp.stations()) CHECK(grp.partner_of(grp.partner_of(st.node)) == st.node);
}

TEST_CASE("enumeration: orientation picks the lower extreme") {
    Graph g;
    for (int i : {0, 1, 2}) g.add_node(i);
    g.add_edge(0, 1, 1);
    g.add_edge(1, 2, 1);
    auto grp = ProtectionGroup::build(g, Walk{{2, 1, 0}}, {{0, 0, 2, {}}});
    CHECK(grp.walk().nodes.front() == 0);
    CHECK(grp.side_s() == std::vector<int>{0});
}

TEST_CASE("enumeration errors") {
    Graph g;
    for (int i = 0; i < 5; ++i) g.add_node(i);
    for (int i = 0; i + 1 < 5; ++i) g.add_edge(i, i + 1, 1);
    // Endpoint 4 not on walk.
    CHECK_THROWS_AS(ProtectionGroup::build(g, Walk{{0, 1, 2}}, {{0, 0, 4, {}}}), TopologyError);
    // Shared endpoint across members.
    CHECK_THROWS_AS(
        ProtectionGroup::build(g, Walk{{0, 1, 2, 3}}, {{0, 0, 2, {}}, {1, 2, 3, {}}}),
        TopologyError);
    // Walk extremes must be end nodes.
    CHECK_THROWS_AS(ProtectionGroup::build(g, Walk{{0, 1, 2, 3}}, {{0, 1, 2, {}}}), TopologyError);
}

TEST_CASE("validate_group flags overlaps") {
    Graph g;
    for (int i = 0; i < 6; ++i) g.add_node(i);
    g.add_edge(0, 1, 1);  // working c0
    g.add_edge(2, 3, 1);  // working c1
    g.add_edge(0, 2, 1);
    g.add_edge(0, 3, 1);
    g.add_edge(1, 3, 1);
    std::vector<Connection> ok_conns{{0, 0, 1, {0, 1}}, {1, 2, 3, {2, 3}}};
    auto grp = ProtectionGroup::build(g, Walk{{2, 0, 3, 1}}, ok_conns);
    CHECK(validate_group(g, grp).empty());

    // Two workings on the same edge.
    Graph h;
    for (int i = 0; i < 6; ++i) h.add_node(i);
    h.add_edge(0, 4, 1);
    h.add_edge(4, 1, 1);
    h.add_edge(2, 4, 1);
    h.add_edge(4, 3, 1);
    h.add_edge(0, 2, 1);
    h.add_edge(0, 3, 1);
    h.add_edge(1, 3, 1);
    std::vector<Connection> clash{{0, 0, 1, {0, 4, 1}}, {1, 2, 3, {2, 4, 3}}};
    // Both workings cross node 4 but on different links: fine.
    auto grp2 = ProtectionGroup::build(h, Walk{{2, 0, 3, 1}}, clash);
    CHECK(validate_groups(h, std::vector<ProtectionGroup>{grp2}).empty());
    std::vector<Connection> clash2{{0, 0, 1, {0, 4, 1}}, {1, 2, 3, {2, 4, 0, 4, 3}}};
    // Second working reuses link (0,4): violation names the link.
    auto grp3 = ProtectionGroup::build(h, Walk{{2, 0, 3, 1}}, clash2);
    auto v = validate_group(h, grp3);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].kind == Violation::kWorkingOverlap);
    CHECK(to_string(v[0]).find("(0,4)") != std::string::npos);

    // Working sharing a link with its own protection walk.
    std::vector<Connection> on_walk{{0, 0, 1, {0, 3, 1}}, {1, 2, 3, {2, 4, 3}}};
    auto grp4 = ProtectionGroup::build(h, Walk{{2, 0, 3, 1}}, on_walk);
    auto v4 = validate_group(h, grp4);
    REQUIRE_FALSE(v4.empty());
    CHECK(v4[0].kind == Violation::kWalkWorkingOverlap);
}

TEST_CASE("validate_groups: paired walks must be disjoint, unpaired may share") {
    Graph g;
    for (int i = 0; i < 8; ++i) g.add_node(i);
    g.add_edge(0, 1, 1);
    g.add_edge(0, 2, 1);
    g.add_edge(2, 1, 1);
    g.add_edge(0, 3, 1);
    g.add_edge(3, 1, 1);
    std::vector<Connection> c{{0, 0, 1, {0, 1}}};
    auto g1 = ProtectionGroup::build(g, Walk{{0, 2, 1}}, c);
    auto g2 = ProtectionGroup::build(g, Walk{{0, 3, 1}}, c);
    CHECK(validate_groups(g, std::vector<ProtectionGroup>{g1, g2}).empty());
    auto g3 = ProtectionGroup::build(g, Walk{{0, 2, 1}}, c);
    auto vs = validate_groups(g, std::vector<ProtectionGroup>{g1, g3});
    REQUIRE_FALSE(vs.empty());
    CHECK(vs[0].kind == Violation::kPairedWalksOverlap);
}
