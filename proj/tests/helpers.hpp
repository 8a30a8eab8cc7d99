#pragma once

// Shared fixture builders for the test suites. The two hand-built networks
// mirror the worked examples the protocol analysis leans on: the ten-node
// five-connection interleaved group, and the three-walk multi-failure
// network with its bipartite recovery structure.

#include <vector>

#include "ncp/coeffs.hpp"
#include "ncp/graph.hpp"
#include "ncp/group.hpp"

namespace fixtures {

struct Net {
    ncp::topo::Graph g;
    std::vector<ncp::topo::ProtectionGroup> groups;
    std::vector<int> conn_ids;
    ncp::coding::Mask mask;
};

/// Ten nodes on one walk 0..9, five connections with single-edge workings:
/// partner pairs (0,8) (1,4) (2,9) (3,6) (5,7). Station order along the walk
/// interleaves the two sides; node 5's partner is node 7.
inline Net interleaved10() {
    using namespace ncp;
    Net net;
    for (int i = 0; i < 10; ++i) net.g.add_node(i);
    for (int i = 0; i + 1 < 10; ++i) net.g.add_edge(i, i + 1, 1.0);
    const std::vector<std::pair<int, int>> pairs{{0, 8}, {1, 4}, {2, 9}, {3, 6}, {5, 7}};
    std::vector<topo::Connection> conns;
    for (size_t i = 0; i < pairs.size(); ++i) {
        net.g.add_edge(pairs[i].first, pairs[i].second, 1.0);
        conns.push_back({static_cast<int>(i + 1), pairs[i].first, pairs[i].second,
                         {pairs[i].first, pairs[i].second}});
        net.conn_ids.push_back(static_cast<int>(i + 1));
    }
    net.groups.push_back(
        topo::ProtectionGroup::build(net.g, topo::Walk{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}, conns));
    net.mask = ncp::coding::mask_from_groups(net.groups, net.conn_ids);
    return net;
}

/// Three connections, three walks: walk 0 protects {c2, c5}, walks 1 and 2
/// protect {c2, c6}. Connection c5 hangs on a single walk, which is what the
/// triple-failure pattern exploits.
inline Net threewalk() {
    using namespace ncp;
    Net net;
    for (int i = 0; i < 9; ++i) net.g.add_node(i);
    // Workings: c2 = 0-1, c5 = 2-3, c6 = 4-5.
    net.g.add_edge(0, 1, 1.0);
    net.g.add_edge(2, 3, 1.0);
    net.g.add_edge(4, 5, 1.0);
    // Walk 0 through {2,0,3,1}, walk 1 through {4,0,5,1}, walk 2 through
    // {5,6,0,7,4,8,1}; pairwise link-disjoint where they co-protect.
    net.g.add_edge(2, 0, 1.0);
    net.g.add_edge(0, 3, 1.0);
    net.g.add_edge(3, 1, 1.0);
    net.g.add_edge(4, 0, 1.0);
    net.g.add_edge(0, 5, 1.0);
    net.g.add_edge(5, 1, 1.0);
    net.g.add_edge(5, 6, 1.0);
    net.g.add_edge(6, 0, 1.0);
    net.g.add_edge(0, 7, 1.0);
    net.g.add_edge(7, 4, 1.0);
    net.g.add_edge(4, 8, 1.0);
    net.g.add_edge(8, 1, 1.0);

    topo::Connection c2{2, 0, 1, {0, 1}};
    topo::Connection c5{5, 2, 3, {2, 3}};
    topo::Connection c6{6, 4, 5, {4, 5}};
    net.conn_ids = {2, 5, 6};
    net.groups.push_back(topo::ProtectionGroup::build(net.g, topo::Walk{{2, 0, 3, 1}}, {c2, c5}));
    net.groups.push_back(topo::ProtectionGroup::build(net.g, topo::Walk{{4, 0, 5, 1}}, {c2, c6}));
    net.groups.push_back(
        topo::ProtectionGroup::build(net.g, topo::Walk{{5, 6, 0, 7, 4, 8, 1}}, {c2, c6}));
    net.mask = ncp::coding::mask_from_groups(net.groups, net.conn_ids);
    return net;
}

}  // namespace fixtures
