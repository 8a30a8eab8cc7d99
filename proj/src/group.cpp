#include "ncp/group.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ncp::topo {

namespace {

std::pair<int, int> pair_key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

std::string pair_str(std::pair<int, int> p) {
    return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

}  // namespace

ProtectionGroup ProtectionGroup::build(const Graph& g, Walk walk, std::vector<Connection> members) {
    ProtectionGroup out;
    if (walk.nodes.size() < 2) throw TopologyError("protection walk needs at least two nodes");
    if (members.empty()) throw TopologyError("protection group needs at least one connection");
    for (int n : walk.nodes) g.require_node(n, "walk node");

    // Endpoints must be distinct nodes across the group's members.
    std::map<int, int> endpoint_conn;
    for (const Connection& c : members) {
        if (c.a == c.b) throw TopologyError("connection endpoints must differ");
        for (int n : {c.a, c.b}) {
            if (!endpoint_conn.emplace(n, c.id).second)
                throw TopologyError("node " + std::to_string(n) +
                                    " is an end node of two connections in one group");
        }
    }

    if (walk.nodes.front() == walk.nodes.back())
        throw TopologyError("closed protection walks are not supported: extremes must differ");
    // The lower-id extreme leads; deterministic orientation.
    if (walk.nodes.back() < walk.nodes.front()) std::reverse(walk.nodes.begin(), walk.nodes.end());
    if (!endpoint_conn.count(walk.nodes.front()) || !endpoint_conn.count(walk.nodes.back()))
        throw TopologyError("walk extremes must be connection end nodes");

    // Traversal enumeration: first occurrence of each end node, ascending
    // indices while the partner is still unseen, descending after.
    const int n_conns = static_cast<int>(members.size());
    std::map<int, int> conn_index;
    for (int i = 0; i < n_conns; ++i) conn_index[members[i].id] = i;
    std::set<int> enumerated;
    std::vector<int> t_order;  // nodes in descending-index order of encounter
    int s_count = 0, t_count = 0;
    for (size_t pos = 0; pos < walk.nodes.size(); ++pos) {
        int node = walk.nodes[pos];
        auto it = endpoint_conn.find(node);
        if (it == endpoint_conn.end()) continue;
        if (enumerated.count(node)) continue;
        const Connection& c = members[conn_index[it->second]];
        int partner = (c.a == node) ? c.b : c.a;
        Station st;
        st.node = node;
        st.conn = c.id;
        if (!enumerated.count(partner)) {
            st.low_side = true;
            st.index = ++s_count;
        } else {
            st.low_side = false;
            st.index = n_conns - t_count;
            ++t_count;
        }
        enumerated.insert(node);
        out.by_node_[node] = static_cast<int>(out.stations_.size());
        out.stations_.push_back(st);
        out.station_walk_pos_.push_back(static_cast<int>(pos));
    }

    for (auto [node, conn] : endpoint_conn)
        if (!enumerated.count(node))
            throw TopologyError("end node " + std::to_string(node) + " of connection " +
                                std::to_string(conn) + " is not on the protection walk");
    if (s_count != n_conns || t_count != n_conns)
        throw TopologyError("invalid walk order: some connection has both endpoints on one side");

    out.side_s_.assign(n_conns, -1);
    out.side_t_.assign(n_conns, -1);
    for (const Station& st : out.stations_) {
        (st.low_side ? out.side_s_ : out.side_t_)[st.index - 1] = st.node;
    }
    for (const Connection& c : members) {
        out.partner_[c.a] = c.b;
        out.partner_[c.b] = c.a;
    }
    out.walk_ = std::move(walk);
    out.members_ = std::move(members);
    return out;
}

const Connection& ProtectionGroup::member(int conn_id) const {
    for (const Connection& c : members_)
        if (c.id == conn_id) return c;
    throw TopologyError("connection " + std::to_string(conn_id) + " is not in this group");
}

const Station& ProtectionGroup::station_at(int node) const {
    auto it = by_node_.find(node);
    if (it == by_node_.end())
        throw TopologyError("node " + std::to_string(node) + " is not a station of this group");
    return stations_[it->second];
}

int ProtectionGroup::partner_of(int node) const {
    auto it = partner_.find(node);
    if (it == partner_.end())
        throw TopologyError("node " + std::to_string(node) + " has no partner in this group");
    return it->second;
}

std::optional<int> ProtectionGroup::next_forward(int node) const {
    int i = by_node_.at(node);
    if (i + 1 >= static_cast<int>(stations_.size())) return std::nullopt;
    return stations_[i + 1].node;
}

std::optional<int> ProtectionGroup::prev_forward(int node) const {
    int i = by_node_.at(node);
    if (i == 0) return std::nullopt;
    return stations_[i - 1].node;
}

std::vector<int> ProtectionGroup::segment(int i) const {
    int a = station_walk_pos_[i];
    int b = station_walk_pos_[i + 1];
    return {walk_.nodes.begin() + a, walk_.nodes.begin() + b + 1};
}

namespace {

void count_hops(std::map<std::pair<int, int>, int>& uses, const std::vector<int>& nodes) {
    for (size_t i = 0; i + 1 < nodes.size(); ++i) ++uses[pair_key(nodes[i], nodes[i + 1])];
}

}  // namespace

std::vector<Violation> validate_group(const Graph& g, const ProtectionGroup& group) {
    std::vector<Violation> out;
    const auto& walk = group.walk().nodes;
    for (size_t i = 0; i + 1 < walk.size(); ++i)
        if (!g.adjacent(walk[i], walk[i + 1]))
            out.push_back({Violation::kWalkGap, "walk nodes " + std::to_string(walk[i]) + " and " +
                                                    std::to_string(walk[i + 1]) +
                                                    " are not adjacent"});

    std::map<std::pair<int, int>, int> working_uses;
    std::map<std::pair<int, int>, std::vector<int>> working_users;
    for (const Connection& c : group.members()) {
        // Either orientation of the stored path is fine.
        bool fwd = c.working.size() >= 2 && c.working.front() == c.a && c.working.back() == c.b;
        bool rev = c.working.size() >= 2 && c.working.front() == c.b && c.working.back() == c.a;
        if (!fwd && !rev) {
            out.push_back({Violation::kWorkingBroken,
                           "connection " + std::to_string(c.id) +
                               " has no working path between its end nodes"});
            continue;
        }
        bool broken = false;
        for (size_t i = 0; i + 1 < c.working.size(); ++i)
            if (!g.adjacent(c.working[i], c.working[i + 1])) {
                out.push_back({Violation::kWorkingBroken,
                               "working path of connection " + std::to_string(c.id) +
                                   " uses non-adjacent nodes " + std::to_string(c.working[i]) +
                                   "," + std::to_string(c.working[i + 1])});
                broken = true;
            }
        if (broken) continue;
        count_hops(working_uses, c.working);
        for (size_t i = 0; i + 1 < c.working.size(); ++i)
            working_users[pair_key(c.working[i], c.working[i + 1])].push_back(c.id);
    }

    std::map<std::pair<int, int>, int> walk_uses;
    count_hops(walk_uses, walk);

    // Parallel edges provide capacity: a link pair is over-used only when the
    // number of traversals exceeds the number of physical edges.
    for (const auto& [pr, uses] : working_uses) {
        int mult = g.multiplicity(pr.first, pr.second);
        if (uses > mult) {
            std::ostringstream ss;
            ss << "link " << pair_str(pr) << " carries working paths of connections";
            for (int id : working_users[pr]) ss << " " << id;
            out.push_back({Violation::kWorkingOverlap, ss.str()});
        } else if (walk_uses.count(pr) && uses + walk_uses[pr] > mult) {
            out.push_back({Violation::kWalkWorkingOverlap,
                           "link " + pair_str(pr) + " is shared by the protection walk and a "
                                                    "member working path"});
        }
    }
    return out;
}

std::vector<Violation> validate_groups(const Graph& g, std::span<const ProtectionGroup> groups) {
    std::vector<Violation> out;
    for (const auto& grp : groups) {
        auto v = validate_group(g, grp);
        out.insert(out.end(), v.begin(), v.end());
    }
    // Walks protecting the same connection must be link disjoint.
    for (size_t i = 0; i < groups.size(); ++i) {
        for (size_t j = i + 1; j < groups.size(); ++j) {
            bool share_conn = false;
            for (const Connection& c : groups[i].members())
                for (const Connection& d : groups[j].members()) share_conn |= (c.id == d.id);
            if (!share_conn) continue;
            std::map<std::pair<int, int>, int> a_uses, b_uses;
            count_hops(a_uses, groups[i].walk().nodes);
            count_hops(b_uses, groups[j].walk().nodes);
            for (const auto& [pr, ua] : a_uses) {
                auto it = b_uses.find(pr);
                if (it == b_uses.end()) continue;
                if (ua + it->second > g.multiplicity(pr.first, pr.second))
                    out.push_back({Violation::kPairedWalksOverlap,
                                   "walks " + std::to_string(i) + " and " + std::to_string(j) +
                                       " protect a common connection but share link " +
                                       pair_str(pr)});
            }
        }
    }
    return out;
}

std::string to_string(const Violation& v) {
    static const char* names[] = {"walk-gap",          "endpoint-missing",
                                  "working-overlap",   "walk-working-overlap",
                                  "paired-walks-overlap", "working-broken"};
    return std::string(names[v.kind]) + ": " + v.detail;
}

}  // namespace ncp::topo
