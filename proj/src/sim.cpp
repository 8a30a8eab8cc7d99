#include "ncp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace ncp::sim {

void LinkSchedule::set_delay(int u, int v, int slots) {
    if (slots < 1) throw SimError("link delay must be at least one slot");
    delay_[key(u, v)] = slots;
}

void LinkSchedule::fail_link(int u, int v, long from, long to) {
    if (from < 0 || to < from) throw SimError("bad failure span");
    link_fail_[key(u, v)].push_back({from, to});
}

void LinkSchedule::fail_walk(int group, long from, long to) {
    if (from < 0 || to < from) throw SimError("bad failure span");
    walk_fail_[group].push_back({from, to});
}

int LinkSchedule::delay(int u, int v) const {
    auto it = delay_.find(key(u, v));
    return it == delay_.end() ? 1 : it->second;
}

bool LinkSchedule::link_failed(int u, int v, long round) const {
    auto it = link_fail_.find(key(u, v));
    if (it == link_fail_.end()) return false;
    for (const FailSpan& s : it->second)
        if (s.covers(round)) return true;
    return false;
}

bool LinkSchedule::walk_failed(int group, long round) const {
    auto it = walk_fail_.find(group);
    if (it == walk_fail_.end()) return false;
    for (const FailSpan& s : it->second)
        if (s.covers(round)) return true;
    return false;
}

long LinkSchedule::path_delay(std::span<const int> nodes) const {
    long d = 0;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) d += delay(nodes[i], nodes[i + 1]);
    return d;
}

bool LinkSchedule::path_failed(std::span<const int> nodes, long round) const {
    for (size_t i = 0; i + 1 < nodes.size(); ++i)
        if (link_failed(nodes[i], nodes[i + 1], round)) return true;
    return false;
}

namespace {

long ceil_div_time(double numer, double unit_time) {
    return static_cast<long>(std::ceil(numer / unit_time - 1e-9));
}

int bits_for(long n) {
    int b = 0;
    while ((1l << b) < n) ++b;
    return b;
}

uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

RoundBound round_number_bound(double chi_p, double unit_bits, double capacity) {
    if (chi_p <= 0 || unit_bits <= 0 || capacity <= 0)
        throw SimError("round_number_bound: all inputs must be positive");
    long a = ceil_div_time(chi_p, unit_bits / capacity);
    return {a, bits_for(2 * a)};
}

BufferBounds buffer_bounds(double chi_p, std::span<const double> chi_w, double unit_bits,
                           double capacity) {
    if (chi_w.empty()) throw SimError("buffer_bounds: need at least one working delay");
    if (chi_p <= 0 || unit_bits <= 0 || capacity <= 0)
        throw SimError("buffer_bounds: all inputs must be positive");
    double mx = *std::max_element(chi_w.begin(), chi_w.end());
    double mn = *std::min_element(chi_w.begin(), chi_w.end());
    double unit_time = unit_bits / capacity;
    return {ceil_div_time(chi_p + mx, unit_time), ceil_div_time(chi_p + mx - mn, unit_time)};
}

std::optional<DataUnit> encode_combine(const gf::Field& f, DataUnit incoming, DataUnit own,
                                       DataUnit received, uint16_t alpha) {
    if (incoming.round != own.round || own.round != received.round) return std::nullopt;
    uint16_t term = f.mul(alpha, f.add(own.payload, received.payload));
    return DataUnit{f.add(incoming.payload, term), incoming.round};
}

std::optional<std::pair<DataUnit, DataUnit>> encode_at_s(const gf::Field& f, DataUnit incoming_y,
                                                         DataUnit incoming_z, DataUnit own_d,
                                                         DataUnit received_u, uint16_t alpha) {
    auto y = encode_combine(f, incoming_y, own_d, received_u, alpha);
    auto z = encode_combine(f, incoming_z, own_d, received_u, alpha);
    if (!y || !z) return std::nullopt;
    return std::make_pair(*y, *z);
}

std::optional<std::pair<DataUnit, DataUnit>> encode_at_t(const gf::Field& f, DataUnit incoming_y,
                                                         DataUnit incoming_z, DataUnit own_u,
                                                         DataUnit received_d, uint16_t alpha) {
    return encode_at_s(f, incoming_y, incoming_z, own_u, received_d, alpha);
}

DecodeResult decode(const gf::Field& f, std::span<const WalkObservation> obs,
                    const coding::CoeffMatrix& coeffs, int own_col, uint16_t own_generated,
                    bool own_failed) {
    for (const WalkObservation& o : obs)
        if (o.y_in.round != o.z_in.round || (obs.size() && o.y_in.round != obs[0].y_in.round))
            throw SimError("decode: observations mix rounds");

    if (!own_failed) {
        // Cross-check: on a walk with no failed members, y+z collapses to the
        // partner's term and p_k = alpha * u.
        for (const WalkObservation& o : obs) {
            if (!o.failed_cols.empty()) continue;
            uint16_t alpha = coeffs.alpha(o.walk, own_col);
            uint16_t p = f.add(f.add(o.y_in.payload, o.z_in.payload),
                               f.mul(alpha, own_generated));
            return {DecodeStatus::kRecovered, f.mul(f.inv(alpha), p)};
        }
        return {DecodeStatus::kInsufficient, 0};
    }

    // Unknowns: one (d + u) variable per failed connection seen by any walk.
    std::set<int> unknown_set;
    for (const WalkObservation& o : obs) unknown_set.insert(o.failed_cols.begin(), o.failed_cols.end());
    unknown_set.insert(own_col);
    std::vector<int> unknowns(unknown_set.begin(), unknown_set.end());
    int own_idx = static_cast<int>(
        std::find(unknowns.begin(), unknowns.end(), own_col) - unknowns.begin());

    gf::Matrix a(f, static_cast<int>(obs.size()), static_cast<int>(unknowns.size()));
    std::vector<uint16_t> rhs(obs.size());
    for (size_t r = 0; r < obs.size(); ++r) {
        const WalkObservation& o = obs[r];
        for (int c : o.failed_cols) {
            int idx = static_cast<int>(std::find(unknowns.begin(), unknowns.end(), c) -
                                       unknowns.begin());
            a.at(static_cast<int>(r), idx) = coeffs.alpha(o.walk, c);
        }
        rhs[r] = f.add(f.add(o.y_in.payload, o.z_in.payload),
                       f.mul(coeffs.alpha(o.walk, own_col), own_generated));
    }
    auto x = gf::extract_coordinate(a, rhs, own_idx);
    if (x) return {DecodeStatus::kRecovered, f.add(*x, own_generated)};
    return {obs.size() < unknowns.size() ? DecodeStatus::kInsufficient : DecodeStatus::kSingular,
            0};
}

uint16_t truth_unit(const gf::Field& f, uint64_t seed, int conn, int node, long round) {
    uint64_t h = mix(seed ^ mix(static_cast<uint64_t>(conn) << 32 |
                                (static_cast<uint64_t>(node) & 0xffffffffull)));
    h = mix(h ^ static_cast<uint64_t>(round));
    return static_cast<uint16_t>(h % f.size());
}

namespace {

struct Combo {
    uint16_t payload;
    long round;
};

struct DirState {
    std::deque<Combo> buf;             // arrived, not yet recombined and sent
    std::map<long, uint16_t> seen;     // incoming signal per round, kept for decode
    long peak = 0;
};

struct UnitBuf {
    std::map<long, uint16_t> units;
    std::map<long, int> uses_left;
    long peak = 0;

    void put(long r, uint16_t v, int uses) {
        units[r] = v;
        uses_left[r] = uses;
    }
    void consume(long r) {
        auto it = uses_left.find(r);
        if (it == uses_left.end()) return;
        if (--it->second <= 0) {
            uses_left.erase(it);
            units.erase(r);
        }
    }
    void snapshot() { peak = std::max(peak, static_cast<long>(units.size())); }
};

struct PrimaryMsg {
    int conn;
    int to_node;
    Combo unit;
};

struct ProtMsg {
    int group, dir, station;
    Combo unit;
};

}  // namespace

SimReport run(const topo::Graph& g, std::span<const topo::ProtectionGroup> groups,
              const std::vector<int>& conn_ids, const coding::CoeffMatrix& coeffs,
              const LinkSchedule& sched, long rounds, uint64_t seed, SignalProbe* probe) {
    const gf::Field& f = coeffs.a.field();
    const int n_groups = static_cast<int>(groups.size());
    if (coeffs.a.rows() != n_groups || coeffs.a.cols() != static_cast<int>(conn_ids.size()))
        throw SimError("coefficient matrix shape does not match groups/connections");

    std::map<int, int> col_of;
    for (size_t i = 0; i < conn_ids.size(); ++i) col_of[conn_ids[i]] = static_cast<int>(i);

    // Connection records, shared across the groups protecting them.
    struct ConnInfo {
        int id, a, b;
        std::vector<int> working;
        long chi_w;
        std::vector<int> in_groups;
    };
    std::map<int, ConnInfo> conns;
    for (int k = 0; k < n_groups; ++k) {
        for (const topo::Connection& c : groups[k].members()) {
            if (!col_of.count(c.id)) throw SimError("group protects a connection missing from conn_ids");
            auto [it, fresh] = conns.try_emplace(c.id);
            ConnInfo& ci = it->second;
            if (fresh) {
                if (c.working.size() < 2)
                    throw SimError("connection " + std::to_string(c.id) + " has no working path");
                ci = {c.id, c.a, c.b, c.working, sched.path_delay(c.working), {}};
            }
            ci.in_groups.push_back(k);
        }
    }
    for (int id : conn_ids)
        if (!conns.count(id))
            throw SimError("connection " + std::to_string(id) + " is not protected by any group");

    // Per-group geometry.
    struct GroupGeo {
        std::vector<int> station_nodes;
        std::vector<std::vector<int>> seg_nodes;  // forward segments
        std::vector<long> seg_delay;
        long walk_delay;
    };
    std::vector<GroupGeo> geo(n_groups);
    for (int k = 0; k < n_groups; ++k) {
        const auto& grp = groups[k];
        GroupGeo& ge = geo[k];
        for (const topo::Station& st : grp.stations()) ge.station_nodes.push_back(st.node);
        for (int i = 0; i < grp.segment_count(); ++i) {
            ge.seg_nodes.push_back(grp.segment(i));
            ge.seg_delay.push_back(sched.path_delay(ge.seg_nodes.back()));
        }
        ge.walk_delay = sched.path_delay(grp.walk().nodes);
        for (const topo::Connection& c : grp.members())
            if (conns[c.id].chi_w >= ge.walk_delay)
                throw SimError("working path of connection " + std::to_string(c.id) +
                               " is not faster than its protection walk (chi_w < chi_p required)");
    }
    auto walk_intact = [&](int k, long r) {
        return !sched.walk_failed(k, r) && !sched.path_failed(groups[k].walk().nodes, r);
    };

    long max_walk = 0, max_chi = 0;
    for (const GroupGeo& ge : geo) max_walk = std::max(max_walk, ge.walk_delay);
    for (auto& [id, ci] : conns) max_chi = std::max(max_chi, ci.chi_w);
    const long horizon = rounds + 3 * (max_walk + max_chi) + 8;

    // State: direction buffers per (group, dir, station); unit buffers per
    // (node, conn); arrival buckets per slot.
    std::map<std::tuple<int, int, int>, DirState> dirs;
    std::map<std::pair<int, int>, UnitBuf> tx, rx;
    std::vector<std::vector<PrimaryMsg>> prim_arr(horizon + 1);
    std::vector<std::vector<ProtMsg>> prot_arr(horizon + 1);
    std::map<std::tuple<int, int, int>, std::map<long, long>> processed;  // slot per round
    struct Decoded {
        DecodeStatus status = DecodeStatus::kPending;
        uint16_t value = 0;
        long slot = -1;
        int binding_group = -1;  // walk whose signal completed the recovery
    };
    std::map<std::pair<int, int>, std::map<long, Decoded>> decoded;  // (conn, node)
    struct Pending {
        std::vector<WalkObservation> obs;  // collected so far, completion order
        std::set<int> have;                // walk ids already collected
    };
    std::map<std::pair<int, int>, std::map<long, Pending>> pending;
    std::map<std::pair<int, int>, long> admit_upto;  // rounds admitted to pending
    std::map<int, std::map<long, long>> collected;   // group -> round -> last obs pickup slot

    auto station_index = [&](int k, int node) {
        const auto& sn = geo[k].station_nodes;
        return static_cast<int>(std::find(sn.begin(), sn.end(), node) - sn.begin());
    };

    for (long t = 0; t <= horizon; ++t) {
        // Deliveries.
        for (const PrimaryMsg& m : prim_arr[t]) {
            int uses = 0;
            for (int k : conns[m.conn].in_groups) {
                int idx = station_index(k, m.to_node);
                int last = static_cast<int>(geo[k].station_nodes.size()) - 1;
                uses += (idx == 0 || idx == last) ? 1 : 2;
            }
            rx[{m.to_node, m.conn}].put(m.unit.round, m.unit.payload, uses);
        }
        for (const ProtMsg& m : prot_arr[t]) {
            DirState& ds = dirs[{m.group, m.dir, m.station}];
            int node = geo[m.group].station_nodes[m.station];
            int conn = groups[m.group].station_at(node).conn;
            // A signal for an already-settled round has no further use.
            if (!decoded[{conn, node}].count(m.unit.round)) ds.seen[m.unit.round] = m.unit.payload;
            int last = static_cast<int>(geo[m.group].station_nodes.size()) - 1;
            bool terminal = (m.dir == 0) ? (m.station == last) : (m.station == 0);
            if (terminal)
                processed[{m.group, m.dir, m.station}][m.unit.round] = t;
            else
                ds.buf.push_back(m.unit);
        }

        // Generation: each endpoint emits one unit per round on its primary
        // path and, where it originates a protection direction, a fresh
        // zero combination to extend.
        if (t < rounds) {
            for (auto& [id, ci] : conns) {
                for (int node : {ci.a, ci.b}) {
                    int partner = (node == ci.a) ? ci.b : ci.a;
                    uint16_t unit = truth_unit(f, seed, id, node, t);
                    // An extreme station combines in one direction only; it
                    // terminates the other.
                    auto enc_uses = [&](int at_node) {
                        int uses = 0;
                        for (int k : ci.in_groups) {
                            int idx = station_index(k, at_node);
                            int last = static_cast<int>(geo[k].station_nodes.size()) - 1;
                            uses += (idx == 0 || idx == last) ? 1 : 2;
                        }
                        return uses;
                    };
                    tx[{node, id}].put(t, unit, enc_uses(node) + 1);  // +1: decode
                    uint16_t delivered = sched.path_failed(ci.working, t) ? 0 : unit;
                    long at = t + ci.chi_w;
                    if (at <= horizon)
                        prim_arr[at].push_back({id, partner, {delivered, t}});
                    for (int k : ci.in_groups) {
                        int idx = station_index(k, node);
                        int last = static_cast<int>(geo[k].station_nodes.size()) - 1;
                        if (idx == 0) {
                            DirState& ds = dirs[{k, 0, 0}];
                            ds.seen[t] = 0;
                            ds.buf.push_back({0, t});
                        }
                        if (idx == last) {
                            DirState& ds = dirs[{k, 1, last}];
                            ds.seen[t] = 0;
                            ds.buf.push_back({0, t});
                        }
                    }
                }
            }
        }

        // Head-of-buffer processing: one combination per direction per slot.
        for (int k = 0; k < n_groups; ++k) {
            int last = static_cast<int>(geo[k].station_nodes.size()) - 1;
            for (int dir = 0; dir < 2; ++dir) {
                for (int si = 0; si <= last; ++si) {
                    bool terminal = (dir == 0) ? (si == last) : (si == 0);
                    if (terminal) continue;
                    DirState& ds = dirs[{k, dir, si}];
                    if (ds.buf.empty()) continue;
                    Combo head = ds.buf.front();
                    int node = geo[k].station_nodes[si];
                    int conn = groups[k].station_at(node).conn;
                    auto& rxb = rx[{node, conn}];
                    auto rit = rxb.units.find(head.round);
                    if (rit == rxb.units.end()) continue;  // stall: wait, never corrupt
                    uint16_t own = tx[{node, conn}].units.at(head.round);
                    uint16_t alpha = coeffs.alpha(k, col_of[conn]);
                    uint16_t out = f.add(head.payload, f.mul(alpha, f.add(own, rit->second)));
                    int nsi = (dir == 0) ? si + 1 : si - 1;
                    int seg = std::min(si, nsi);
                    long at = t + geo[k].seg_delay[seg];
                    uint16_t carried =
                        sched.path_failed(geo[k].seg_nodes[seg], head.round) ? 0 : out;
                    if (at <= horizon) prot_arr[at].push_back({k, dir, nsi, {carried, head.round}});
                    processed[{k, dir, si}][head.round] = t;
                    ds.buf.pop_front();
                    rxb.consume(head.round);
                    tx[{node, conn}].consume(head.round);
                }
            }
        }

        // Decode attempts. Eager per the instantaneous-recovery goal: a node
        // solves as soon as the walks heard from so far pin down its unknown,
        // rather than waiting for every protecting walk.
        for (auto& [id, ci] : conns) {
            for (int node : {ci.a, ci.b}) {
                auto key = std::make_pair(id, node);
                long& admitted = admit_upto[key];
                while (admitted < rounds && admitted <= t) pending[key][admitted++];
                auto& rounds_pending = pending[key];
                for (auto pit = rounds_pending.begin(); pit != rounds_pending.end();) {
                    long r = pit->first;
                    Pending& pd = pit->second;
                    int intact_count = 0;
                    int arrived_this_slot = -1;
                    for (int k : ci.in_groups) {
                        if (!walk_intact(k, r)) continue;
                        ++intact_count;
                        if (pd.have.count(k)) continue;
                        int si = station_index(k, node);
                        DirState& fs = dirs[{k, 0, si}];
                        DirState& rs = dirs[{k, 1, si}];
                        auto yi = fs.seen.find(r);
                        auto zi = rs.seen.find(r);
                        if (yi == fs.seen.end() || zi == rs.seen.end()) continue;
                        WalkObservation o;
                        o.walk = k;
                        o.y_in = {yi->second, r};
                        o.z_in = {zi->second, r};
                        if (probe) probe->yz[{k, node, r}] = {yi->second, zi->second};
                        for (const topo::Connection& mc : groups[k].members())
                            if (sched.path_failed(conns[mc.id].working, r))
                                o.failed_cols.push_back(col_of[mc.id]);
                        pd.obs.push_back(std::move(o));
                        pd.have.insert(k);
                        arrived_this_slot = k;
                        // The walk's job for this round ends here: its pair
                        // of signals is copied out, so its round window
                        // closes at pickup.
                        fs.seen.erase(yi);
                        rs.seen.erase(zi);
                        auto& cslot = collected[k][r];
                        cslot = std::max(cslot, t);
                    }
                    bool complete = static_cast<int>(pd.have.size()) == intact_count;
                    bool own_failed = sched.path_failed(ci.working, r);
                    DecodeResult dr = decode(f, pd.obs, coeffs, col_of[id],
                                             tx[{node, id}].units.at(r), own_failed);
                    bool done = dr.status == DecodeStatus::kRecovered || complete;
                    if (!done) {
                        ++pit;
                        continue;
                    }
                    int binding = dr.status == DecodeStatus::kRecovered ? arrived_this_slot : -1;
                    decoded[key][r] = {dr.status, dr.value, t, binding};
                    tx[{node, id}].consume(r);
                    pit = rounds_pending.erase(pit);
                }
            }
        }

        // End-of-slot occupancy snapshot: a unit consumed within a slot no
        // longer occupies its buffer at the slot boundary.
        for (auto& [kk, ds] : dirs) ds.peak = std::max(ds.peak, static_cast<long>(ds.buf.size()));
        for (auto& [kk, ub] : tx) ub.snapshot();
        for (auto& [kk, ub] : rx) ub.snapshot();
    }

    // Assemble the report.
    SimReport rep;
    rep.rounds = rounds;
    rep.seed = seed;
    for (int id : conn_ids) {
        ConnInfo& ci = conns[id];
        for (long r = 0; r < rounds; ++r) {
            ConnRound cr;
            cr.conn = id;
            cr.round = r;
            cr.primary_ok = !sched.path_failed(ci.working, r);
            auto fill = [&](int node, EndpointOutcome& eo) {
                eo.node = node;
                auto it = decoded[{id, node}].find(r);
                if (it == decoded[{id, node}].end())
                    throw SimError("simulation did not quiesce: round " + std::to_string(r) +
                                   " undecoded at node " + std::to_string(node));
                eo.status = it->second.status;
                eo.decode_slot = it->second.slot;
                int partner = (node == ci.a) ? ci.b : ci.a;
                eo.value_ok = it->second.status == DecodeStatus::kRecovered &&
                              it->second.value == truth_unit(f, seed, id, partner, r);
            };
            fill(ci.a, cr.end_a);
            fill(ci.b, cr.end_b);
            cr.recovered = cr.end_a.value_ok && cr.end_b.value_ok;
            cr.latency = std::max(cr.end_a.decode_slot, cr.end_b.decode_slot) - r;
            if (!cr.primary_ok && !cr.recovered) rep.all_expected_recovered = false;
            rep.per_round.push_back(cr);
        }
    }

    for (int k = 0; k < n_groups; ++k) {
        GroupStats gs;
        gs.group = k;
        gs.walk_delay = geo[k].walk_delay;
        RoundBound rb = round_number_bound(static_cast<double>(geo[k].walk_delay), 1.0, 1.0);
        gs.round_bound_a = rb.a;
        gs.round_field_bits = rb.field_bits;
        std::vector<double> chi;
        for (const topo::Connection& c : groups[k].members())
            chi.push_back(static_cast<double>(conns[c.id].chi_w));
        BufferBounds bb = buffer_bounds(static_cast<double>(geo[k].walk_delay), chi, 1.0, 1.0);
        gs.fs_ft_bound = bb.tx_and_path_buffers;
        gs.rx_bound = bb.rx;

        // Lifetime of a round within this group's pipeline: generation to the
        // last combining step or signal pickup that references it.
        std::vector<long> settle(static_cast<size_t>(std::max(rounds, 0l)), 0);
        for (long r = 0; r < rounds; ++r) settle[r] = r;
        for (auto& [kk, slots] : processed) {
            if (std::get<0>(kk) != k) continue;
            for (auto& [r, s] : slots)
                if (r < rounds) settle[r] = std::max(settle[r], s);
        }
        for (auto& [r, s] : collected[k])
            if (r < rounds) settle[r] = std::max(settle[r], s);
        gs.max_latency = 0;
        for (const topo::Connection& c : groups[k].members()) {
            for (int node : {c.a, c.b}) {
                for (auto& [r, d] : decoded[{c.id, node}]) {
                    if (r >= rounds) continue;
                    // Latency charged to the walk whose signal closed the
                    // system; a slower sibling walk is not this walk's delay.
                    if (d.binding_group == k)
                        gs.max_latency = std::max(gs.max_latency, d.slot - r);
                }
            }
        }
        // Sweep: at each slot boundary count rounds generated but unsettled.
        gs.max_inflight_rounds = 0;
        std::vector<std::pair<long, int>> events;
        for (long r = 0; r < rounds; ++r) {
            events.push_back({r, +1});
            events.push_back({settle[r] + 1, -1});
        }
        std::sort(events.begin(), events.end());
        long cur = 0;
        for (auto& [slot, delta] : events) {
            cur += delta;
            gs.max_inflight_rounds = std::max(gs.max_inflight_rounds, cur);
        }
        rep.groups.push_back(gs);
    }

    for (int k = 0; k < n_groups; ++k) {
        int last = static_cast<int>(geo[k].station_nodes.size()) - 1;
        for (int si = 0; si <= last; ++si) {
            BufferPeaks bp{};
            bp.node = geo[k].station_nodes[si];
            bp.group = k;
            bp.conn = -1;
            bp.fwd = dirs.count({k, 0, si}) ? dirs[{k, 0, si}].peak : 0;
            bp.rev = dirs.count({k, 1, si}) ? dirs[{k, 1, si}].peak : 0;
            rep.peaks.push_back(bp);
        }
    }
    for (auto& [key, ub] : tx) {
        BufferPeaks bp{};
        bp.node = key.first;
        bp.group = -1;
        bp.conn = key.second;
        bp.tx = ub.peak;
        bp.rx = rx.count(key) ? rx[key].peak : 0;
        rep.peaks.push_back(bp);
    }
    return rep;
}

}  // namespace ncp::sim
