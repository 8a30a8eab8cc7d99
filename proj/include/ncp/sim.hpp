#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ncp/coeffs.hpp"
#include "ncp/gf.hpp"
#include "ncp/group.hpp"

namespace ncp::sim {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One fixed-size data unit: a field element stamped with the round it was
/// generated in. The stamp is set once and never rewritten; a failed link
/// zeroes the payload but the stamp survives (the protocol needs round
/// alignment to proceed).
struct DataUnit {
    uint16_t payload = 0;
    long round = 0;
};

struct FailSpan {
    long from = 0;
    long to = std::numeric_limits<long>::max();
    bool covers(long r) const { return r >= from && r <= to; }
};

/// Per-link propagation delays (whole time slots, >= 1) and failure windows.
/// Failures are keyed by round number: a unit of round r crossing a link
/// failed for r arrives as zeroes.
class LinkSchedule {
public:
    void set_delay(int u, int v, int slots);
    void fail_link(int u, int v, long from, long to = std::numeric_limits<long>::max());
    void fail_walk(int group, long from, long to = std::numeric_limits<long>::max());

    int delay(int u, int v) const;
    bool link_failed(int u, int v, long round) const;
    bool walk_failed(int group, long round) const;

    long path_delay(std::span<const int> nodes) const;
    bool path_failed(std::span<const int> nodes, long round) const;

private:
    static std::pair<int, int> key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }
    std::map<std::pair<int, int>, int> delay_;
    std::map<std::pair<int, int>, std::vector<FailSpan>> link_fail_;
    std::map<int, std::vector<FailSpan>> walk_fail_;
};

struct RoundBound {
    long a;          // distinct round numbers needed, upper half of the 2a bound
    int field_bits;  // ceil(log2(2a))
};

/// a = ceil(chi_p / (unit_bits / capacity)); the protocol needs at most 2a
/// distinct round numbers in flight, hence ceil(log2(2a)) header bits.
/// Time and capacity in any consistent units.
RoundBound round_number_bound(double chi_p, double unit_bits, double capacity);

struct BufferBounds {
    long tx_and_path_buffers;  // transmit buffer and both direction buffers
    long rx;
};

/// The two closed-form buffer ceilings: (chi_p + max chi_w) and
/// (chi_p + max chi_w - min chi_w), each divided by the unit transmission
/// time and rounded up.
BufferBounds buffer_bounds(double chi_p, std::span<const double> chi_w, double unit_bits,
                           double capacity);

/// One encoding step: adds alpha * (own + received) to the incoming
/// combination. Returns nullopt when the three round stamps disagree (the
/// caller must wait, not corrupt).
std::optional<DataUnit> encode_combine(const gf::Field& f, DataUnit incoming, DataUnit own,
                                       DataUnit received, uint16_t alpha);

/// The per-node protocol step at a near-side node: both direction outputs add
/// alpha * (d + u_hat) to the respective incoming signal. With alpha = 1 this
/// is the plain single-failure scheme.
std::optional<std::pair<DataUnit, DataUnit>> encode_at_s(const gf::Field& f, DataUnit incoming_y,
                                                         DataUnit incoming_z, DataUnit own_d,
                                                         DataUnit received_u, uint16_t alpha);
/// Mirror step at a far-side node with (d_hat + u).
std::optional<std::pair<DataUnit, DataUnit>> encode_at_t(const gf::Field& f, DataUnit incoming_y,
                                                         DataUnit incoming_z, DataUnit own_u,
                                                         DataUnit received_d, uint16_t alpha);

enum class DecodeStatus {
    kRecovered,     // unique value extracted
    kInsufficient,  // fewer independent equations than the unknown needs
    kSingular,      // enough equations but the unknown is undetermined:
                    // a coefficient-assignment defect
    kPending,       // signals not yet available (simulation bookkeeping)
};

/// What one node sees from one intact protection walk for one round.
struct WalkObservation {
    int walk;                      // row in the coefficient matrix
    DataUnit y_in, z_in;           // signals received on the two directions
    std::vector<int> failed_cols;  // columns of failed connections this walk protects
};

struct DecodeResult {
    DecodeStatus status;
    uint16_t value = 0;  // the partner's data unit when recovered
};

/// Recovery at one node: forms p_k = y_in + z_in + alpha_own * own_generated
/// per observed walk, treats each failed connection's (d + u) as one unknown,
/// and extracts the own unknown; subtracting the locally generated unit
/// yields the partner's. With own connection intact this degenerates to the
/// cross-check u = alpha^-1 * p_k on any walk free of failures.
DecodeResult decode(const gf::Field& f, std::span<const WalkObservation> obs,
                    const coding::CoeffMatrix& coeffs, int own_col, uint16_t own_generated,
                    bool own_failed);

struct EndpointOutcome {
    int node = -1;
    DecodeStatus status = DecodeStatus::kPending;
    bool value_ok = false;
    long decode_slot = -1;
};

struct ConnRound {
    int conn;  // connection id
    long round;
    bool primary_ok;   // working path delivered intact payloads both ways
    bool recovered;    // both endpoints extracted the true unit via protection
    long latency;      // slots from generation to the later decode, -1 if undecoded
    EndpointOutcome end_a, end_b;
};

struct GroupStats {
    int group;
    long walk_delay;     // chi_p in slots
    long round_bound_a;  // = walk_delay with unit time 1
    int round_field_bits;
    long max_inflight_rounds;
    long fs_ft_bound;
    long rx_bound;
    long max_latency;  // worst decode latency over member endpoints
};

struct BufferPeaks {
    int node;
    int group;       // -1 for the per-connection tx/rx rows
    int conn;        // -1 for the per-group direction-buffer rows
    long fwd, rev;   // direction buffer peaks
    long tx, rx;     // generated-unit and primary-receive peaks
};

struct SimReport {
    long rounds = 0;
    uint64_t seed = 0;
    std::vector<ConnRound> per_round;  // exactly one entry per (conn, round)
    std::vector<BufferPeaks> peaks;
    std::vector<GroupStats> groups;
    bool all_expected_recovered = true;  // every failed primary was decoded by both ends
};

/// Optional tap: the (y_in, z_in) pair each station observed per round on
/// each intact walk, keyed by (group, node, round). Filled at decode time.
struct SignalProbe {
    std::map<std::tuple<int, int, long>, std::pair<uint16_t, uint16_t>> yz;
};

/// Deterministic slot-by-slot execution. Preconditions: groups validated,
/// every member carries a working path, the coefficient matrix covers all
/// groups (rows) and connections (columns in conn_ids order), and every
/// working path is faster than its protection walk.
SimReport run(const topo::Graph& g, std::span<const topo::ProtectionGroup> groups,
              const std::vector<int>& conn_ids, const coding::CoeffMatrix& coeffs,
              const LinkSchedule& sched, long rounds, uint64_t seed,
              SignalProbe* probe = nullptr);

/// The unit value node `node` of connection `conn` generates in `round`.
/// Exposed so tests and reports can compare against ground truth.
uint16_t truth_unit(const gf::Field& f, uint64_t seed, int conn, int node, long round);

}  // namespace ncp::sim
