#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncp/gfmat.hpp"
#include "ncp/group.hpp"

namespace ncp::coding {

/// Which (walk, connection) cells of the coefficient matrix exist at all.
/// Cell (k, l) is structurally zero iff walk k does not protect connection l.
struct Mask {
    int walks = 0;
    int conns = 0;
    std::vector<uint8_t> zero;  // row-major, 1 = structurally zero

    bool is_zero(int k, int l) const { return zero[static_cast<size_t>(k) * conns + l] != 0; }
    static Mask all_protect(int walks, int conns) {
        return {walks, conns, std::vector<uint8_t>(static_cast<size_t>(walks) * conns, 0)};
    }
};

/// Derives the mask from built groups. Column l is the position of the
/// connection id in `conn_ids`; row k follows group order.
Mask mask_from_groups(std::span<const topo::ProtectionGroup> groups,
                      const std::vector<int>& conn_ids);

/// The K x N scaling-coefficient matrix together with its structural mask.
/// Non-masked entries are nonzero field elements.
struct CoeffMatrix {
    gf::Matrix a;
    Mask mask;

    uint16_t alpha(int walk, int conn_col) const { return a.at(walk, conn_col); }
};

class CoeffError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row k = (lambda_1^(k-1) ... lambda_N^(k-1)) with lambda_l the l-th nonzero
/// field element. Needs N distinct nonzero lambdas, so N <= q-1, and admits
/// no structural zeros.
CoeffMatrix assign_vandermonde(const gf::Field& f, int conns, int walks);

/// Entry (k, l) = 1/(x_k + y_l) with x_1..x_K = 1..K and y_1..y_N = K+1..K+N
/// as field elements. Every square submatrix of a Cauchy matrix is again
/// Cauchy, hence invertible.
CoeffMatrix assign_cauchy(const gf::Field& f, int conns, int walks);

/// Explicit-set Cauchy builder; throws when the x/y sets overlap or repeat.
gf::Matrix cauchy_matrix(const gf::Field& f, const std::vector<uint16_t>& xs,
                         const std::vector<uint16_t>& ys);

/// Non-masked entries drawn uniformly from the nonzero elements,
/// reproducibly from the seed. A zero coefficient would silently drop the
/// connection from that walk's combination, so zero is excluded.
CoeffMatrix assign_random(const gf::Field& f, const Mask& mask, uint64_t seed);

/// A submatrix of the coefficient matrix required to reach its maximum
/// possible rank (rows = walk indices, cols = connection columns).
struct RankDemand {
    std::vector<int> rows, cols;

    friend bool operator<(const RankDemand& a, const RankDemand& b) {
        return std::tie(a.rows, a.cols) < std::tie(b.rows, b.cols);
    }
    friend bool operator==(const RankDemand& a, const RankDemand& b) {
        return a.rows == b.rows && a.cols == b.cols;
    }
};

struct Completion {
    CoeffMatrix coeffs;
    bool ok = false;       // every demand reached its structural maximum
    int attempts = 0;
    /// Demands whose structural maximum is below full (min-dimension) rank;
    /// no completion can make these full rank.
    std::vector<RankDemand> structurally_deficient;
    /// Set when attempts ran out: the first demand still under target.
    std::optional<RankDemand> unmet;
};

/// Maximum rank any assignment can give this masked submatrix: the maximum
/// bipartite matching of its nonzero support.
int structural_max_rank(const Mask& mask, const RankDemand& d);

/// Draws random completions until every demanded submatrix reaches its
/// structural maximum rank, or attempts are exhausted. Structurally deficient
/// demands are reported, not looped on.
Completion complete_matrix(const gf::Field& f, const Mask& mask,
                           const std::vector<RankDemand>& demands, uint64_t seed,
                           int max_attempts = 64);

}  // namespace ncp::coding
