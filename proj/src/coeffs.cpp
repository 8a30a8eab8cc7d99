#include "ncp/coeffs.hpp"

#include <algorithm>

namespace ncp::coding {

namespace {

// splitmix64; stable across platforms, unlike the distribution adaptors.
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
    uint32_t below(uint32_t n) { return static_cast<uint32_t>(next() % n); }
};

}  // namespace

Mask mask_from_groups(std::span<const topo::ProtectionGroup> groups,
                      const std::vector<int>& conn_ids) {
    Mask m;
    m.walks = static_cast<int>(groups.size());
    m.conns = static_cast<int>(conn_ids.size());
    m.zero.assign(static_cast<size_t>(m.walks) * m.conns, 1);
    for (int k = 0; k < m.walks; ++k) {
        for (const topo::Connection& c : groups[k].members()) {
            auto it = std::find(conn_ids.begin(), conn_ids.end(), c.id);
            if (it == conn_ids.end())
                throw CoeffError("group protects unknown connection id " + std::to_string(c.id));
            m.zero[static_cast<size_t>(k) * m.conns + (it - conn_ids.begin())] = 0;
        }
    }
    return m;
}

CoeffMatrix assign_vandermonde(const gf::Field& f, int conns, int walks) {
    if (conns < 1 || walks < 1) throw CoeffError("need at least one connection and one walk");
    if (static_cast<uint32_t>(conns) > f.size() - 1)
        throw CoeffError("vandermonde assignment needs " + std::to_string(conns) +
                         " distinct nonzero lambdas but the field has only " +
                         std::to_string(f.size() - 1));
    CoeffMatrix out{gf::Matrix(f, walks, conns), Mask::all_protect(walks, conns)};
    for (int l = 0; l < conns; ++l) {
        uint16_t lambda = static_cast<uint16_t>(l + 1);
        for (int k = 0; k < walks; ++k) out.a.at(k, l) = f.pow(lambda, k);
    }
    return out;
}

gf::Matrix cauchy_matrix(const gf::Field& f, const std::vector<uint16_t>& xs,
                         const std::vector<uint16_t>& ys) {
    auto all = xs;
    all.insert(all.end(), ys.begin(), ys.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw CoeffError("cauchy construction requires the x and y sets to be disjoint "
                         "and duplicate-free");
    gf::Matrix m(f, static_cast<int>(xs.size()), static_cast<int>(ys.size()));
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < ys.size(); ++j)
            m.at(static_cast<int>(i), static_cast<int>(j)) = f.inv(f.add(xs[i], ys[j]));
    return m;
}

CoeffMatrix assign_cauchy(const gf::Field& f, int conns, int walks) {
    if (conns < 1 || walks < 1) throw CoeffError("need at least one connection and one walk");
    if (static_cast<uint32_t>(walks + conns) > f.size() - 1)
        throw CoeffError("cauchy assignment needs " + std::to_string(walks + conns) +
                         " distinct nonzero elements but the field has only " +
                         std::to_string(f.size() - 1));
    std::vector<uint16_t> xs(walks), ys(conns);
    for (int k = 0; k < walks; ++k) xs[k] = static_cast<uint16_t>(k + 1);
    for (int l = 0; l < conns; ++l) ys[l] = static_cast<uint16_t>(walks + l + 1);
    return {cauchy_matrix(f, xs, ys), Mask::all_protect(walks, conns)};
}

CoeffMatrix assign_random(const gf::Field& f, const Mask& mask, uint64_t seed) {
    CoeffMatrix out{gf::Matrix(f, mask.walks, mask.conns), mask};
    Rng rng(seed);
    for (int k = 0; k < mask.walks; ++k)
        for (int l = 0; l < mask.conns; ++l)
            out.a.at(k, l) =
                mask.is_zero(k, l) ? 0 : static_cast<uint16_t>(1 + rng.below(f.size() - 1));
    return out;
}

int structural_max_rank(const Mask& mask, const RankDemand& d) {
    // Kuhn's matching on the nonzero support of the demanded submatrix.
    int r = static_cast<int>(d.rows.size());
    int c = static_cast<int>(d.cols.size());
    std::vector<int> match_col(c, -1);
    std::vector<char> seen;
    std::function<bool(int)> try_row = [&](int i) -> bool {
        for (int j = 0; j < c; ++j) {
            if (seen[j] || mask.is_zero(d.rows[i], d.cols[j])) continue;
            seen[j] = 1;
            if (match_col[j] < 0 || try_row(match_col[j])) {
                match_col[j] = i;
                return true;
            }
        }
        return false;
    };
    int matched = 0;
    for (int i = 0; i < r; ++i) {
        seen.assign(c, 0);
        if (try_row(i)) ++matched;
    }
    return matched;
}

Completion complete_matrix(const gf::Field& f, const Mask& mask,
                           const std::vector<RankDemand>& demands, uint64_t seed,
                           int max_attempts) {
    Completion result{assign_random(f, mask, seed), false, 0, {}, std::nullopt};
    std::vector<int> targets(demands.size());
    for (size_t i = 0; i < demands.size(); ++i) {
        const RankDemand& d = demands[i];
        for (int r : d.rows)
            if (r < 0 || r >= mask.walks) throw CoeffError("rank demand row out of range");
        for (int c : d.cols)
            if (c < 0 || c >= mask.conns) throw CoeffError("rank demand column out of range");
        targets[i] = structural_max_rank(mask, d);
        if (targets[i] < static_cast<int>(std::min(d.rows.size(), d.cols.size())))
            result.structurally_deficient.push_back(d);
    }

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        result.attempts = attempt + 1;
        CoeffMatrix cand = assign_random(f, mask, mix(seed) + attempt);
        bool all_ok = true;
        for (size_t i = 0; i < demands.size() && all_ok; ++i) {
            auto sub = cand.a.submatrix(demands[i].rows, demands[i].cols);
            if (gf::rank(sub) < targets[i]) {
                all_ok = false;
                result.unmet = demands[i];
            }
        }
        if (all_ok) {
            result.coeffs = std::move(cand);
            result.ok = true;
            result.unmet.reset();
            return result;
        }
    }
    return result;
}

}  // namespace ncp::coding
