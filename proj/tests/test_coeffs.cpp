#include <doctest.h>

#include <cmath>
#include <functional>

#include "ncp/coeffs.hpp"

using namespace ncp;
using namespace ncp::coding;

namespace {

// All size-k subsets of {0..n-1}, visited in lexicographic order.
void subsets(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            fn(idx);
            return;
        }
        for (int i = start; i < n; ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
}

std::vector<int> iota_vec(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace

TEST_CASE("vandermonde layout and guarantees") {
    const gf::Field& f = gf::Field::gf256();
    auto one_row = assign_vandermonde(f, 5, 1);
    for (int l = 0; l < 5; ++l) CHECK(one_row.a.at(0, l) == 1);

    auto m = assign_vandermonde(f, 3, 2);
    CHECK(m.a.at(0, 0) == 1);
    CHECK(m.a.at(0, 1) == 1);
    CHECK(m.a.at(0, 2) == 1);
    CHECK(m.a.at(1, 0) == 1);
    CHECK(m.a.at(1, 1) == 2);
    CHECK(m.a.at(1, 2) == 3);

    // Every column subset of size <= K has full rank (exhaustive, N <= 8).
    for (int k = 1; k <= 4; ++k) {
        for (int n = 1; n <= 8; ++n) {
            auto cm = assign_vandermonde(f, n, k);
            auto rows = iota_vec(k);
            for (int take = 1; take <= std::min(n, k); ++take) {
                subsets(n, take, [&](const std::vector<int>& cols) {
                    CHECK(gf::rank(cm.a.submatrix(rows, cols)) == take);
                });
            }
        }
    }

    gf::Field tiny(2, 0x7);  // q = 4: only 3 nonzero lambdas
    CHECK_THROWS_AS(assign_vandermonde(tiny, 4, 1), CoeffError);
}

TEST_CASE("cauchy layout and the square-submatrix guarantee") {
    const gf::Field& f = gf::Field::gf256();
    auto m = assign_cauchy(f, 1, 1);
    CHECK(m.a.at(0, 0) == f.inv(3));  // x1 = 1, y1 = 2

    // Every square submatrix has full rank, exhaustive for K, N <= 5. This is
    // strictly stronger than the vandermonde column guarantee.
    auto cm = assign_cauchy(f, 5, 5);
    for (int s = 1; s <= 5; ++s) {
        subsets(5, s, [&](const std::vector<int>& rows) {
            subsets(5, s, [&](const std::vector<int>& cols) {
                CHECK(gf::rank(cm.a.submatrix(rows, cols)) == s);
            });
        });
    }

    CHECK_THROWS_AS(cauchy_matrix(f, {1, 2}, {2, 5}), CoeffError);
    gf::Field tiny(2, 0x7);
    CHECK_THROWS_AS(assign_cauchy(tiny, 2, 2), CoeffError);
}

TEST_CASE("random assignment: determinism and mask") {
    const gf::Field& f = gf::Field::gf256();
    Mask mask = Mask::all_protect(3, 4);
    mask.zero[1 * 4 + 2] = 1;
    mask.zero[2 * 4 + 0] = 1;
    auto a = assign_random(f, mask, 42);
    auto b = assign_random(f, mask, 42);
    CHECK(a.a == b.a);
    auto c = assign_random(f, mask, 43);
    CHECK_FALSE(a.a == c.a);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 4; ++l) {
            if (mask.is_zero(k, l))
                CHECK(a.a.at(k, l) == 0);
            else
                CHECK(a.a.at(k, l) != 0);
        }
}

TEST_CASE("random full-rank rate matches the product formula") {
    // Claim model: entries uniform over the whole field, zero included.
    for (int m : {4, 8}) {
        gf::Field f(m, gf::Field::default_poly(m));
        double q = f.size();
        uint64_t state = 777 + m;
        auto next = [&]() {
            state += 0x9e3779b97f4a7c15ull;
            uint64_t x = state;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
            return x ^ (x >> 31);
        };
        for (int t : {2, 3}) {
            double expect = 1.0;
            for (int i = 1; i <= t; ++i) expect *= 1.0 - std::pow(q, -i);
            int trials = 10000, full = 0;
            for (int it = 0; it < trials; ++it) {
                gf::Matrix a(f, t, t);
                for (int r = 0; r < t; ++r)
                    for (int c = 0; c < t; ++c) a.at(r, c) = next() % f.size();
                if (gf::rank(a) == t) ++full;
            }
            double rate = double(full) / trials;
            double sigma = std::sqrt(expect * (1 - expect) / trials);
            CHECK(std::abs(rate - expect) <= 3 * sigma);
        }
    }
}

TEST_CASE("structural max rank is the support matching bound") {
    Mask m = Mask::all_protect(3, 3);
    RankDemand full{iota_vec(3), iota_vec(3)};
    CHECK(structural_max_rank(m, full) == 3);
    // Zero out an entire row: max rank 2.
    for (int l = 0; l < 3; ++l) m.zero[1 * 3 + l] = 1;
    CHECK(structural_max_rank(m, full) == 2);
    // Keep only a diagonal: still 2 with the dead row.
    Mask d = Mask::all_protect(2, 2);
    d.zero[0 * 2 + 1] = 1;
    d.zero[1 * 2 + 0] = 1;
    CHECK(structural_max_rank(d, RankDemand{iota_vec(2), iota_vec(2)}) == 2);
}

TEST_CASE("complete_matrix: empty demands, success, and deficiency") {
    const gf::Field& f = gf::Field::gf256();
    Mask m = Mask::all_protect(3, 4);
    auto empty = complete_matrix(f, m, {}, 1);
    CHECK(empty.ok);
    CHECK(empty.attempts == 1);

    std::vector<RankDemand> demands;
    demands.push_back({{0, 1}, {0, 1}});
    demands.push_back({{1, 2}, {2, 3}});
    demands.push_back({{0, 1, 2}, {0, 2, 3}});
    auto done = complete_matrix(f, m, demands, 7, 10);
    REQUIRE(done.ok);
    for (const auto& d : demands) CHECK(gf::rank(done.coeffs.a.submatrix(d.rows, d.cols)) ==
                                        static_cast<int>(d.rows.size()));

    // A dead row cannot be completed to full rank; it is reported, and the
    // loop still terminates by accepting the structural maximum.
    Mask dead = Mask::all_protect(2, 2);
    dead.zero[0] = dead.zero[1] = 1;
    auto r = complete_matrix(f, dead, {RankDemand{iota_vec(2), iota_vec(2)}}, 3, 8);
    CHECK(r.ok);  // reached the (reduced) structural max
    REQUIRE(r.structurally_deficient.size() == 1);
    CHECK(gf::rank(r.coeffs.a) == 1);
}
