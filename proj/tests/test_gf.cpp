#include <doctest.h>

#include <random>

#include "ncp/gf.hpp"
#include "ncp/gfmat.hpp"

using namespace ncp::gf;

namespace {

// Independent multiplication oracle: schoolbook polynomial product followed
// by long division by the modulus. Deliberately shares no code with Field.
uint16_t oracle_mul(int m, uint32_t poly, uint16_t a, uint16_t b) {
    uint32_t prod = 0;
    for (int i = 0; i < m; ++i)
        if (a & (1u << i))
            for (int j = 0; j < m; ++j)
                if (b & (1u << j)) prod ^= 1u << (i + j);
    for (int bit = 2 * m - 2; bit >= m; --bit)
        if (prod & (1u << bit)) prod ^= poly << (bit - m);
    return static_cast<uint16_t>(prod);
}

}  // namespace

TEST_CASE("irreducibility screening") {
    CHECK(is_irreducible(0xB, 3));
    CHECK(is_irreducible(0x11B, 8));
    CHECK_FALSE(is_irreducible(0xF, 3));   // x^3+x^2+x+1 = (x+1)(x^2+1)
    CHECK_FALSE(is_irreducible(0x11, 4));  // x^4+1 = (x+1)^4
    CHECK_THROWS_AS(Field(3, 0xF), FieldError);
    CHECK_THROWS_AS(Field(0, 0x3), FieldError);
    CHECK_THROWS_AS(Field(17, 0x3), FieldError);
    for (int m = 1; m <= 16; ++m) CHECK(is_irreducible(Field::default_poly(m), m));
}

TEST_CASE("addition is XOR and self-inverse") {
    Field f(3, 0xB);
    CHECK(f.add(5, 5) == 0);
    CHECK(f.add(6, 0) == 6);
    CHECK(f.add(3, 5) == 6);
    Elem a(3, f), b(5, f);
    CHECK((a + b).v == 6);
    Field g(3, 0xD);
    CHECK_THROWS_AS(Elem(1, f) + Elem(1, g), FieldError);
}

TEST_CASE("multiplication against shift-and-xor oracle") {
    Field f(3, 0xB);
    CHECK(f.mul(3, 5) == 4);
    CHECK(f.mul(1, 6) == 6);
    CHECK(f.mul(0, 6) == 0);
    for (int m : {2, 3, 4, 8}) {
        Field fm(m, Field::default_poly(m));
        std::mt19937 rng(7 + m);
        for (int t = 0; t < 2000; ++t) {
            uint16_t a = rng() % fm.size();
            uint16_t b = rng() % fm.size();
            uint16_t want = oracle_mul(m, fm.poly(), a, b);
            CHECK(fm.mul(a, b) == want);
            CHECK(fm.mul_basic(a, b) == want);
        }
    }
}

TEST_CASE("inverses") {
    Field f(3, 0xB);
    CHECK(f.inv(1) == 1);
    CHECK(f.inv(2) == 5);  // exhaustive search agrees: 2*5 = 1
    CHECK_THROWS_AS(f.inv(0), FieldError);
    for (int m = 1; m <= 8; ++m) {
        Field fm(m, Field::default_poly(m));
        for (uint32_t a = 1; a < fm.size(); ++a) CHECK(fm.mul(a, fm.inv(a)) == 1);
    }
}

TEST_CASE("field axioms, exhaustive for small m") {
    for (int m = 1; m <= 4; ++m) {
        Field f(m, Field::default_poly(m));
        uint32_t q = f.size();
        for (uint32_t a = 0; a < q; ++a)
            for (uint32_t b = 0; b < q; ++b) {
                CHECK(f.mul(a, b) == f.mul(b, a));
                CHECK(f.add(a, b) == f.add(b, a));
                for (uint32_t c = 0; c < q; ++c) {
                    CHECK(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
                    CHECK(f.add(f.add(a, b), c) == f.add(a, f.add(b, c)));
                    CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
    }
}

TEST_CASE("field axioms, randomized for wide fields") {
    for (int m : {12, 16}) {
        Field f(m, Field::default_poly(m));
        std::mt19937 rng(m);
        for (int t = 0; t < 20000; ++t) {
            uint16_t a = rng() % f.size();
            uint16_t b = rng() % f.size();
            uint16_t c = rng() % f.size();
            CHECK(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
            CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
        }
    }
}

TEST_CASE("solve: identity, worked 2x2, singular") {
    const Field& f = Field::gf256();
    auto id = Matrix::identity(f, 4);
    std::vector<uint16_t> b{9, 0, 77, 200};
    CHECK(*solve(id, b) == b);

    // The two-equations-in-two-unknowns shape from dual-failure recovery.
    Matrix a(f, 2, 2);
    a.at(0, 0) = 3;
    a.at(0, 1) = 7;
    a.at(1, 0) = 5;
    a.at(1, 1) = 11;
    std::vector<uint16_t> rhs{100, 200};
    auto x = solve(a, rhs);
    REQUIRE(x.has_value());
    CHECK(mat_vec(a, *x) == rhs);

    Matrix z(f, 2, 2);
    CHECK_FALSE(solve(z, rhs).has_value());
    CHECK_THROWS_AS(solve(a, std::vector<uint16_t>{1, 2, 3}), FieldError);
}

TEST_CASE("solve then re-multiply on random nonsingular systems") {
    const Field& f = Field::gf256();
    std::mt19937 rng(99);
    int solved = 0;
    while (solved < 50) {
        int n = 1 + rng() % 8;
        Matrix a(f, n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a.at(r, c) = rng() % 256;
        std::vector<uint16_t> b(n);
        for (auto& v : b) v = rng() % 256;
        auto x = solve(a, b);
        if (!x) continue;
        CHECK(mat_vec(a, *x) == b);
        ++solved;
    }
}

TEST_CASE("rank") {
    const Field& f = Field::gf256();
    CHECK(rank(Matrix::identity(f, 5)) == 5);
    CHECK(rank(Matrix(f, 3, 4)) == 0);
    Matrix v(f, 2, 2);
    v.at(0, 0) = 1;
    v.at(0, 1) = 1;
    v.at(1, 0) = 17;
    v.at(1, 1) = 103;
    CHECK(rank(v) == 2);  // distinct lambdas: determinant l2 - l1 != 0
    Matrix dup(f, 2, 2);
    dup.at(0, 0) = dup.at(1, 0) = 2;
    dup.at(0, 1) = dup.at(1, 1) = 9;
    CHECK(rank(dup) == 1);
}

TEST_CASE("solve_vandermonde matches generic elimination") {
    const Field& f = Field::gf256();
    CHECK(solve_vandermonde(f, {7}, {42}) == std::vector<uint16_t>{42});
    CHECK_THROWS_AS(solve_vandermonde(f, {3, 3}, {1, 2}), FieldError);

    std::mt19937 rng(5);
    for (int t = 0; t < 40; ++t) {
        int n = 1 + rng() % 7;
        std::vector<uint16_t> lambdas;
        while (static_cast<int>(lambdas.size()) < n) {
            uint16_t cand = rng() % 256;
            bool dup = false;
            for (auto l : lambdas) dup |= (l == cand);
            if (!dup) lambdas.push_back(cand);
        }
        std::vector<uint16_t> b(n);
        for (auto& v : b) v = rng() % 256;
        Matrix a(f, n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a.at(r, c) = f.pow(lambdas[c], r);
        auto ref = solve(a, b);
        REQUIRE(ref.has_value());
        CHECK(solve_vandermonde(f, lambdas, b) == *ref);
    }
}

TEST_CASE("solve_vandermonde is stable under pairing permutation") {
    const Field& f = Field::gf256();
    std::vector<uint16_t> lambdas{9, 33, 120, 5};
    std::vector<uint16_t> b{1, 2, 3, 4};
    auto x = solve_vandermonde(f, lambdas, b);
    // Permuting the lambdas permutes the unknowns; values stay paired.
    std::vector<int> perm{2, 0, 3, 1};
    std::vector<uint16_t> pl(4), pb(4);
    Matrix a(f, 4, 4);
    for (int c = 0; c < 4; ++c) pl[c] = lambdas[perm[c]];
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) a.at(r, c) = f.pow(pl[c], r);
    // rhs belongs to rows (powers), not columns, so it is unchanged.
    auto y = solve_vandermonde(f, pl, b);
    for (int c = 0; c < 4; ++c) CHECK(y[c] == x[perm[c]]);
}

TEST_CASE("coordinate extraction from underdetermined systems") {
    const Field& f = Field::gf256();
    // One equation, two unknowns: x0 + x1 = 5. Neither is determined.
    Matrix a(f, 1, 2);
    a.at(0, 0) = 1;
    a.at(0, 1) = 1;
    CHECK_FALSE(coordinate_determined(a, 0));
    CHECK_FALSE(extract_coordinate(a, {5}, 0).has_value());

    // x0 determined, x1+x2 not: rows (1,0,0) and (0,1,1).
    Matrix b(f, 2, 3);
    b.at(0, 0) = 1;
    b.at(1, 1) = 1;
    b.at(1, 2) = 1;
    CHECK(coordinate_determined(b, 0));
    CHECK_FALSE(coordinate_determined(b, 1));
    auto v = extract_coordinate(b, {77, 3}, 0);
    REQUIRE(v.has_value());
    CHECK(*v == 77);

    // Overdetermined consistent: both rows pin x0.
    Matrix c(f, 2, 1);
    c.at(0, 0) = 1;
    c.at(1, 0) = 2;
    CHECK(coordinate_determined(c, 0));
    auto w = extract_coordinate(c, {9, f.mul(2, 9)}, 0);
    REQUIRE(w.has_value());
    CHECK(*w == 9);
}
