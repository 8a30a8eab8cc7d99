#include "ncp/gf.hpp"

namespace ncp::gf {

namespace {

int degree(uint32_t p) {
    int d = -1;
    for (int i = 0; i < 32; ++i)
        if (p & (1u << i)) d = i;
    return d;
}

// Remainder of carry-less division a mod b over GF(2).
uint32_t poly_mod(uint64_t a, uint32_t b) {
    int db = degree(b);
    for (int i = 63; i >= db; --i)
        if (a & (1ull << i)) a ^= static_cast<uint64_t>(b) << (i - db);
    return static_cast<uint32_t>(a);
}

std::vector<uint32_t> prime_factors(uint32_t n) {
    std::vector<uint32_t> out;
    for (uint32_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

}  // namespace

bool is_irreducible(uint32_t poly, int m) {
    if (degree(poly) != m) return false;
    if (m == 1) return true;
    // A reducible polynomial of degree m has an irreducible factor of degree
    // <= m/2; trying every polynomial of those degrees as divisor is enough.
    for (int d = 1; d <= m / 2; ++d) {
        for (uint32_t cand = (1u << d); cand < (1u << (d + 1)); ++cand) {
            if (poly_mod(poly, cand) == 0) return false;
        }
    }
    return true;
}

Field::Field(int m, uint32_t poly) : m_(m), poly_(poly) {
    if (m < 1 || m > 16) throw FieldError("field width m must be in [1, 16]");
    if (!is_irreducible(poly, m))
        throw FieldError("polynomial 0x" + [&] {
            char buf[16];
            snprintf(buf, sizeof buf, "%X", poly);
            return std::string(buf);
        }() + " is not irreducible of degree " + std::to_string(m));
    q_ = 1u << m;
    build_tables();
}

uint16_t Field::mul_basic(uint16_t a, uint16_t b) const {
    range_check(a);
    range_check(b);
    uint32_t acc = 0;
    uint32_t aa = a;
    uint32_t bb = b;
    while (bb) {
        if (bb & 1) acc ^= aa;
        bb >>= 1;
        aa <<= 1;
        if (aa & q_) aa ^= poly_;
    }
    return static_cast<uint16_t>(acc);
}

uint16_t Field::pow(uint16_t a, uint64_t e) const {
    range_check(a);
    uint16_t r = 1;
    uint16_t base = a;
    while (e) {
        if (e & 1) r = mul_basic(r, base);
        base = mul_basic(base, base);
        e >>= 1;
    }
    return r;
}

void Field::build_tables() {
    const uint32_t order = q_ - 1;
    log_.assign(q_, 0);
    exp_.assign(order == 0 ? 1 : 2 * order, 1);
    if (order <= 1) return;  // GF(2): tables degenerate, mul handles 0/1 directly

    // The multiplicative group is cyclic; find a generator by checking the
    // order condition against every prime factor of q-1.
    auto factors = prime_factors(order);
    uint16_t gen = 0;
    for (uint32_t c = 2; c < q_; ++c) {
        bool ok = true;
        for (uint32_t p : factors) {
            if (pow(static_cast<uint16_t>(c), order / p) == 1) {
                ok = false;
                break;
            }
        }
        if (ok) {
            gen = static_cast<uint16_t>(c);
            break;
        }
    }
    if (gen == 0) throw FieldError("internal: no generator found");

    uint16_t x = 1;
    for (uint32_t i = 0; i < order; ++i) {
        exp_[i] = x;
        exp_[i + order] = x;
        log_[x] = static_cast<uint16_t>(i);
        x = mul_basic(x, gen);
    }
    if (x != 1) throw FieldError("internal: generator order mismatch");
}

uint32_t Field::default_poly(int m) {
    switch (m) {
        case 1: return 0x3;        // x + 1
        case 2: return 0x7;        // x^2 + x + 1
        case 3: return 0xB;        // x^3 + x + 1
        case 4: return 0x13;       // x^4 + x + 1
        case 5: return 0x25;       // x^5 + x^2 + 1
        case 6: return 0x43;       // x^6 + x + 1
        case 7: return 0x89;       // x^7 + x^3 + 1
        case 8: return 0x11B;      // x^8 + x^4 + x^3 + x + 1
        case 9: return 0x211;      // x^9 + x^4 + 1
        case 10: return 0x409;     // x^10 + x^3 + 1
        case 11: return 0x805;     // x^11 + x^2 + 1
        case 12: return 0x1053;    // x^12 + x^6 + x^4 + x + 1
        case 13: return 0x201B;    // x^13 + x^4 + x^3 + x + 1
        case 14: return 0x4443;    // x^14 + x^10 + x^6 + x + 1
        case 15: return 0x8003;    // x^15 + x + 1
        case 16: return 0x1100B;   // x^16 + x^12 + x^3 + x + 1
        default: throw FieldError("no default polynomial for m=" + std::to_string(m));
    }
}

const Field& Field::gf256() {
    static const Field f(8, 0x11B);
    return f;
}

}  // namespace ncp::gf
