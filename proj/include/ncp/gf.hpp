#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncp::gf {

class FieldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// GF(2^m), 1 <= m <= 16, defined by an irreducible polynomial of degree m.
/// The polynomial is encoded as an integer whose bit i is the coefficient of
/// x^i, so x^8+x^4+x^3+x+1 is 0x11B. Irreducibility is verified at
/// construction by trial division; a bad modulus fails loudly here instead of
/// corrupting every computation downstream.
///
/// Addition is XOR. Multiplication goes through log/antilog tables built once
/// at construction; mul_basic() is the table-free shift-and-xor route and is
/// kept public so the two can be checked against each other.
class Field {
public:
    Field(int m, uint32_t poly);

    /// The default data-unit field: GF(2^8) with x^8+x^4+x^3+x+1.
    static const Field& gf256();
    /// A conventional irreducible polynomial for each supported m.
    static uint32_t default_poly(int m);

    int m() const { return m_; }
    uint32_t poly() const { return poly_; }
    uint32_t size() const { return q_; }

    uint16_t add(uint16_t a, uint16_t b) const {
        range_check(a);
        range_check(b);
        return a ^ b;
    }
    uint16_t mul(uint16_t a, uint16_t b) const {
        range_check(a);
        range_check(b);
        if (a == 0 || b == 0) return 0;
        return exp_[log_[a] + log_[b]];
    }
    uint16_t mul_basic(uint16_t a, uint16_t b) const;
    uint16_t inv(uint16_t a) const {
        range_check(a);
        if (a == 0) throw FieldError("inv: division by zero");
        return exp_[q_ - 1 - log_[a]];
    }
    uint16_t div(uint16_t a, uint16_t b) const { return mul(a, inv(b)); }
    uint16_t pow(uint16_t a, uint64_t e) const;

    bool is(const Field& other) const { return this == &other; }

private:
    void range_check(uint16_t a) const {
        if (a >= q_) throw FieldError("element out of range for GF(2^" + std::to_string(m_) + ")");
    }
    void build_tables();

    int m_;
    uint32_t poly_;
    uint32_t q_;
    std::vector<uint16_t> exp_;  // exp_[i] = g^i, doubled so log sums need no reduction
    std::vector<uint16_t> log_;
};

/// A field element tagged with its field, so elements of different fields
/// cannot be combined by accident.
struct Elem {
    uint16_t v = 0;
    const Field* f = nullptr;

    Elem() = default;
    Elem(uint16_t value, const Field& field) : v(value), f(&field) {}

    friend Elem operator+(Elem a, Elem b) {
        same_field(a, b);
        return {a.f->add(a.v, b.v), *a.f};
    }
    friend Elem operator*(Elem a, Elem b) {
        same_field(a, b);
        return {a.f->mul(a.v, b.v), *a.f};
    }
    friend Elem operator/(Elem a, Elem b) {
        same_field(a, b);
        return {a.f->div(a.v, b.v), *a.f};
    }
    Elem inverse() const { return {f->inv(v), *f}; }
    friend bool operator==(Elem a, Elem b) { return a.v == b.v && a.f == b.f; }

private:
    static void same_field(Elem a, Elem b) {
        if (a.f == nullptr || b.f == nullptr || !a.f->is(*b.f))
            throw FieldError("field spec mismatch between operands");
    }
};

/// True iff poly, interpreted over GF(2), has degree exactly m and no factor
/// of degree in [1, m/2].
bool is_irreducible(uint32_t poly, int m);

}  // namespace ncp::gf
