// SPDX-License-Identifier: Apache-2.0
#include "rln/field.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace rln {
namespace {

constexpr std::string_view kBn254Decimal =
    "21888242871839275222246405745257275088548364400416034343698204186575808495617";

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t acc = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) acc = mulmod_u64(acc, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return acc;
}

// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull,
                            19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull,
                            19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

bool is_prime_small(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

void check_modulus(const U256& p) {
    if (p <= 3) throw FieldError("modulus must exceed 3");
    if (p <= U256(1u) << 20) {
        if (!is_prime_small(p.convert_to<std::uint64_t>()))
            throw FieldError("modulus is not prime: " + p.str());
    } else if (p <= U256(std::numeric_limits<std::uint64_t>::max())) {
        if (!is_prime_u64(p.convert_to<std::uint64_t>()))
            throw FieldError("modulus is not prime: " + p.str());
    } else if (p != U256(std::string(kBn254Decimal))) {
        throw FieldError("primality of wide moduli is not verifiable here; "
                         "only the known production prime is accepted");
    }
}

}  // namespace

FieldModulus::FieldModulus(const U256& p) : prime_(p) {
    bits_ = boost::multiprecision::msb(p) + 1;
    bytes_ = (bits_ + 7) / 8;
    decimal_ = p.str();
}

const FieldModulus& FieldModulus::intern(const U256& prime) {
    static std::mutex mu;
    static std::map<U256, std::unique_ptr<FieldModulus>> table;
    std::lock_guard<std::mutex> lock(mu);
    auto it = table.find(prime);
    if (it == table.end()) {
        check_modulus(prime);
        it = table.emplace(prime, std::unique_ptr<FieldModulus>(
                                      new FieldModulus(prime)))
                 .first;
    }
    return *it->second;
}

const FieldModulus& FieldModulus::p97() {
    static const FieldModulus& m = intern(U256(97));
    return m;
}

const FieldModulus& FieldModulus::p61() {
    static const FieldModulus& m = intern((U256(1) << 61) - 1);
    return m;
}

const FieldModulus& FieldModulus::bn254() {
    static const FieldModulus& m = intern(U256(std::string(kBn254Decimal)));
    return m;
}

const FieldModulus* FieldModulus::by_name(std::string_view name) {
    if (name == "p97") return &p97();
    if (name == "p61") return &p61();
    if (name == "default") return &bn254();
    return nullptr;
}

namespace {

void require_same_modulus(const FieldElement& a, const FieldElement& b) {
    if (&a.modulus() != &b.modulus())
        throw FieldError("field modulus mismatch");
}

}  // namespace

FieldElement FieldElement::operator+(const FieldElement& rhs) const {
    require_same_modulus(*this, rhs);
    U256 sum = value_ + rhs.value_;  // p < 2^255, no overflow in 256 bits
    if (sum >= modulus_->prime()) sum -= modulus_->prime();
    return {sum, *modulus_};
}

FieldElement FieldElement::operator-(const FieldElement& rhs) const {
    require_same_modulus(*this, rhs);
    U256 diff = value_ >= rhs.value_
                    ? value_ - rhs.value_
                    : modulus_->prime() - (rhs.value_ - value_);
    return {diff, *modulus_};
}

FieldElement FieldElement::operator*(const FieldElement& rhs) const {
    require_same_modulus(*this, rhs);
    U512 prod = U512(value_) * U512(rhs.value_);
    prod %= U512(modulus_->prime());
    return {prod.convert_to<U256>(), *modulus_};
}

FieldElement FieldElement::negate() const {
    if (value_.is_zero()) return *this;
    return {modulus_->prime() - value_, *modulus_};
}

FieldElement FieldElement::inverse() const {
    if (value_.is_zero()) throw FieldError("inverse of zero requested");
    // a^(p-2) mod p
    const U256& p = modulus_->prime();
    U256 exp = p - 2;
    U256 base = value_;
    U256 acc = 1;
    while (!exp.is_zero()) {
        if (boost::multiprecision::bit_test(exp, 0)) {
            U512 t = U512(acc) * U512(base);
            acc = (t % U512(p)).convert_to<U256>();
        }
        U512 s = U512(base) * U512(base);
        base = (s % U512(p)).convert_to<U256>();
        exp >>= 1;
    }
    return {acc, *modulus_};
}

std::vector<std::uint8_t> FieldElement::to_bytes() const {
    std::vector<std::uint8_t> out(modulus_->byte_length(), 0);
    U256 v = value_;
    for (std::size_t i = out.size(); i-- > 0 && !v.is_zero();) {
        out[i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

FieldElement FieldElement::from_bytes(std::span<const std::uint8_t> bytes,
                                      const FieldModulus& m) {
    if (bytes.size() != m.byte_length())
        throw FieldError("field element encoding has wrong width");
    U256 v = 0;
    for (std::uint8_t b : bytes) {
        v <<= 8;
        v |= b;
    }
    if (v >= m.prime())
        throw FieldError("field element encoding is non-canonical");
    return {v, m};
}

FieldElement FieldElement::from_decimal(std::string_view text,
                                        const FieldModulus& m) {
    try {
        U256 v{std::string(text)};
        if (v >= m.prime())
            throw FieldError("decimal value out of field range");
        return {v, m};
    } catch (const std::runtime_error&) {
        throw FieldError("malformed decimal field element");
    }
}

}  // namespace rln
