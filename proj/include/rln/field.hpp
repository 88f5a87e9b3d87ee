// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rln {

using U256 = boost::multiprecision::uint256_t;
using U512 = boost::multiprecision::uint512_t;

/// Raised on field preconditions: modulus mismatch, inverse of zero,
/// non-canonical encodings, rejected moduli.
class FieldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Interned prime modulus. One instance per prime for the whole process, so
/// elements can compare their modulus tag by pointer.
class FieldModulus {
public:
    /// Small test field, p = 97.
    static const FieldModulus& p97();
    /// Mid-scale test field, p = 2^61 - 1.
    static const FieldModulus& p61();
    /// Production field: the 254-bit BN254 scalar prime.
    static const FieldModulus& bn254();

    /// Interns an arbitrary modulus. Primality is verified by trial division
    /// for tiny values and Miller-Rabin for anything that fits in 64 bits;
    /// wider values are only accepted for the known production prime.
    static const FieldModulus& intern(const U256& prime);

    /// Resolves "p97" | "p61" | "default". Returns nullptr for unknown names.
    static const FieldModulus* by_name(std::string_view name);

    const U256& prime() const { return prime_; }
    unsigned bit_length() const { return bits_; }
    /// Serialized width of one element: ceil(bit_length / 8).
    unsigned byte_length() const { return bytes_; }
    const std::string& decimal() const { return decimal_; }

    FieldModulus(const FieldModulus&) = delete;
    FieldModulus& operator=(const FieldModulus&) = delete;

private:
    explicit FieldModulus(const U256& p);

    U256 prime_;
    unsigned bits_ = 0;
    unsigned bytes_ = 0;
    std::string decimal_;
};

/// Integer in [0, p), tagged with its modulus. Arithmetic between elements of
/// different moduli throws; there is no silent coercion.
class FieldElement {
public:
    FieldElement(const U256& value, const FieldModulus& m)
        : value_(value % m.prime()), modulus_(&m) {}

    static FieldElement zero(const FieldModulus& m) { return {U256(0), m}; }
    static FieldElement one(const FieldModulus& m) { return {U256(1), m}; }
    static FieldElement from_u64(std::uint64_t v, const FieldModulus& m) {
        return {U256(v), m};
    }

    const U256& value() const { return value_; }
    const FieldModulus& modulus() const { return *modulus_; }
    bool is_zero() const { return value_.is_zero(); }

    FieldElement operator+(const FieldElement& rhs) const;
    FieldElement operator-(const FieldElement& rhs) const;
    FieldElement operator*(const FieldElement& rhs) const;

    /// Multiplicative inverse via Fermat. Throws FieldError for zero.
    FieldElement inverse() const;
    FieldElement negate() const;

    /// Elements of different moduli are unequal, never an error.
    bool operator==(const FieldElement& rhs) const {
        return modulus_ == rhs.modulus_ && value_ == rhs.value_;
    }
    bool operator!=(const FieldElement& rhs) const { return !(*this == rhs); }

    /// Fixed-width big-endian encoding, byte_length() bytes.
    std::vector<std::uint8_t> to_bytes() const;
    /// Strict decode: size must equal byte_length() and the value must be
    /// canonical (< p).
    static FieldElement from_bytes(std::span<const std::uint8_t> bytes,
                                   const FieldModulus& m);

    std::string to_decimal() const { return value_.str(); }
    static FieldElement from_decimal(std::string_view text, const FieldModulus& m);

private:
    U256 value_;
    const FieldModulus* modulus_;
};

}  // namespace rln
