// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/field.hpp"
#include "rln/hash.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rln {

/// Rate-limit period, counted in epoch-lengths since time zero.
struct Epoch {
    std::uint64_t index = 0;

    /// The index embedded directly into the field (reduced for tiny test
    /// moduli; the embedding is injective for every practical index).
    FieldElement as_field(const FieldModulus& m) const {
        return FieldElement::from_u64(index, m);
    }

    friend bool operator==(const Epoch&, const Epoch&) = default;
};

/// Member identity: a secret field element and its public commitment
/// H_leaf(secret), the value registered in the membership tree.
struct IdentityKeypair {
    FieldElement secret;
    FieldElement commitment;
};

/// One epoch-bound share of a member's secret: the evaluation (x, y) of the
/// line y = a0 + a1*x at x = H(message), plus the public nullifier H(a1).
struct RlnShare {
    Epoch epoch;
    FieldElement x;
    FieldElement y;
    FieldElement nullifier;

    friend bool operator==(const RlnShare&, const RlnShare&) = default;
};

/// Raised by recover_secret when the two shares cannot be interpolated.
class ShareError : public std::invalid_argument {
public:
    enum class Kind { epoch_mismatch, nullifier_mismatch, identical_x };

    ShareError(Kind kind, const std::string& what)
        : std::invalid_argument(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Public commitment of a secret: hash_to_field("rln/leaf", [secret]).
FieldElement identity_commitment(const FieldElement& secret);

/// Seeded keypair generation: uniform nonzero secret by rejection sampling
/// from a mt19937_64 stream, so equal seeds reproduce equal keys everywhere.
IdentityKeypair keygen(std::uint64_t seed, const FieldModulus& m);

/// System-entropy keypair.
IdentityKeypair keygen(const FieldModulus& m);

/// Epoch-bound line slope: hash_to_field("rln/a1", [secret, epoch]).
FieldElement derive_a1(const FieldElement& secret, Epoch epoch);

/// a0 + a1 * x. Exposed so the share algebra is testable with injected
/// slopes and evaluation points, bypassing the hash derivations.
FieldElement eval_line(const FieldElement& a0, const FieldElement& a1,
                       const FieldElement& x);

/// Produces the member's share for a payload in an epoch:
///   x = H_x(payload), y = secret + a1 * x, nullifier = H_nul(a1).
RlnShare make_share(const FieldElement& secret, Epoch epoch,
                    std::span<const std::uint8_t> payload);

/// Interpolates a0 from two shares of the same epoch and nullifier:
///   a0 = (x2*y1 - x1*y2) / (x2 - x1).
/// Shares with identical x carry no new information and are rejected as a
/// duplicate, not spam.
FieldElement recover_secret(const RlnShare& s1, const RlnShare& s2);

/// Test oracle: true iff the share is exactly what make_share would produce
/// for this secret. The protocol itself never sees secrets at validation.
bool verify_share_against_secret(const FieldElement& secret,
                                 const RlnShare& share);

/// Wire form: epoch.index u64be || x || y || nullifier, each field value
/// fixed-width big-endian at the modulus byte width.
std::vector<std::uint8_t> serialize_share(const RlnShare& share);
RlnShare parse_share(std::span<const std::uint8_t> bytes, const FieldModulus& m);

}  // namespace rln
