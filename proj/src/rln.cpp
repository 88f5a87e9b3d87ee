// SPDX-License-Identifier: Apache-2.0
#include "rln/rln.hpp"

#include <random>

namespace rln {
namespace {

void put_u64be(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t read_u64be(std::span<const std::uint8_t> bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
    return v;
}

FieldElement sample_nonzero(std::mt19937_64& rng, const FieldModulus& m) {
    const unsigned words = (m.bit_length() + 63) / 64;
    const unsigned top_bits = m.bit_length() - 64 * (words - 1);
    const std::uint64_t top_mask =
        top_bits >= 64 ? ~0ull : ((1ull << top_bits) - 1);
    for (;;) {
        U256 v = 0;
        for (unsigned w = 0; w < words; ++w) {
            std::uint64_t draw = rng();
            if (w + 1 == words) draw &= top_mask;
            v |= U256(draw) << (64 * w);
        }
        if (!v.is_zero() && v < m.prime()) return {v, m};
    }
}

}  // namespace

FieldElement identity_commitment(const FieldElement& secret) {
    return hash_to_field(kDomainLeaf, {secret}, secret.modulus());
}

IdentityKeypair keygen(std::uint64_t seed, const FieldModulus& m) {
    std::mt19937_64 rng(seed);
    FieldElement secret = sample_nonzero(rng, m);
    return {secret, identity_commitment(secret)};
}

IdentityKeypair keygen(const FieldModulus& m) {
    std::random_device rd;
    std::uint64_t seed = (std::uint64_t(rd()) << 32) ^ rd();
    return keygen(seed, m);
}

FieldElement derive_a1(const FieldElement& secret, Epoch epoch) {
    const FieldModulus& m = secret.modulus();
    return hash_to_field(kDomainA1, {secret, epoch.as_field(m)}, m);
}

FieldElement eval_line(const FieldElement& a0, const FieldElement& a1,
                       const FieldElement& x) {
    return a0 + a1 * x;
}

RlnShare make_share(const FieldElement& secret, Epoch epoch,
                    std::span<const std::uint8_t> payload) {
    const FieldModulus& m = secret.modulus();
    FieldElement a1 = derive_a1(secret, epoch);
    FieldElement x = hash_message_to_x(payload, m);
    return RlnShare{
        epoch,
        x,
        eval_line(secret, a1, x),
        hash_to_field(kDomainNullifier, {a1}, m),
    };
}

FieldElement recover_secret(const RlnShare& s1, const RlnShare& s2) {
    if (s1.epoch != s2.epoch)
        throw ShareError(ShareError::Kind::epoch_mismatch,
                         "shares belong to different epochs");
    if (s1.nullifier != s2.nullifier)
        throw ShareError(ShareError::Kind::nullifier_mismatch,
                         "shares carry different nullifiers");
    if (s1.x == s2.x)
        throw ShareError(ShareError::Kind::identical_x,
                         "shares have identical evaluation points; "
                         "duplicate share, not a rate violation");
    // Two points fix the line: a0 = (x2*y1 - x1*y2) / (x2 - x1).
    FieldElement numerator = s2.x * s1.y - s1.x * s2.y;
    FieldElement denominator = s2.x - s1.x;
    return numerator * denominator.inverse();
}

bool verify_share_against_secret(const FieldElement& secret,
                                 const RlnShare& share) {
    const FieldModulus& m = secret.modulus();
    FieldElement a1 = derive_a1(secret, share.epoch);
    return share.y == eval_line(secret, a1, share.x) &&
           share.nullifier == hash_to_field(kDomainNullifier, {a1}, m);
}

std::vector<std::uint8_t> serialize_share(const RlnShare& share) {
    const unsigned width = share.x.modulus().byte_length();
    std::vector<std::uint8_t> out;
    out.reserve(8 + 3 * width);
    put_u64be(out, share.epoch.index);
    for (const FieldElement* fe : {&share.x, &share.y, &share.nullifier}) {
        auto bytes = fe->to_bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

RlnShare parse_share(std::span<const std::uint8_t> bytes,
                     const FieldModulus& m) {
    const std::size_t width = m.byte_length();
    if (bytes.size() != 8 + 3 * width)
        throw FieldError("share encoding has wrong length");
    Epoch epoch{read_u64be(bytes)};
    FieldElement x = FieldElement::from_bytes(bytes.subspan(8, width), m);
    FieldElement y = FieldElement::from_bytes(bytes.subspan(8 + width, width), m);
    FieldElement nul =
        FieldElement::from_bytes(bytes.subspan(8 + 2 * width, width), m);
    return RlnShare{epoch, x, y, nul};
}

}  // namespace rln
