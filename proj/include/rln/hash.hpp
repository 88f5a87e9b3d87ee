// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/field.hpp"

#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rln {

// Domain separation tags. Fixed protocol constants; distinct tags give
// independent hash functions.
inline constexpr std::string_view kDomainLeaf = "rln/leaf";
inline constexpr std::string_view kDomainA1 = "rln/a1";
inline constexpr std::string_view kDomainNullifier = "rln/nul";
inline constexpr std::string_view kDomainX = "rln/x";
inline constexpr std::string_view kDomainNode = "rln/node";
inline constexpr std::string_view kDomainStatement = "rln/stmt";
inline constexpr std::string_view kDomainMessageId = "rln/msgid";

/// Canonical length-prefixed framing hashed by hash_to_field:
///   u32be(|domain|) || domain || u32be(count) || value_0 || ... || value_n-1
/// with each value fixed-width big-endian at the modulus byte width. The
/// framing parses back uniquely given the modulus.
std::vector<std::uint8_t> encode_hash_input(std::string_view domain,
                                            std::span<const FieldElement> inputs,
                                            const FieldModulus& m);

struct DecodedHashInput {
    std::string domain;
    std::vector<FieldElement> inputs;
};

/// Inverse of encode_hash_input. Throws FieldError on any framing defect.
DecodedHashInput decode_hash_input(std::span<const std::uint8_t> bytes,
                                   const FieldModulus& m);

/// Hashes (domain, inputs) into the field. SHA-256 expanded to 56 bytes with
/// a one-byte counter prefix, interpreted big-endian and reduced mod p; the
/// 448-bit pre-image keeps the reduction bias below 2^-194 for the
/// production modulus. Deterministic and order-sensitive. The domain must be
/// non-empty. An algebraic hash can replace this behind the same signature.
FieldElement hash_to_field(std::string_view domain,
                           std::span<const FieldElement> inputs,
                           const FieldModulus& m);
FieldElement hash_to_field(std::string_view domain,
                           std::initializer_list<FieldElement> inputs,
                           const FieldModulus& m);

/// Splits a payload into 31-byte big-endian chunks reduced into the field.
/// Injective for the production modulus (chunks stay below 2^248 < p).
std::vector<FieldElement> payload_blocks(std::span<const std::uint8_t> payload,
                                         const FieldModulus& m);

/// Message evaluation point: hash_to_field("rln/x", payload_blocks(payload)).
/// Stable across runs and platforms; the empty payload is allowed.
FieldElement hash_message_to_x(std::span<const std::uint8_t> payload,
                               const FieldModulus& m);

}  // namespace rln
