// SPDX-License-Identifier: Apache-2.0
#include "rln/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstring>
#include <stdexcept>

namespace rln {
namespace {

constexpr std::size_t kWideBytes = 56;  // 448-bit pre-reduction integer
constexpr std::size_t kPayloadChunk = 31;

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                   nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("SHA-256 failed");
    }
    return out;
}

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t read_u32be(std::span<const std::uint8_t> bytes, std::size_t at) {
    return (static_cast<std::uint32_t>(bytes[at]) << 24) |
           (static_cast<std::uint32_t>(bytes[at + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[at + 3]);
}

}  // namespace

std::vector<std::uint8_t> encode_hash_input(std::string_view domain,
                                            std::span<const FieldElement> inputs,
                                            const FieldModulus& m) {
    if (domain.empty()) throw FieldError("hash domain must be non-empty");
    for (const FieldElement& fe : inputs) {
        if (&fe.modulus() != &m)
            throw FieldError("hash input modulus mismatch");
    }
    std::vector<std::uint8_t> out;
    out.reserve(8 + domain.size() + inputs.size() * m.byte_length());
    put_u32be(out, static_cast<std::uint32_t>(domain.size()));
    out.insert(out.end(), domain.begin(), domain.end());
    put_u32be(out, static_cast<std::uint32_t>(inputs.size()));
    for (const FieldElement& fe : inputs) {
        auto bytes = fe.to_bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

DecodedHashInput decode_hash_input(std::span<const std::uint8_t> bytes,
                                   const FieldModulus& m) {
    if (bytes.size() < 8) throw FieldError("hash input framing truncated");
    std::uint32_t domain_len = read_u32be(bytes, 0);
    if (domain_len == 0) throw FieldError("hash domain must be non-empty");
    if (bytes.size() < 8 + domain_len)
        throw FieldError("hash input framing truncated");
    DecodedHashInput decoded;
    decoded.domain.assign(reinterpret_cast<const char*>(bytes.data()) + 4,
                          domain_len);
    std::uint32_t count = read_u32be(bytes, 4 + domain_len);
    const std::size_t width = m.byte_length();
    const std::size_t expected = 8 + domain_len + std::size_t(count) * width;
    if (bytes.size() != expected)
        throw FieldError("hash input framing has wrong length");
    std::size_t at = 8 + domain_len;
    decoded.inputs.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i, at += width) {
        decoded.inputs.push_back(
            FieldElement::from_bytes(bytes.subspan(at, width), m));
    }
    return decoded;
}

FieldElement hash_to_field(std::string_view domain,
                           std::span<const FieldElement> inputs,
                           const FieldModulus& m) {
    const auto enc = encode_hash_input(domain, inputs, m);

    std::vector<std::uint8_t> block(1 + enc.size());
    std::memcpy(block.data() + 1, enc.data(), enc.size());
    block[0] = 0x00;
    const auto d0 = sha256(block);
    block[0] = 0x01;
    const auto d1 = sha256(block);

    std::array<std::uint8_t, kWideBytes> wide{};
    std::memcpy(wide.data(), d0.data(), d0.size());
    std::memcpy(wide.data() + d0.size(), d1.data(), kWideBytes - d0.size());

    U512 v = 0;
    for (std::uint8_t b : wide) {
        v <<= 8;
        v |= b;
    }
    v %= U512(m.prime());
    return {v.convert_to<U256>(), m};
}

FieldElement hash_to_field(std::string_view domain,
                           std::initializer_list<FieldElement> inputs,
                           const FieldModulus& m) {
    return hash_to_field(domain, std::span<const FieldElement>(inputs.begin(), inputs.size()), m);
}

std::vector<FieldElement> payload_blocks(std::span<const std::uint8_t> payload,
                                         const FieldModulus& m) {
    std::vector<FieldElement> blocks;
    blocks.reserve((payload.size() + kPayloadChunk - 1) / kPayloadChunk);
    for (std::size_t at = 0; at < payload.size(); at += kPayloadChunk) {
        const std::size_t n = std::min(kPayloadChunk, payload.size() - at);
        U256 v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            v <<= 8;
            v |= payload[at + i];
        }
        blocks.emplace_back(v, m);
    }
    return blocks;
}

FieldElement hash_message_to_x(std::span<const std::uint8_t> payload,
                               const FieldModulus& m) {
    const auto blocks = payload_blocks(payload, m);
    return hash_to_field(kDomainX, blocks, m);
}

}  // namespace rln
