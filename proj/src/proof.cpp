// SPDX-License-Identifier: Apache-2.0
#include "rln/proof.hpp"

#include "rln/hash.hpp"

namespace rln {
namespace {

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64be(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t read_u64be(std::span<const std::uint8_t> bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
    return v;
}

void put_field(std::vector<std::uint8_t>& out, const FieldElement& fe) {
    auto bytes = fe.to_bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
}

}  // namespace

std::string_view to_string(ProofRelation relation) {
    switch (relation) {
        case ProofRelation::leaf_commitment: return "leaf-commitment";
        case ProofRelation::membership_path: return "membership-path";
        case ProofRelation::share_equation: return "share-equation";
        case ProofRelation::nullifier_binding: return "nullifier-binding";
    }
    return "unknown";
}

std::optional<ProofRelation> find_violated_relation(
    const RateLimitStatement& statement, const FieldElement& secret,
    const FieldElement& leaf, const MerklePath& path) {
    const FieldModulus& m = statement.merkle_root.modulus();
    if (leaf != identity_commitment(secret))
        return ProofRelation::leaf_commitment;
    if (!verify_path(statement.merkle_root, leaf, path))
        return ProofRelation::membership_path;
    FieldElement a1 = derive_a1(secret, statement.epoch);
    if (statement.y != eval_line(secret, a1, statement.x))
        return ProofRelation::share_equation;
    if (statement.nullifier != hash_to_field(kDomainNullifier, {a1}, m))
        return ProofRelation::nullifier_binding;
    return std::nullopt;
}

// --- TransparentBackend ------------------------------------------------
//
// Proof bytes: secret || leaf || leaf_index u64be || u8 |siblings| ||
// siblings..., all field values fixed-width big-endian.

std::vector<std::uint8_t> TransparentBackend::prove(
    const RateLimitStatement& statement,
    const RateLimitWitness& witness) const {
    FieldElement leaf = identity_commitment(witness.secret);
    if (auto violated =
            find_violated_relation(statement, witness.secret, leaf, witness.path)) {
        throw ProofError(*violated,
                         std::string("witness violates relation ") +
                             std::string(to_string(*violated)));
    }
    std::vector<std::uint8_t> out;
    const unsigned width = statement.merkle_root.modulus().byte_length();
    out.reserve(2 * width + 9 + witness.path.siblings.size() * width);
    put_field(out, witness.secret);
    put_field(out, leaf);
    put_u64be(out, witness.path.leaf_index);
    out.push_back(static_cast<std::uint8_t>(witness.path.siblings.size()));
    for (const FieldElement& sibling : witness.path.siblings)
        put_field(out, sibling);
    return out;
}

bool TransparentBackend::verify(
    const RateLimitStatement& statement,
    std::span<const std::uint8_t> proof_bytes) const {
    const FieldModulus& m = statement.merkle_root.modulus();
    const std::size_t width = m.byte_length();
    try {
        if (proof_bytes.size() < 2 * width + 9) return false;
        FieldElement secret =
            FieldElement::from_bytes(proof_bytes.subspan(0, width), m);
        FieldElement leaf =
            FieldElement::from_bytes(proof_bytes.subspan(width, width), m);
        std::size_t at = 2 * width;
        MerklePath path;
        path.leaf_index = read_u64be(proof_bytes.subspan(at, 8));
        at += 8;
        const std::size_t sibling_count = proof_bytes[at++];
        if (proof_bytes.size() != at + sibling_count * width) return false;
        path.siblings.reserve(sibling_count);
        for (std::size_t i = 0; i < sibling_count; ++i, at += width) {
            path.siblings.push_back(
                FieldElement::from_bytes(proof_bytes.subspan(at, width), m));
        }
        return !find_violated_relation(statement, secret, leaf, path);
    } catch (const FieldError&) {
        return false;  // adversarial bytes, not an error
    }
}

// --- BackendRegistry ----------------------------------------------------

void BackendRegistry::add(std::shared_ptr<const ProofBackend> backend) {
    backends_.push_back(std::move(backend));
}

const ProofBackend* BackendRegistry::find(std::string_view id) const {
    for (const auto& backend : backends_) {
        if (backend->id() == id) return backend.get();
    }
    return nullptr;
}

BackendRegistry BackendRegistry::with_defaults() {
    BackendRegistry registry;
    registry.add(std::make_shared<TransparentBackend>());
    return registry;
}

ProofBundle prove(const RateLimitStatement& statement,
                  const RateLimitWitness& witness,
                  const ProofBackend& backend) {
    return ProofBundle{statement, std::string(backend.id()),
                       backend.prove(statement, witness)};
}

bool verify(const ProofBundle& bundle, const BackendRegistry& backends) {
    const ProofBackend* backend = backends.find(bundle.backend_id);
    if (backend == nullptr)
        throw UnknownBackendError("unknown proof backend: " + bundle.backend_id);
    return backend->verify(bundle.statement, bundle.proof_bytes);
}

FieldElement statement_digest(const RateLimitStatement& statement) {
    const FieldModulus& m = statement.merkle_root.modulus();
    return hash_to_field(kDomainStatement,
                         {statement.merkle_root, statement.epoch.as_field(m),
                          statement.x, statement.y, statement.nullifier},
                         m);
}

std::vector<std::uint8_t> serialize_bundle(const ProofBundle& bundle) {
    if (bundle.backend_id.empty() || bundle.backend_id.size() > 255)
        throw FieldError("backend id must be 1..255 bytes");
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(bundle.backend_id.size()));
    out.insert(out.end(), bundle.backend_id.begin(), bundle.backend_id.end());
    const RateLimitStatement& st = bundle.statement;
    put_field(out, st.merkle_root);
    put_u64be(out, st.epoch.index);
    put_field(out, st.x);
    put_field(out, st.y);
    put_field(out, st.nullifier);
    put_u32be(out, static_cast<std::uint32_t>(bundle.proof_bytes.size()));
    out.insert(out.end(), bundle.proof_bytes.begin(), bundle.proof_bytes.end());
    return out;
}

ProofBundle parse_bundle(std::span<const std::uint8_t> bytes,
                         const FieldModulus& m) {
    const std::size_t width = m.byte_length();
    if (bytes.empty()) throw FieldError("bundle encoding truncated");
    const std::size_t id_len = bytes[0];
    std::size_t at = 1;
    if (id_len == 0 || bytes.size() < at + id_len + 4 * width + 12)
        throw FieldError("bundle encoding truncated");
    std::string backend_id(reinterpret_cast<const char*>(bytes.data()) + at,
                           id_len);
    at += id_len;
    FieldElement root = FieldElement::from_bytes(bytes.subspan(at, width), m);
    at += width;
    Epoch epoch{read_u64be(bytes.subspan(at, 8))};
    at += 8;
    FieldElement x = FieldElement::from_bytes(bytes.subspan(at, width), m);
    at += width;
    FieldElement y = FieldElement::from_bytes(bytes.subspan(at, width), m);
    at += width;
    FieldElement nul = FieldElement::from_bytes(bytes.subspan(at, width), m);
    at += width;
    std::uint32_t proof_len = 0;
    for (int i = 0; i < 4; ++i) proof_len = (proof_len << 8) | bytes[at++];
    if (bytes.size() != at + proof_len)
        throw FieldError("bundle encoding has wrong length");
    return ProofBundle{
        RateLimitStatement{root, epoch, x, y, nul},
        std::move(backend_id),
        std::vector<std::uint8_t>(bytes.begin() + at, bytes.end()),
    };
}

namespace {

std::uint8_t verify_one(const ProofBundle& bundle,
                        const BackendRegistry& backends) {
    const ProofBackend* backend = backends.find(bundle.backend_id);
    if (backend == nullptr) return 0;
    return backend->verify(bundle.statement, bundle.proof_bytes) ? 1 : 0;
}

}  // namespace

std::vector<std::uint8_t> verify_batch_serial(
    std::span<const ProofBundle> bundles, const BackendRegistry& backends) {
    std::vector<std::uint8_t> results(bundles.size(), 0);
    for (std::size_t i = 0; i < bundles.size(); ++i)
        results[i] = verify_one(bundles[i], backends);
    return results;
}

std::vector<std::uint8_t> verify_batch_parallel(
    std::span<const ProofBundle> bundles, const BackendRegistry& backends) {
    std::vector<std::uint8_t> results(bundles.size(), 0);
    const std::int64_t n = static_cast<std::int64_t>(bundles.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i)
        results[i] = verify_one(bundles[i], backends);
    return results;
}

}  // namespace rln
