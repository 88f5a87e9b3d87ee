// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/field.hpp"
#include "rln/merkle.hpp"
#include "rln/rln.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rln {

/// Public inputs of the rate-limit proof.
struct RateLimitStatement {
    FieldElement merkle_root;
    Epoch epoch;
    FieldElement x;
    FieldElement y;
    FieldElement nullifier;

    friend bool operator==(const RateLimitStatement&,
                           const RateLimitStatement&) = default;
};

/// Private inputs: the member secret and its membership witness.
struct RateLimitWitness {
    FieldElement secret;
    MerklePath path;
};

/// The proof object attached to each published message.
struct ProofBundle {
    RateLimitStatement statement;
    std::string backend_id;
    std::vector<std::uint8_t> proof_bytes;
};

/// The four relations a valid (statement, witness) pair satisfies. The leaf
/// commitment relation is only independently observable on the verifier side,
/// where the claimed leaf travels inside the proof encoding.
enum class ProofRelation {
    leaf_commitment,   // leaf == H_leaf(secret)
    membership_path,   // verify_path(root, leaf, path)
    share_equation,    // y == secret + a1 * x
    nullifier_binding  // nullifier == H_nul(a1)
};

std::string_view to_string(ProofRelation relation);

/// Thrown by prove() when the witness is inconsistent with the statement.
/// Signals a caller bug, one distinct reason per relation.
class ProofError : public std::invalid_argument {
public:
    ProofError(ProofRelation relation, const std::string& what)
        : std::invalid_argument(what), relation_(relation) {}
    ProofRelation relation() const { return relation_; }

private:
    ProofRelation relation_;
};

class UnknownBackendError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Proving backend interface. The simulation backend checks the exact RLN
/// relations without zero-knowledge; a SNARK prover slots in behind the same
/// surface without touching any call site.
class ProofBackend {
public:
    virtual ~ProofBackend() = default;

    virtual std::string_view id() const = 0;

    /// Produces proof bytes for a consistent (statement, witness) pair.
    /// Throws ProofError naming the first violated relation otherwise.
    virtual std::vector<std::uint8_t> prove(
        const RateLimitStatement& statement,
        const RateLimitWitness& witness) const = 0;

    /// True iff the proof bytes attest the statement. Malformed bytes are
    /// expected adversarial input on a relay path and return false, never
    /// throw.
    virtual bool verify(const RateLimitStatement& statement,
                        std::span<const std::uint8_t> proof_bytes) const = 0;
};

/// Relation-checking simulation backend, id "sim-transparent". The witness is
/// serialized into the proof bytes, so bundles are NOT hiding and NOT
/// zero-knowledge; they preserve the statement semantics and interface only.
class TransparentBackend final : public ProofBackend {
public:
    static constexpr std::string_view kId = "sim-transparent";

    std::string_view id() const override { return kId; }
    std::vector<std::uint8_t> prove(
        const RateLimitStatement& statement,
        const RateLimitWitness& witness) const override;
    bool verify(const RateLimitStatement& statement,
                std::span<const std::uint8_t> proof_bytes) const override;
};

/// Backend lookup by id.
class BackendRegistry {
public:
    void add(std::shared_ptr<const ProofBackend> backend);
    const ProofBackend* find(std::string_view id) const;

    /// Registry holding the simulation backend.
    static BackendRegistry with_defaults();

private:
    std::vector<std::shared_ptr<const ProofBackend>> backends_;
};

/// Checks witness consistency against the statement; empty when all four
/// relations hold. Shared by prover and simulation verifier.
std::optional<ProofRelation> find_violated_relation(
    const RateLimitStatement& statement, const FieldElement& secret,
    const FieldElement& leaf, const MerklePath& path);

ProofBundle prove(const RateLimitStatement& statement,
                  const RateLimitWitness& witness, const ProofBackend& backend);

/// Verifies a bundle under its named backend. Unknown backend ids throw;
/// malformed proof bytes return false.
bool verify(const ProofBundle& bundle, const BackendRegistry& backends);

/// Deduplication and logging key:
/// hash_to_field("rln/stmt", [root, epoch, x, y, nullifier]).
FieldElement statement_digest(const RateLimitStatement& statement);

/// Bundle wire format: u8 |backend-id| || backend-id || statement fields
/// (root, epoch u64be, x, y, nullifier; values fixed-width big-endian) ||
/// u32be |proof| || proof bytes.
std::vector<std::uint8_t> serialize_bundle(const ProofBundle& bundle);
ProofBundle parse_bundle(std::span<const std::uint8_t> bytes,
                         const FieldModulus& m);

/// Verifies a batch of independent bundles. Verification is pure, so the
/// parallel path distributes bundles across OpenMP threads and returns
/// bit-identical results to the serial path, which is kept as the reference.
/// Unknown backend ids count as failed verification here.
std::vector<std::uint8_t> verify_batch_serial(
    std::span<const ProofBundle> bundles, const BackendRegistry& backends);
std::vector<std::uint8_t> verify_batch_parallel(
    std::span<const ProofBundle> bundles, const BackendRegistry& backends);

}  // namespace rln
