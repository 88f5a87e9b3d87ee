// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/proof.hpp"
#include "rln/registry.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rln {

enum class VerdictKind {
    relay,
    drop_stale,
    drop_future_epoch,
    drop_invalid_proof,
    drop_unknown_root,
    drop_duplicate,
    spam,
};

std::string_view to_string(VerdictKind kind);

/// Outcome of validating one message. Exactly one verdict per message; spam
/// carries the secret recovered from the conflicting shares.
struct ValidationVerdict {
    VerdictKind kind = VerdictKind::relay;
    std::optional<FieldElement> recovered_secret;
};

/// Simulated clock: integer time units, a fixed epoch length, and the
/// tolerated publish/validate epoch distance. `skew` models a node whose
/// clock runs ahead (positive) or behind (negative) of simulated time.
struct NodeClock {
    std::int64_t now = 0;
    std::int64_t epoch_length = 10;
    std::int64_t max_epoch_gap = 1;
    std::int64_t skew = 0;

    Epoch current_epoch() const;
};

/// A routed message: opaque payload plus its rate-limit proof bundle. The id
/// is recomputable from the contents.
struct RelayMessage {
    std::vector<std::uint8_t> payload;
    ProofBundle bundle;
    FieldElement message_id;
};

FieldElement compute_message_id(std::span<const std::uint8_t> payload,
                                const RateLimitStatement& statement);

/// Wire form: u32be |payload| || payload || bundle wire bytes.
std::vector<std::uint8_t> serialize_message(const RelayMessage& message);
RelayMessage parse_message(std::span<const std::uint8_t> bytes,
                           const FieldModulus& m);

/// Per-epoch memory of observed shares, keyed by nullifier. Detects
/// double-signaling: a second share with the same nullifier but a different
/// evaluation point proves a rate violation.
class NullifierLog {
public:
    struct Entry {
        FieldElement x;
        FieldElement y;
    };

    explicit NullifierLog(std::uint64_t retention_epochs = 2);

    /// Stores the share; each (x, y) at most once per nullifier. Returns
    /// false when the exact pair was already present.
    bool insert(const RlnShare& share);

    /// Observed pairs for (epoch, nullifier), or nullptr.
    const std::vector<Entry>* find(Epoch epoch, const FieldElement& nullifier) const;

    /// Drops epochs older than the retention window ending at `current`
    /// (retention 2 keeps the current and previous epoch).
    void prune(Epoch current);

    std::size_t share_count() const;
    std::size_t epoch_count() const { return by_epoch_.size(); }
    std::uint64_t retention() const { return retention_; }

private:
    std::uint64_t retention_;
    std::map<std::uint64_t, std::map<U256, std::vector<Entry>>> by_epoch_;
};

class PublishError : public std::runtime_error {
public:
    enum class Reason { not_registered, rate_guard };

    PublishError(Reason reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

struct RelayNodeOptions {
    std::uint64_t log_retention = 2;
    /// Adversarial mode: keep publishing with the last credentials that
    /// contained our leaf even after the registry deleted it. Honest nodes
    /// refuse to publish once revoked.
    bool stale_publish = false;
};

/// One relay participant: mirrors the membership tree from registry update
/// notifications, publishes with proofs attached, and validates incoming
/// messages through the pinned pipeline
///   epoch gap -> root window -> proof -> nullifier log.
///
/// Driven single-threaded by timestamped events; all cross-node interaction
/// happens through messages and the serialized registry.
class RelayNode {
public:
    RelayNode(std::string id, NodeClock clock, Registry& registry,
              const BackendRegistry& backends, unsigned tree_depth,
              const FieldModulus& m, RelayNodeOptions options = {});

    const std::string& id() const { return id_; }
    NodeClock& clock() { return clock_; }
    const NodeClock& clock() const { return clock_; }

    /// Installs the node's registered identity and leaf position.
    void adopt_identity(const IdentityKeypair& identity, std::uint64_t leaf_index);
    bool has_identity() const { return identity_.has_value(); }
    const IdentityKeypair& identity() const { return *identity_; }

    /// Applies a membership update; out-of-order sequences are buffered and
    /// replays are ignored, so broadcast delivery order does not matter.
    void apply_update(const MembershipUpdate& update);

    /// Builds, proves, and self-logs a message for the current epoch. At most
    /// one publish per epoch unless the caller overrides the local guard.
    RelayMessage publish(std::span<const std::uint8_t> payload,
                         bool rate_override = false);

    /// The routing-time pipeline; the first failing check wins. All
    /// adversarial input maps to a verdict, never an exception.
    ValidationVerdict validate(const RelayMessage& message,
                               std::int64_t arrival_time);

    struct SlashAttempt {
        bool succeeded = false;
        std::int64_t payout = 0;
    };

    /// Reports spam to the registry. Losing the race to a faster detector is
    /// expected and surfaces as a no-op.
    SlashAttempt report_spam(const ValidationVerdict& verdict);

    void prune_log() { log_.prune(clock_.current_epoch()); }

    /// Gossip dedup per message id.
    bool already_seen(const FieldElement& message_id) const;
    void note_seen(const FieldElement& message_id);
    /// True the first time; later calls return false (relay-once).
    bool mark_forwarded(const FieldElement& message_id);

    FieldElement local_root() const { return tree_.root(); }
    const MembershipTree& local_tree() const { return tree_; }
    const NullifierLog& log() const { return log_; }
    std::uint64_t proof_verifications() const { return proof_verifications_; }

private:
    bool leaf_is_live() const;

    std::string id_;
    NodeClock clock_;
    Registry* registry_;
    const BackendRegistry* backends_;
    RelayNodeOptions options_;

    MembershipTree tree_;  // local mirror of the membership tree
    std::optional<IdentityKeypair> identity_;
    std::optional<std::uint64_t> leaf_index_;
    std::optional<std::uint64_t> last_publish_epoch_;
    // last (root, path) observed while our leaf was still present
    std::optional<std::pair<FieldElement, MerklePath>> cached_credentials_;

    NullifierLog log_;
    std::set<U256> seen_;
    std::set<U256> forwarded_;
    std::map<std::uint64_t, MembershipUpdate> pending_updates_;
    std::uint64_t next_update_seq_ = 1;
    std::uint64_t proof_verifications_ = 0;
};

}  // namespace rln
