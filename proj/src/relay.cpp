// SPDX-License-Identifier: Apache-2.0
#include "rln/relay.hpp"

#include "rln/hash.hpp"

namespace rln {

std::string_view to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::relay: return "relay";
        case VerdictKind::drop_stale: return "drop-stale";
        case VerdictKind::drop_future_epoch: return "drop-future-epoch";
        case VerdictKind::drop_invalid_proof: return "drop-invalid-proof";
        case VerdictKind::drop_unknown_root: return "drop-unknown-root";
        case VerdictKind::drop_duplicate: return "drop-duplicate";
        case VerdictKind::spam: return "spam";
    }
    return "unknown";
}

Epoch NodeClock::current_epoch() const {
    std::int64_t local = now + skew;
    if (local < 0) local = 0;
    return Epoch{static_cast<std::uint64_t>(local / epoch_length)};
}

FieldElement compute_message_id(std::span<const std::uint8_t> payload,
                                const RateLimitStatement& statement) {
    const FieldModulus& m = statement.merkle_root.modulus();
    std::vector<FieldElement> inputs = payload_blocks(payload, m);
    inputs.push_back(statement_digest(statement));
    return hash_to_field(kDomainMessageId, inputs, m);
}

std::vector<std::uint8_t> serialize_message(const RelayMessage& message) {
    std::vector<std::uint8_t> out;
    const std::uint32_t n = static_cast<std::uint32_t>(message.payload.size());
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(n >> shift));
    out.insert(out.end(), message.payload.begin(), message.payload.end());
    auto bundle = serialize_bundle(message.bundle);
    out.insert(out.end(), bundle.begin(), bundle.end());
    return out;
}

RelayMessage parse_message(std::span<const std::uint8_t> bytes,
                           const FieldModulus& m) {
    if (bytes.size() < 4) throw FieldError("message encoding truncated");
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n = (n << 8) | bytes[i];
    if (bytes.size() < 4 + std::size_t(n))
        throw FieldError("message encoding truncated");
    std::vector<std::uint8_t> payload(bytes.begin() + 4, bytes.begin() + 4 + n);
    ProofBundle bundle = parse_bundle(bytes.subspan(4 + n), m);
    FieldElement id = compute_message_id(payload, bundle.statement);
    return RelayMessage{std::move(payload), std::move(bundle), id};
}

// --- NullifierLog -------------------------------------------------------

NullifierLog::NullifierLog(std::uint64_t retention_epochs)
    : retention_(retention_epochs) {
    if (retention_epochs == 0)
        throw std::invalid_argument("log retention must cover at least the current epoch");
}

bool NullifierLog::insert(const RlnShare& share) {
    auto& entries = by_epoch_[share.epoch.index][share.nullifier.value()];
    for (const Entry& entry : entries) {
        if (entry.x == share.x && entry.y == share.y) return false;
    }
    entries.push_back({share.x, share.y});
    return true;
}

const std::vector<NullifierLog::Entry>* NullifierLog::find(
    Epoch epoch, const FieldElement& nullifier) const {
    auto epoch_it = by_epoch_.find(epoch.index);
    if (epoch_it == by_epoch_.end()) return nullptr;
    auto it = epoch_it->second.find(nullifier.value());
    return it != epoch_it->second.end() ? &it->second : nullptr;
}

void NullifierLog::prune(Epoch current) {
    const std::uint64_t keep_from =
        current.index >= retention_ - 1 ? current.index - (retention_ - 1) : 0;
    by_epoch_.erase(by_epoch_.begin(), by_epoch_.lower_bound(keep_from));
}

std::size_t NullifierLog::share_count() const {
    std::size_t count = 0;
    for (const auto& [epoch, nullifiers] : by_epoch_) {
        for (const auto& [nullifier, entries] : nullifiers)
            count += entries.size();
    }
    return count;
}

// --- RelayNode ----------------------------------------------------------

RelayNode::RelayNode(std::string id, NodeClock clock, Registry& registry,
                     const BackendRegistry& backends, unsigned tree_depth,
                     const FieldModulus& m, RelayNodeOptions options)
    : id_(std::move(id)),
      clock_(clock),
      registry_(&registry),
      backends_(&backends),
      options_(options),
      tree_(tree_depth, m),
      log_(options.log_retention) {
    if (clock_.epoch_length <= 0)
        throw std::invalid_argument("epoch length must be positive");
    if (clock_.max_epoch_gap < 0)
        throw std::invalid_argument("max epoch gap must be nonnegative");
}

void RelayNode::adopt_identity(const IdentityKeypair& identity,
                               std::uint64_t leaf_index) {
    identity_ = identity;
    leaf_index_ = leaf_index;
}

bool RelayNode::leaf_is_live() const {
    return identity_ && leaf_index_ && *leaf_index_ < tree_.capacity() &&
           tree_.leaf(*leaf_index_) == identity_->commitment;
}

void RelayNode::apply_update(const MembershipUpdate& update) {
    if (update.sequence < next_update_seq_) return;  // replay
    pending_updates_.emplace(update.sequence, update);
    while (!pending_updates_.empty()) {
        auto it = pending_updates_.begin();
        if (it->first != next_update_seq_) break;
        const MembershipUpdate& next = it->second;
        if (next.kind == LedgerEntry::Kind::register_member) {
            std::uint64_t index = tree_.insert(next.commitment);
            (void)index;  // append order matches the registry by construction
        } else {
            tree_.remove(next.leaf_index);
        }
        ++next_update_seq_;
        pending_updates_.erase(it);
    }
    if (leaf_is_live())
        cached_credentials_ = {tree_.root(), tree_.prove(*leaf_index_)};
}

RelayMessage RelayNode::publish(std::span<const std::uint8_t> payload,
                                bool rate_override) {
    if (!identity_)
        throw PublishError(PublishError::Reason::not_registered,
                           "node holds no registered identity");
    const Epoch epoch = clock_.current_epoch();
    if (last_publish_epoch_ == epoch.index && !rate_override)
        throw PublishError(PublishError::Reason::rate_guard,
                           "already published in this epoch");

    FieldElement root = tree_.root();
    MerklePath path;
    if (leaf_is_live()) {
        path = tree_.prove(*leaf_index_);
        cached_credentials_ = {root, path};
    } else if (options_.stale_publish && cached_credentials_) {
        root = cached_credentials_->first;
        path = cached_credentials_->second;
    } else {
        throw PublishError(PublishError::Reason::not_registered,
                           "membership has been revoked");
    }

    RlnShare share = make_share(identity_->secret, epoch, payload);
    RateLimitStatement statement{root, epoch, share.x, share.y, share.nullifier};
    const ProofBackend* backend = backends_->find(TransparentBackend::kId);
    ProofBundle bundle = prove(statement, {identity_->secret, path}, *backend);

    RelayMessage message{
        std::vector<std::uint8_t>(payload.begin(), payload.end()),
        std::move(bundle),
        compute_message_id(payload, statement),
    };
    log_.insert(share);
    last_publish_epoch_ = epoch.index;
    note_seen(message.message_id);
    return message;
}

ValidationVerdict RelayNode::validate(const RelayMessage& message,
                                      std::int64_t arrival_time) {
    clock_.now = arrival_time;
    const Epoch current = clock_.current_epoch();
    log_.prune(current);

    const RateLimitStatement& statement = message.bundle.statement;
    const std::uint64_t gap = static_cast<std::uint64_t>(clock_.max_epoch_gap);

    // 1. epoch distance
    if (statement.epoch.index > current.index + gap)
        return {VerdictKind::drop_future_epoch, std::nullopt};
    if (statement.epoch.index + gap < current.index)
        return {VerdictKind::drop_stale, std::nullopt};

    // 2. root window
    if (!registry_->is_known_root(statement.merkle_root))
        return {VerdictKind::drop_unknown_root, std::nullopt};

    // 3. proof (the costly step; unknown backends are adversarial input here)
    ++proof_verifications_;
    bool proof_ok = false;
    try {
        proof_ok = verify(message.bundle, *backends_);
    } catch (const UnknownBackendError&) {
        proof_ok = false;
    }
    if (!proof_ok) return {VerdictKind::drop_invalid_proof, std::nullopt};

    // 4. nullifier log
    RlnShare incoming{statement.epoch, statement.x, statement.y,
                      statement.nullifier};
    if (const auto* entries = log_.find(statement.epoch, statement.nullifier)) {
        for (const NullifierLog::Entry& entry : *entries) {
            if (entry.x == incoming.x && entry.y == incoming.y)
                return {VerdictKind::drop_duplicate, std::nullopt};
        }
        for (const NullifierLog::Entry& entry : *entries) {
            if (entry.x != incoming.x) {
                RlnShare stored{statement.epoch, entry.x, entry.y,
                                statement.nullifier};
                return {VerdictKind::spam, recover_secret(stored, incoming)};
            }
        }
        // same x, different y: cannot interpolate, treat as duplicate noise
        return {VerdictKind::drop_duplicate, std::nullopt};
    }

    // 5. accept
    log_.insert(incoming);
    return {VerdictKind::relay, std::nullopt};
}

RelayNode::SlashAttempt RelayNode::report_spam(const ValidationVerdict& verdict) {
    if (verdict.kind != VerdictKind::spam || !verdict.recovered_secret)
        throw std::invalid_argument("verdict carries no recovered secret");
    try {
        auto result = registry_->slash(*verdict.recovered_secret, id_);
        return {true, result.payout};
    } catch (const RegistryError&) {
        return {false, 0};  // a faster peer already claimed the deposit
    }
}

bool RelayNode::already_seen(const FieldElement& message_id) const {
    return seen_.contains(message_id.value());
}

void RelayNode::note_seen(const FieldElement& message_id) {
    seen_.insert(message_id.value());
}

bool RelayNode::mark_forwarded(const FieldElement& message_id) {
    return forwarded_.insert(message_id.value()).second;
}

}  // namespace rln
