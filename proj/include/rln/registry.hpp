// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/field.hpp"
#include "rln/merkle.hpp"

#include <json.hpp>

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace rln {

enum class MemberStatus { active, slashed, withdrawn };

std::string_view to_string(MemberStatus status);

struct MemberRecord {
    std::uint64_t leaf_index = 0;
    FieldElement commitment;
    std::int64_t deposit = 0;
    MemberStatus status = MemberStatus::active;
};

/// Economic record of one registry operation. Amounts conserve the total
/// balance: escrow + payouts always equals deposits ever received.
struct LedgerEntry {
    enum class Kind { register_member, slash, withdraw };

    std::uint64_t sequence = 0;
    Kind kind = Kind::register_member;
    std::string actor;
    std::int64_t amount = 0;
};

std::string_view to_string(LedgerEntry::Kind kind);

/// Membership change notification, broadcast to relay nodes so they can
/// mirror the tree. Sequence numbers are contiguous from 1.
struct MembershipUpdate {
    std::uint64_t sequence = 0;
    LedgerEntry::Kind kind = LedgerEntry::Kind::register_member;
    FieldElement commitment;
    std::uint64_t leaf_index = 0;
    FieldElement new_root;
};

class RegistryError : public std::runtime_error {
public:
    enum class Reason { wrong_deposit, duplicate_commitment, tree_full, not_active };

    RegistryError(Reason reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

/// In-process emulation of the membership contract: registration with an
/// exact deposit, a bounded window of recent roots, slashing that transfers
/// the offender's deposit to the reporter, and voluntary withdrawal.
///
/// A single serialized authority; callers never mutate concurrently.
class Registry {
public:
    static constexpr std::int64_t kDefaultDeposit = 1000;
    static constexpr std::size_t kDefaultRootWindow = 8;

    Registry(unsigned tree_depth, const FieldModulus& m,
             std::int64_t required_deposit = kDefaultDeposit,
             std::size_t root_window = kDefaultRootWindow);

    struct RegisterResult {
        std::uint64_t leaf_index;
        FieldElement new_root;
    };

    /// Registers a commitment with exactly the required deposit.
    RegisterResult register_member(const FieldElement& commitment,
                                   std::int64_t deposit,
                                   const std::string& actor);

    struct SlashResult {
        std::int64_t payout;
        FieldElement new_root;
    };

    /// Slashes the member whose commitment matches H_leaf(revealed_secret):
    /// deletes the leaf, pays the full deposit to the beneficiary, and drops
    /// every pre-slash root from the window so proofs bound to roots that
    /// still contain the offender stop validating.
    SlashResult slash(const FieldElement& revealed_secret,
                      const std::string& beneficiary);

    /// Voluntary exit; returns the deposit. Roots containing the departed
    /// leaf are dropped from the window like a slash.
    std::int64_t withdraw(const FieldElement& secret, const std::string& actor);

    /// True iff the root is the current root or one of the recent roots still
    /// inside the window.
    bool is_known_root(const FieldElement& root) const;

    FieldElement current_root() const { return tree_.root(); }
    const MembershipTree& tree() const { return tree_; }

    const std::vector<MemberRecord>& members() const { return members_; }
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    const std::vector<MembershipUpdate>& updates() const { return updates_; }

    std::int64_t required_deposit() const { return required_deposit_; }
    std::int64_t deposits_received() const { return deposits_received_; }
    std::int64_t escrow_total() const { return escrow_; }
    std::int64_t payouts_total() const { return payouts_; }

    /// {"members": [...], "current-root": "...", "history": [...]}.
    nlohmann::ordered_json snapshot() const;
    /// One JSON object per ledger entry, newline-delimited.
    std::string ledger_jsonl() const;

private:
    struct RootObservation {
        std::uint64_t sequence;
        FieldElement root;
    };

    const MemberRecord& active_member_by_secret(const FieldElement& secret) const;
    void push_root(const FieldElement& root, bool invalidate_history);
    std::uint64_t next_sequence() { return ++sequence_; }

    MembershipTree tree_;
    std::int64_t required_deposit_;
    std::size_t root_window_;
    std::vector<MemberRecord> members_;          // by leaf index
    std::map<U256, std::uint64_t> active_by_commitment_;
    std::deque<RootObservation> history_;
    std::vector<LedgerEntry> ledger_;
    std::vector<MembershipUpdate> updates_;
    std::uint64_t sequence_ = 0;
    std::int64_t deposits_received_ = 0;
    std::int64_t escrow_ = 0;
    std::int64_t payouts_ = 0;
};

}  // namespace rln
