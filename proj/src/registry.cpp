// SPDX-License-Identifier: Apache-2.0
#include "rln/registry.hpp"

#include "rln/rln.hpp"

#include <sstream>

namespace rln {

std::string_view to_string(MemberStatus status) {
    switch (status) {
        case MemberStatus::active: return "active";
        case MemberStatus::slashed: return "slashed";
        case MemberStatus::withdrawn: return "withdrawn";
    }
    return "unknown";
}

std::string_view to_string(LedgerEntry::Kind kind) {
    switch (kind) {
        case LedgerEntry::Kind::register_member: return "register";
        case LedgerEntry::Kind::slash: return "slash";
        case LedgerEntry::Kind::withdraw: return "withdraw";
    }
    return "unknown";
}

Registry::Registry(unsigned tree_depth, const FieldModulus& m,
                   std::int64_t required_deposit, std::size_t root_window)
    : tree_(tree_depth, m),
      required_deposit_(required_deposit),
      root_window_(root_window) {
    if (required_deposit <= 0)
        throw RegistryError(RegistryError::Reason::wrong_deposit,
                            "required deposit must be positive");
    if (root_window == 0)
        throw std::invalid_argument("root window must hold at least one root");
    history_.push_back({0, tree_.root()});
}

void Registry::push_root(const FieldElement& root, bool invalidate_history) {
    if (invalidate_history) history_.clear();
    history_.push_back({sequence_, root});
    while (history_.size() > root_window_) history_.pop_front();
}

Registry::RegisterResult Registry::register_member(
    const FieldElement& commitment, std::int64_t deposit,
    const std::string& actor) {
    if (deposit != required_deposit_)
        throw RegistryError(RegistryError::Reason::wrong_deposit,
                            "deposit must be exactly " +
                                std::to_string(required_deposit_));
    if (active_by_commitment_.contains(commitment.value()))
        throw RegistryError(RegistryError::Reason::duplicate_commitment,
                            "commitment is already registered and active");
    if (tree_.next_index() >= tree_.capacity())
        throw RegistryError(RegistryError::Reason::tree_full,
                            "membership tree is full");

    const std::uint64_t index = tree_.insert(commitment);
    members_.push_back({index, commitment, deposit, MemberStatus::active});
    active_by_commitment_.emplace(commitment.value(), index);
    deposits_received_ += deposit;
    escrow_ += deposit;

    const std::uint64_t seq = next_sequence();
    ledger_.push_back({seq, LedgerEntry::Kind::register_member, actor, deposit});
    FieldElement root = tree_.root();
    updates_.push_back(
        {seq, LedgerEntry::Kind::register_member, commitment, index, root});
    push_root(root, false);
    return {index, root};
}

const MemberRecord& Registry::active_member_by_secret(
    const FieldElement& secret) const {
    FieldElement commitment = identity_commitment(secret);
    auto it = active_by_commitment_.find(commitment.value());
    if (it == active_by_commitment_.end())
        throw RegistryError(RegistryError::Reason::not_active,
                            "no active member matches the revealed secret");
    return members_[it->second];
}

Registry::SlashResult Registry::slash(const FieldElement& revealed_secret,
                                      const std::string& beneficiary) {
    const MemberRecord& member = active_member_by_secret(revealed_secret);
    const std::uint64_t index = member.leaf_index;
    const std::int64_t payout = member.deposit;

    tree_.remove(index);
    members_[index].status = MemberStatus::slashed;
    active_by_commitment_.erase(member.commitment.value());
    escrow_ -= payout;
    payouts_ += payout;

    const std::uint64_t seq = next_sequence();
    ledger_.push_back({seq, LedgerEntry::Kind::slash, beneficiary, payout});
    FieldElement root = tree_.root();
    updates_.push_back({seq, LedgerEntry::Kind::slash, members_[index].commitment,
                        index, root});
    push_root(root, true);
    return {payout, root};
}

std::int64_t Registry::withdraw(const FieldElement& secret,
                                const std::string& actor) {
    const MemberRecord& member = active_member_by_secret(secret);
    const std::uint64_t index = member.leaf_index;
    const std::int64_t payout = member.deposit;

    tree_.remove(index);
    members_[index].status = MemberStatus::withdrawn;
    active_by_commitment_.erase(member.commitment.value());
    escrow_ -= payout;
    payouts_ += payout;

    const std::uint64_t seq = next_sequence();
    ledger_.push_back({seq, LedgerEntry::Kind::withdraw, actor, payout});
    FieldElement root = tree_.root();
    updates_.push_back({seq, LedgerEntry::Kind::withdraw,
                        members_[index].commitment, index, root});
    push_root(root, true);
    return payout;
}

bool Registry::is_known_root(const FieldElement& root) const {
    for (const RootObservation& observed : history_) {
        if (observed.root == root) return true;
    }
    return false;
}

nlohmann::ordered_json Registry::snapshot() const {
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (const MemberRecord& member : members_) {
        members.push_back({
            {"leaf-index", member.leaf_index},
            {"commitment", member.commitment.to_decimal()},
            {"deposit", member.deposit},
            {"status", to_string(member.status)},
        });
    }
    nlohmann::ordered_json history = nlohmann::ordered_json::array();
    for (const RootObservation& observed : history_) {
        history.push_back({
            {"sequence", observed.sequence},
            {"root", observed.root.to_decimal()},
        });
    }
    return nlohmann::ordered_json{
        {"members", std::move(members)},
        {"current-root", tree_.root().to_decimal()},
        {"history", std::move(history)},
    };
}

std::string Registry::ledger_jsonl() const {
    std::ostringstream out;
    for (const LedgerEntry& entry : ledger_) {
        nlohmann::ordered_json line{
            {"sequence", entry.sequence},
            {"kind", to_string(entry.kind)},
            {"actor", entry.actor},
            {"amount", entry.amount},
        };
        out << line.dump() << '\n';
    }
    return out.str();
}

}  // namespace rln
