// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/field.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <vector>

namespace rln {

class TreeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Authentication path for one leaf: siblings ordered leaf-to-root, with
/// directions implied by the bits of leaf_index.
struct MerklePath {
    std::uint64_t leaf_index = 0;
    std::vector<FieldElement> siblings;
};

/// Parent hash: hash_to_field("rln/node", [left, right]).
FieldElement merkle_node_hash(const FieldElement& left,
                              const FieldElement& right);

/// Folds a leaf with the path siblings and compares against the root.
bool verify_path(const FieldElement& root, const FieldElement& leaf,
                 const MerklePath& path);

/// Fixed-depth incremental Merkle accumulator over member commitments.
///
/// Leaves append at the next free index and are never reused; deletion resets
/// a leaf to the zero constant, which is also the default value of every
/// untouched leaf (so a deleted singleton restores the empty root). Untouched
/// subtrees resolve through a per-level cache of default hashes, keeping
/// storage proportional to live leaves and updates at exactly `depth` node
/// hashes.
///
/// Single writer; concurrent readers are fine between mutations. Callers
/// serialize mutation externally.
class MembershipTree {
public:
    static constexpr unsigned kMinDepth = 1;
    static constexpr unsigned kMaxDepth = 32;

    MembershipTree(unsigned depth, const FieldModulus& m);

    /// Appends a leaf, returns its index. The zero constant is rejected
    /// because it encodes deletion.
    std::uint64_t insert(const FieldElement& leaf);

    /// Resets the leaf at `leaf_index` to zero. The index stays consumed.
    void remove(std::uint64_t leaf_index);

    /// Authentication path for any index below capacity; untouched indices
    /// prove the zero leaf.
    MerklePath prove(std::uint64_t leaf_index) const;

    FieldElement leaf(std::uint64_t leaf_index) const;
    FieldElement root() const { return node(depth_, 0); }
    FieldElement zero_leaf() const { return zeros_[0]; }

    unsigned depth() const { return depth_; }
    std::uint64_t capacity() const { return std::uint64_t(1) << depth_; }
    std::uint64_t next_index() const { return next_; }
    const FieldModulus& modulus() const { return *modulus_; }

    /// Cumulative count of node-hash evaluations performed by this tree.
    std::uint64_t hash_calls() const { return hash_calls_; }

    /// Snapshot: {"depth": d, "modulus": "<decimal>", "leaves": {"i": "<decimal>"}}.
    /// Deleted leaves appear explicitly as "0" so the free index survives a
    /// round trip.
    nlohmann::ordered_json to_json() const;
    static MembershipTree from_json(const nlohmann::json& snapshot);

private:
    FieldElement node(unsigned level, std::uint64_t pos) const;
    void write_leaf(std::uint64_t leaf_index, const FieldElement& value);
    FieldElement hash_children(const FieldElement& l, const FieldElement& r);

    unsigned depth_;
    const FieldModulus* modulus_;
    std::vector<FieldElement> zeros_;  // default hash per level
    // level -> position -> value; level 0 holds leaves, level depth_ the root
    std::vector<std::map<std::uint64_t, FieldElement>> levels_;
    std::uint64_t next_ = 0;
    std::uint64_t hash_calls_ = 0;
};

}  // namespace rln
