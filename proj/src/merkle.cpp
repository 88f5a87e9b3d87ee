// SPDX-License-Identifier: Apache-2.0
#include "rln/merkle.hpp"

#include "rln/hash.hpp"

namespace rln {

FieldElement merkle_node_hash(const FieldElement& left,
                              const FieldElement& right) {
    return hash_to_field(kDomainNode, {left, right}, left.modulus());
}

bool verify_path(const FieldElement& root, const FieldElement& leaf,
                 const MerklePath& path) {
    FieldElement acc = leaf;
    std::uint64_t index = path.leaf_index;
    for (const FieldElement& sibling : path.siblings) {
        acc = (index & 1) ? merkle_node_hash(sibling, acc)
                          : merkle_node_hash(acc, sibling);
        index >>= 1;
    }
    return acc == root;
}

MembershipTree::MembershipTree(unsigned depth, const FieldModulus& m)
    : depth_(depth), modulus_(&m) {
    if (depth < kMinDepth || depth > kMaxDepth)
        throw TreeError("tree depth out of range [1, 32]");
    zeros_.reserve(depth + 1);
    zeros_.push_back(FieldElement::zero(m));
    for (unsigned level = 0; level < depth; ++level)
        zeros_.push_back(hash_children(zeros_.back(), zeros_.back()));
    levels_.resize(depth + 1);
}

FieldElement MembershipTree::hash_children(const FieldElement& l,
                                           const FieldElement& r) {
    ++hash_calls_;
    return merkle_node_hash(l, r);
}

FieldElement MembershipTree::node(unsigned level, std::uint64_t pos) const {
    const auto& stored = levels_[level];
    auto it = stored.find(pos);
    return it != stored.end() ? it->second : zeros_[level];
}

void MembershipTree::write_leaf(std::uint64_t leaf_index,
                                const FieldElement& value) {
    levels_[0].insert_or_assign(leaf_index, value);
    std::uint64_t pos = leaf_index;
    for (unsigned level = 0; level < depth_; ++level) {
        std::uint64_t left = pos & ~std::uint64_t(1);
        FieldElement parent =
            hash_children(node(level, left), node(level, left | 1));
        pos >>= 1;
        levels_[level + 1].insert_or_assign(pos, parent);
    }
}

std::uint64_t MembershipTree::insert(const FieldElement& leaf) {
    if (&leaf.modulus() != modulus_)
        throw TreeError("leaf modulus does not match the tree");
    if (leaf.is_zero())
        throw TreeError("zero leaf rejected; zero encodes deletion");
    if (next_ >= capacity()) throw TreeError("tree is full");
    const std::uint64_t index = next_++;
    write_leaf(index, leaf);
    return index;
}

void MembershipTree::remove(std::uint64_t leaf_index) {
    if (leaf_index >= next_)
        throw TreeError("cannot delete a leaf that was never inserted");
    if (node(0, leaf_index).is_zero())
        throw TreeError("leaf already deleted");
    write_leaf(leaf_index, zeros_[0]);
}

MerklePath MembershipTree::prove(std::uint64_t leaf_index) const {
    if (leaf_index >= capacity()) throw TreeError("leaf index out of range");
    MerklePath path;
    path.leaf_index = leaf_index;
    path.siblings.reserve(depth_);
    std::uint64_t pos = leaf_index;
    for (unsigned level = 0; level < depth_; ++level) {
        path.siblings.push_back(node(level, pos ^ 1));
        pos >>= 1;
    }
    return path;
}

FieldElement MembershipTree::leaf(std::uint64_t leaf_index) const {
    if (leaf_index >= capacity()) throw TreeError("leaf index out of range");
    return node(0, leaf_index);
}

nlohmann::ordered_json MembershipTree::to_json() const {
    nlohmann::ordered_json leaves = nlohmann::ordered_json::object();
    for (const auto& [index, value] : levels_[0])
        leaves[std::to_string(index)] = value.to_decimal();
    return nlohmann::ordered_json{
        {"depth", depth_},
        {"modulus", modulus_->decimal()},
        {"leaves", std::move(leaves)},
    };
}

MembershipTree MembershipTree::from_json(const nlohmann::json& snapshot) {
    const FieldModulus& m =
        FieldModulus::intern(U256(snapshot.at("modulus").get<std::string>()));
    MembershipTree tree(snapshot.at("depth").get<unsigned>(), m);
    std::map<std::uint64_t, FieldElement> leaves;
    for (const auto& [key, value] : snapshot.at("leaves").items()) {
        leaves.emplace(std::stoull(key),
                       FieldElement::from_decimal(value.get<std::string>(), m));
    }
    for (const auto& [index, value] : leaves) {
        if (index != tree.next_)
            throw TreeError("snapshot leaves are not contiguous");
        tree.write_leaf(index, value);
        tree.next_ = index + 1;
    }
    return tree;
}

}  // namespace rln
