// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace rln::sim {

class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Behavior { honest, spammer, late_clock, router };

std::string_view to_string(Behavior behavior);
Behavior behavior_from_string(std::string_view name);

/// What one node does during the run. Honest and late-clock actors publish
/// once per scheduled epoch; spammers publish `burst` distinct payloads per
/// scheduled epoch and keep using stale credentials after revocation. Routers
/// only relay. Nodes without an actor entry default to router.
struct ActorSpec {
    std::uint32_t node = 0;
    Behavior behavior = Behavior::router;
    bool publish_every_epoch = false;
    std::vector<std::uint64_t> publish_epochs;
    std::uint32_t burst = 1;        // payloads per scheduled epoch
    std::int64_t clock_skew = 0;    // time units added to this node's clock
    std::int64_t register_at = 0;   // registration time; 0 = before the run

    bool publishes() const { return behavior != Behavior::router; }
};

enum class TopologyKind { complete, ring, random_regular };

/// Declarative description of one simulated network run. Fully deterministic
/// given the seed.
struct Scenario {
    std::string name = "unnamed";
    std::uint64_t seed = 0;
    std::uint32_t node_count = 0;
    TopologyKind topology = TopologyKind::complete;
    std::uint32_t degree = 0;  // random_regular only
    std::int64_t latency_min = 1;
    std::int64_t latency_max = 1;
    std::int64_t epoch_length = 10;
    std::int64_t max_epoch_gap = 1;
    std::uint64_t log_retention = 2;
    std::int64_t duration = 0;
    std::string modulus_name = "default";
    unsigned tree_depth = 20;
    std::int64_t required_deposit = 1000;
    std::size_t root_window = 8;
    std::vector<ActorSpec> actors;

    /// Structural checks (ids in range, unique, positive lengths, known
    /// modulus). Topology connectivity is validated at build time.
    void validate() const;

    static Scenario from_json(const nlohmann::json& doc);
    nlohmann::ordered_json to_json() const;

    static Scenario load_file(const std::string& path);
};

}  // namespace rln::sim
