// SPDX-License-Identifier: Apache-2.0
#include "rln/scenario.hpp"

#include "rln/field.hpp"

#include <fstream>
#include <set>

namespace rln::sim {

std::string_view to_string(Behavior behavior) {
    switch (behavior) {
        case Behavior::honest: return "honest";
        case Behavior::spammer: return "spammer";
        case Behavior::late_clock: return "late-clock";
        case Behavior::router: return "router";
    }
    return "unknown";
}

Behavior behavior_from_string(std::string_view name) {
    if (name == "honest") return Behavior::honest;
    if (name == "spammer") return Behavior::spammer;
    if (name == "late-clock") return Behavior::late_clock;
    if (name == "router") return Behavior::router;
    throw ScenarioError("unknown behavior: " + std::string(name));
}

namespace {

std::string_view topology_name(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::complete: return "complete";
        case TopologyKind::ring: return "ring";
        case TopologyKind::random_regular: return "random-regular";
    }
    return "unknown";
}

TopologyKind topology_from_string(std::string_view name) {
    if (name == "complete") return TopologyKind::complete;
    if (name == "ring") return TopologyKind::ring;
    if (name == "random-regular") return TopologyKind::random_regular;
    throw ScenarioError("unknown topology: " + std::string(name));
}

}  // namespace

void Scenario::validate() const {
    if (node_count == 0) throw ScenarioError("node_count must be positive");
    if (duration < 0) throw ScenarioError("duration must be nonnegative");
    if (epoch_length <= 0) throw ScenarioError("epoch_length must be positive");
    if (max_epoch_gap < 0) throw ScenarioError("max_epoch_gap must be nonnegative");
    if (log_retention == 0) throw ScenarioError("log_retention must be positive");
    if (latency_min < 0 || latency_max < latency_min)
        throw ScenarioError("latency range is invalid");
    if (tree_depth < 1 || tree_depth > 32)
        throw ScenarioError("tree_depth out of range [1, 32]");
    if (required_deposit <= 0)
        throw ScenarioError("required_deposit must be positive");
    if (root_window == 0) throw ScenarioError("root_window must be positive");
    if (FieldModulus::by_name(modulus_name) == nullptr)
        throw ScenarioError("unknown modulus: " + modulus_name);
    if (topology == TopologyKind::random_regular) {
        if (degree == 0 || degree >= node_count)
            throw ScenarioError("random-regular degree must be in [1, node_count)");
        if ((std::uint64_t(node_count) * degree) % 2 != 0)
            throw ScenarioError("random-regular requires node_count * degree even");
    }

    std::set<std::uint32_t> seen_nodes;
    std::uint64_t registering = 0;
    for (const ActorSpec& actor : actors) {
        if (actor.node >= node_count)
            throw ScenarioError("actor node id out of range");
        if (!seen_nodes.insert(actor.node).second)
            throw ScenarioError("duplicate actor entry for one node");
        if (actor.burst == 0)
            throw ScenarioError("actor burst must be positive");
        if (actor.register_at < 0)
            throw ScenarioError("register_at must be nonnegative");
        if (actor.publishes()) ++registering;
    }
    if (registering > (std::uint64_t(1) << tree_depth))
        throw ScenarioError("tree capacity below registering actor count");
}

Scenario Scenario::from_json(const nlohmann::json& doc) {
    Scenario s;
    try {
        s.name = doc.value("name", std::string("unnamed"));
        s.seed = doc.at("seed").get<std::uint64_t>();
        s.node_count = doc.at("node_count").get<std::uint32_t>();
        const auto& topo = doc.at("topology");
        s.topology = topology_from_string(topo.at("kind").get<std::string>());
        if (s.topology == TopologyKind::random_regular)
            s.degree = topo.at("degree").get<std::uint32_t>();
        if (doc.contains("link_latency")) {
            const auto& lat = doc.at("link_latency");
            if (lat.is_array()) {
                s.latency_min = lat.at(0).get<std::int64_t>();
                s.latency_max = lat.at(1).get<std::int64_t>();
            } else {
                s.latency_min = s.latency_max = lat.get<std::int64_t>();
            }
        }
        s.epoch_length = doc.value("epoch_length", std::int64_t(10));
        s.max_epoch_gap = doc.value("max_epoch_gap", std::int64_t(1));
        s.log_retention = doc.value("log_retention", std::uint64_t(2));
        s.duration = doc.at("duration").get<std::int64_t>();
        s.modulus_name = doc.value("modulus", std::string("default"));
        s.tree_depth = doc.value("tree_depth", 20u);
        s.required_deposit = doc.value("required_deposit", std::int64_t(1000));
        s.root_window = doc.value("root_window", std::size_t(8));
        for (const auto& entry : doc.value("actors", nlohmann::json::array())) {
            ActorSpec actor;
            actor.node = entry.at("node").get<std::uint32_t>();
            actor.behavior =
                behavior_from_string(entry.at("behavior").get<std::string>());
            if (entry.contains("publish_epochs")) {
                const auto& epochs = entry.at("publish_epochs");
                if (epochs.is_string() && epochs.get<std::string>() == "all") {
                    actor.publish_every_epoch = true;
                } else if (epochs.is_array()) {
                    for (const auto& e : epochs)
                        actor.publish_epochs.push_back(e.get<std::uint64_t>());
                } else {
                    throw ScenarioError("publish_epochs must be \"all\" or a list");
                }
            }
            actor.burst = entry.value("burst", 1u);
            actor.clock_skew = entry.value("clock_skew", std::int64_t(0));
            actor.register_at = entry.value("register_at", std::int64_t(0));
            s.actors.push_back(std::move(actor));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("malformed scenario: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::ordered_json Scenario::to_json() const {
    nlohmann::ordered_json topo{{"kind", std::string(topology_name(topology))}};
    if (topology == TopologyKind::random_regular) topo["degree"] = degree;
    nlohmann::ordered_json actors_doc = nlohmann::ordered_json::array();
    for (const ActorSpec& actor : actors) {
        nlohmann::ordered_json entry{
            {"node", actor.node},
            {"behavior", std::string(to_string(actor.behavior))},
        };
        if (actor.publish_every_epoch) {
            entry["publish_epochs"] = "all";
        } else if (!actor.publish_epochs.empty()) {
            entry["publish_epochs"] = actor.publish_epochs;
        }
        if (actor.burst != 1) entry["burst"] = actor.burst;
        if (actor.clock_skew != 0) entry["clock_skew"] = actor.clock_skew;
        if (actor.register_at != 0) entry["register_at"] = actor.register_at;
        actors_doc.push_back(std::move(entry));
    }
    return nlohmann::ordered_json{
        {"name", name},
        {"seed", seed},
        {"node_count", node_count},
        {"topology", std::move(topo)},
        {"link_latency", latency_min == latency_max
                             ? nlohmann::ordered_json(latency_min)
                             : nlohmann::ordered_json{latency_min, latency_max}},
        {"epoch_length", epoch_length},
        {"max_epoch_gap", max_epoch_gap},
        {"log_retention", log_retention},
        {"duration", duration},
        {"modulus", modulus_name},
        {"tree_depth", tree_depth},
        {"required_deposit", required_deposit},
        {"root_window", root_window},
        {"actors", std::move(actors_doc)},
    };
}

Scenario Scenario::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return from_json(doc);
}

}  // namespace rln::sim
