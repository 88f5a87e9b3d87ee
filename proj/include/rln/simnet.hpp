// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rln/relay.hpp"
#include "rln/scenario.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace rln::sim {

/// One validation outcome, exported as a JSONL row.
struct VerdictRecord {
    std::int64_t time = 0;
    std::string node;
    std::string message_id;
    VerdictKind verdict = VerdictKind::relay;
    std::uint64_t epoch = 0;
    std::string nullifier;
};

/// One detected rate violation (member, epoch) with its detection latency.
struct SpamDetection {
    std::uint32_t origin_node = 0;
    std::uint64_t epoch = 0;
    std::int64_t trigger_published_at = 0;
    std::int64_t first_detected_at = 0;
    std::int64_t detection_delay = 0;
    std::int64_t trigger_max_delivery_delay = 0;
};

struct NodeStats {
    std::uint32_t node = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t bandwidth_bytes = 0;
    std::uint64_t log_high_water = 0;
    std::uint64_t proof_verifications = 0;
};

/// Measurable stand-ins for the construction's security and performance
/// claims, collected over one run.
struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::uint64_t messages_published = 0;
    std::uint64_t publish_failures = 0;
    std::uint64_t validations = 0;
    std::map<VerdictKind, std::uint64_t> verdicts;
    std::uint64_t messages_relayed = 0;  // relay verdict count
    std::uint64_t spam_messages_relayed_by_honest_nodes = 0;
    std::vector<SpamDetection> spam_detections;
    std::uint64_t slash_count = 0;
    std::int64_t slash_payout_total = 0;
    std::vector<NodeStats> per_node;
    std::int64_t deposits_received = 0;
    std::int64_t escrow_total = 0;
    std::int64_t payouts_total = 0;

    nlohmann::ordered_json to_json() const;
};

struct RunOutput {
    MetricsReport metrics;
    std::vector<VerdictRecord> verdict_log;
    std::string ledger_jsonl;
    nlohmann::ordered_json registry_snapshot;
    bool invariant_violation = false;
    std::string violation_reason;

    std::string verdicts_jsonl() const;
};

/// Seeded single-threaded discrete-event run of one scenario. Equal seeds
/// produce byte-identical reports.
RunOutput run_scenario(const Scenario& scenario);

/// Expands an actor's schedule into its publish instants (epoch, time,
/// payload count), given the scenario timing. Exposed for tests.
struct PublishInstant {
    std::uint64_t epoch = 0;
    std::int64_t time = 0;
    std::uint32_t count = 1;
};
std::vector<PublishInstant> behavior_schedule(const ActorSpec& actor,
                                              const Scenario& scenario);

/// Builds the adjacency lists for a scenario topology (sorted neighbors).
/// Random-regular graphs are rejection-sampled from the seed until connected,
/// bounded at 100 attempts.
std::vector<std::vector<std::uint32_t>> build_topology(const Scenario& scenario);

}  // namespace rln::sim
