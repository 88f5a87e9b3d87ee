// SPDX-License-Identifier: Apache-2.0
#include "rln/simnet.hpp"

#include "rln/hash.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <variant>

namespace rln::sim {

namespace {

constexpr VerdictKind kAllVerdicts[] = {
    VerdictKind::relay,          VerdictKind::drop_stale,
    VerdictKind::drop_future_epoch, VerdictKind::drop_invalid_proof,
    VerdictKind::drop_unknown_root, VerdictKind::drop_duplicate,
    VerdictKind::spam,
};

struct PublishAction {
    std::uint32_t node;
    std::uint64_t epoch;
    std::uint32_t count;
};

struct DeliveryAction {
    std::uint32_t from;
    std::uint32_t to;
    std::size_t message_index;
};

struct RegisterAction {
    std::uint32_t node;
};

struct UpdateAction {
    std::uint32_t to;
    std::size_t update_index;  // into Registry::updates()
};

using Action =
    std::variant<PublishAction, DeliveryAction, RegisterAction, UpdateAction>;

struct Event {
    std::int64_t time;
    std::uint64_t seq;
    Action action;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
};

struct MessageMeta {
    std::uint32_t origin = 0;
    std::int64_t published_at = 0;
    std::uint64_t stamped_epoch = 0;
    bool excess = false;  // second or later publish of (member, epoch)
    std::uint64_t wire_size = 0;
    std::int64_t max_delivery_delay = 0;
};

struct Engine {
    explicit Engine(const Scenario& scenario_in)
        : scenario(scenario_in),
          modulus(*FieldModulus::by_name(scenario_in.modulus_name)),
          backends(BackendRegistry::with_defaults()),
          registry(scenario_in.tree_depth, modulus, scenario_in.required_deposit,
                   scenario_in.root_window),
          rng(scenario_in.seed) {}

    const Scenario& scenario;
    const FieldModulus& modulus;
    BackendRegistry backends;
    Registry registry;
    std::mt19937_64 rng;

    std::vector<std::vector<std::uint32_t>> adjacency;
    std::vector<ActorSpec> actor_of;  // per node; router when unspecified
    std::vector<RelayNode> nodes;
    std::map<std::uint32_t, IdentityKeypair> identity_of_node;
    std::map<U256, std::uint32_t> node_by_commitment;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::uint64_t next_seq = 0;
    std::int64_t now = 0;

    std::vector<RelayMessage> messages;
    std::vector<MessageMeta> meta;
    std::map<std::pair<std::uint32_t, std::uint64_t>, std::uint32_t> publish_count;
    std::map<std::pair<std::uint32_t, std::uint64_t>, std::size_t> detection_of;

    RunOutput out;

    void push(std::int64_t time, Action action) {
        queue.push({time, next_seq++, std::move(action)});
    }

    std::int64_t draw_latency() {
        if (scenario.latency_min == scenario.latency_max)
            return scenario.latency_min;
        const std::uint64_t span = static_cast<std::uint64_t>(
            scenario.latency_max - scenario.latency_min + 1);
        return scenario.latency_min + static_cast<std::int64_t>(rng() % span);
    }

    void setup();
    void run_loop();
    void finish();

    void handle(const PublishAction& action);
    void handle(const DeliveryAction& action);
    void handle(const RegisterAction& action);
    void handle(const UpdateAction& action);

    void register_node(std::uint32_t node_id, bool synchronous_fanout);
    void broadcast_latest_update();
    void forward_from(std::uint32_t from, std::optional<std::uint32_t> exclude,
                      std::size_t message_index);
    void record_verdict(std::uint32_t node_id, const RelayMessage& message,
                        const ValidationVerdict& verdict);
    void refresh_high_water(std::uint32_t node_id);
    void flag_violation(const std::string& reason);

    std::vector<std::uint8_t> make_payload(std::uint32_t node_id,
                                           std::uint64_t epoch,
                                           std::uint32_t burst_index);
};

void Engine::flag_violation(const std::string& reason) {
    if (!out.invariant_violation) {
        out.invariant_violation = true;
        out.violation_reason = reason;
    }
}

std::vector<std::uint8_t> Engine::make_payload(std::uint32_t node_id,
                                               std::uint64_t epoch,
                                               std::uint32_t burst_index) {
    static constexpr char hex[] = "0123456789abcdef";
    std::ostringstream text;
    text << 'n' << node_id << "/e" << epoch << '/' << burst_index << '/';
    std::uint64_t salt = rng();
    for (int i = 0; i < 8; ++i) {
        text << hex[salt & 0xf];
        salt >>= 4;
    }
    const std::string s = text.str();
    return {s.begin(), s.end()};
}

void Engine::register_node(std::uint32_t node_id, bool synchronous_fanout) {
    const IdentityKeypair& identity = identity_of_node.at(node_id);
    auto result = registry.register_member(identity.commitment,
                                           scenario.required_deposit,
                                           nodes[node_id].id());
    nodes[node_id].adopt_identity(identity, result.leaf_index);
    node_by_commitment.emplace(identity.commitment.value(), node_id);
    if (synchronous_fanout) return;  // caller fans out after the whole batch
    // the registering node mirrors its own update immediately; peers learn
    // through broadcast
    nodes[node_id].apply_update(registry.updates().back());
    broadcast_latest_update();
}

void Engine::broadcast_latest_update() {
    const std::size_t index = registry.updates().size() - 1;
    for (std::uint32_t peer = 0; peer < scenario.node_count; ++peer)
        push(now + draw_latency(), UpdateAction{peer, index});
}

void Engine::setup() {
    adjacency = build_topology(scenario);

    actor_of.assign(scenario.node_count, ActorSpec{});
    for (std::uint32_t i = 0; i < scenario.node_count; ++i)
        actor_of[i].node = i;
    for (const ActorSpec& actor : scenario.actors) actor_of[actor.node] = actor;

    nodes.reserve(scenario.node_count);
    for (std::uint32_t i = 0; i < scenario.node_count; ++i) {
        NodeClock clock{0, scenario.epoch_length, scenario.max_epoch_gap,
                        actor_of[i].clock_skew};
        RelayNodeOptions options;
        options.log_retention = scenario.log_retention;
        options.stale_publish = actor_of[i].behavior == Behavior::spammer;
        nodes.emplace_back("n" + std::to_string(i), clock, registry, backends,
                           scenario.tree_depth, modulus, options);
    }

    // identities for every publishing actor, drawn in node order
    for (std::uint32_t i = 0; i < scenario.node_count; ++i) {
        if (actor_of[i].publishes())
            identity_of_node.emplace(i, keygen(rng(), modulus));
    }

    // pre-run registrations happen before the clock starts: every node begins
    // with the same mirrored tree
    for (std::uint32_t i = 0; i < scenario.node_count; ++i) {
        if (actor_of[i].publishes() && actor_of[i].register_at == 0)
            register_node(i, true);
    }
    for (RelayNode& node : nodes) {
        for (const MembershipUpdate& update : registry.updates())
            node.apply_update(update);
    }

    // schedule the run
    for (std::uint32_t i = 0; i < scenario.node_count; ++i) {
        const ActorSpec& actor = actor_of[i];
        if (!actor.publishes()) continue;
        if (actor.register_at > 0) push(actor.register_at, RegisterAction{i});
        for (const PublishInstant& instant : behavior_schedule(actor, scenario))
            push(instant.time, PublishAction{i, instant.epoch, instant.count});
    }

    out.metrics.per_node.resize(scenario.node_count);
    for (std::uint32_t i = 0; i < scenario.node_count; ++i)
        out.metrics.per_node[i].node = i;
    for (VerdictKind kind : kAllVerdicts) out.metrics.verdicts[kind] = 0;
}

void Engine::forward_from(std::uint32_t from,
                          std::optional<std::uint32_t> exclude,
                          std::size_t message_index) {
    if (!nodes[from].mark_forwarded(messages[message_index].message_id)) return;
    for (std::uint32_t peer : adjacency[from]) {
        if (exclude && peer == *exclude) continue;
        push(now + draw_latency(), DeliveryAction{from, peer, message_index});
        out.metrics.per_node[from].messages_sent += 1;
        out.metrics.per_node[from].bandwidth_bytes += meta[message_index].wire_size;
    }
}

void Engine::record_verdict(std::uint32_t node_id, const RelayMessage& message,
                            const ValidationVerdict& verdict) {
    const RateLimitStatement& st = message.bundle.statement;
    out.verdict_log.push_back({
        now,
        nodes[node_id].id(),
        message.message_id.to_decimal(),
        verdict.kind,
        st.epoch.index,
        st.nullifier.to_decimal(),
    });
    out.metrics.validations += 1;
    out.metrics.verdicts[verdict.kind] += 1;
}

void Engine::refresh_high_water(std::uint32_t node_id) {
    NodeStats& stats = out.metrics.per_node[node_id];
    stats.log_high_water =
        std::max<std::uint64_t>(stats.log_high_water,
                                nodes[node_id].log().share_count());
}

void Engine::handle(const PublishAction& action) {
    RelayNode& node = nodes[action.node];
    node.clock().now = now;
    const bool is_spammer = actor_of[action.node].behavior == Behavior::spammer;
    for (std::uint32_t burst = 0; burst < action.count; ++burst) {
        std::vector<std::uint8_t> payload =
            make_payload(action.node, action.epoch, burst);
        std::optional<RelayMessage> published;
        try {
            published = node.publish(payload, is_spammer);
        } catch (const PublishError&) {
            out.metrics.publish_failures += 1;
            continue;
        }
        RelayMessage& message = *published;
        const std::uint64_t stamped = message.bundle.statement.epoch.index;
        std::uint32_t& count = publish_count[{action.node, stamped}];
        count += 1;

        MessageMeta message_meta;
        message_meta.origin = action.node;
        message_meta.published_at = now;
        message_meta.stamped_epoch = stamped;
        message_meta.excess = count >= 2;
        message_meta.wire_size = serialize_message(message).size();
        messages.push_back(std::move(message));
        meta.push_back(message_meta);

        out.metrics.messages_published += 1;
        forward_from(action.node, std::nullopt, messages.size() - 1);
        refresh_high_water(action.node);
    }
}

void Engine::handle(const DeliveryAction& action) {
    const RelayMessage& message = messages[action.message_index];
    MessageMeta& message_meta = meta[action.message_index];
    message_meta.max_delivery_delay =
        std::max(message_meta.max_delivery_delay,
                 now - message_meta.published_at);

    RelayNode& node = nodes[action.to];
    if (node.already_seen(message.message_id)) {
        // gossip dedup: no revalidation, no re-verification
        record_verdict(action.to, message,
                       {VerdictKind::drop_duplicate, std::nullopt});
        return;
    }
    node.note_seen(message.message_id);
    ValidationVerdict verdict = node.validate(message, now);
    record_verdict(action.to, message, verdict);
    refresh_high_water(action.to);

    if (verdict.kind == VerdictKind::relay) {
        out.metrics.messages_relayed += 1;
        if (message_meta.excess &&
            actor_of[action.to].behavior != Behavior::spammer)
            out.metrics.spam_messages_relayed_by_honest_nodes += 1;
        forward_from(action.to, action.from, action.message_index);
        return;
    }

    if (verdict.kind != VerdictKind::spam) return;

    // spam: attribute the violation, then race for the deposit
    FieldElement commitment = identity_commitment(*verdict.recovered_secret);
    auto origin_it = node_by_commitment.find(commitment.value());
    if (origin_it == node_by_commitment.end()) {
        flag_violation("spam verdict recovered a secret matching no member");
        return;
    }
    const std::uint32_t origin = origin_it->second;
    if (actor_of[origin].behavior != Behavior::spammer)
        flag_violation("spam verdict recovered an honest member's secret");

    const RateLimitStatement& st = message.bundle.statement;
    const auto key = std::make_pair(origin, st.epoch.index);
    if (!detection_of.contains(key)) {
        detection_of[key] = action.message_index;
        out.metrics.spam_detections.push_back({
            origin,
            st.epoch.index,
            message_meta.published_at,
            now,
            now - message_meta.published_at,
            0,  // filled at the end of the run
        });
    }

    RelayNode::SlashAttempt attempt = node.report_spam(verdict);
    if (attempt.succeeded) {
        out.metrics.slash_count += 1;
        out.metrics.slash_payout_total += attempt.payout;
        broadcast_latest_update();
    }
}

void Engine::handle(const RegisterAction& action) {
    register_node(action.node, false);
}

void Engine::handle(const UpdateAction& action) {
    nodes[action.to].apply_update(registry.updates()[action.update_index]);
}

void Engine::run_loop() {
    while (!queue.empty()) {
        Event event = queue.top();
        if (event.time > scenario.duration) break;
        queue.pop();
        now = event.time;
        std::visit([this](const auto& action) { handle(action); }, event.action);
    }
}

void Engine::finish() {
    // detection delay bound is measured against the trigger message itself
    for (SpamDetection& detection : out.metrics.spam_detections) {
        const auto key = std::make_pair(detection.origin_node, detection.epoch);
        detection.trigger_max_delivery_delay =
            meta[detection_of.at(key)].max_delivery_delay;
    }

    for (std::uint32_t i = 0; i < scenario.node_count; ++i)
        out.metrics.per_node[i].proof_verifications =
            nodes[i].proof_verifications();

    out.metrics.scenario = scenario.name;
    out.metrics.seed = scenario.seed;
    out.metrics.deposits_received = registry.deposits_received();
    out.metrics.escrow_total = registry.escrow_total();
    out.metrics.payouts_total = registry.payouts_total();

    if (registry.escrow_total() + registry.payouts_total() !=
        registry.deposits_received())
        flag_violation("ledger conservation failed");

    std::uint64_t verdict_sum = 0;
    for (const auto& [kind, count] : out.metrics.verdicts) verdict_sum += count;
    if (verdict_sum != out.metrics.validations)
        flag_violation("verdict counts do not sum to validations");

    out.ledger_jsonl = registry.ledger_jsonl();
    out.registry_snapshot = registry.snapshot();
}

}  // namespace

std::vector<PublishInstant> behavior_schedule(const ActorSpec& actor,
                                              const Scenario& scenario) {
    std::vector<PublishInstant> instants;
    if (!actor.publishes()) return instants;
    const std::uint32_t count = actor.behavior == Behavior::spammer ? actor.burst : 1;

    std::vector<std::uint64_t> epochs;
    if (actor.publish_every_epoch) {
        for (std::uint64_t e = 0;; ++e) {
            const std::int64_t t =
                static_cast<std::int64_t>(e) * scenario.epoch_length + 1;
            if (t > scenario.duration) break;
            epochs.push_back(e);
        }
    } else {
        epochs = actor.publish_epochs;
    }

    for (std::uint64_t e : epochs) {
        const std::int64_t t =
            static_cast<std::int64_t>(e) * scenario.epoch_length + 1;
        if (t > scenario.duration || t < actor.register_at) continue;
        instants.push_back({e, t, count});
    }
    return instants;
}

std::vector<std::vector<std::uint32_t>> build_topology(const Scenario& scenario) {
    scenario.validate();
    const std::uint32_t n = scenario.node_count;
    std::vector<std::set<std::uint32_t>> edges(n);

    auto connect = [&edges](std::uint32_t a, std::uint32_t b) {
        edges[a].insert(b);
        edges[b].insert(a);
    };

    switch (scenario.topology) {
        case TopologyKind::complete:
            for (std::uint32_t i = 0; i < n; ++i)
                for (std::uint32_t j = i + 1; j < n; ++j) connect(i, j);
            break;
        case TopologyKind::ring:
            for (std::uint32_t i = 0; i + 1 < n; ++i) connect(i, i + 1);
            if (n > 2) connect(n - 1, 0);
            break;
        case TopologyKind::random_regular: {
            std::mt19937_64 rng(scenario.seed ^ 0x746f706f6c6f6779ull);
            bool built = false;
            for (int attempt = 0; attempt < 100 && !built; ++attempt) {
                for (auto& adjacent : edges) adjacent.clear();
                std::vector<std::uint32_t> stubs;
                stubs.reserve(std::size_t(n) * scenario.degree);
                for (std::uint32_t i = 0; i < n; ++i)
                    for (std::uint32_t d = 0; d < scenario.degree; ++d)
                        stubs.push_back(i);
                // Fisher-Yates with the seeded stream
                for (std::size_t i = stubs.size(); i > 1; --i)
                    std::swap(stubs[i - 1], stubs[rng() % i]);
                bool ok = true;
                for (std::size_t i = 0; i + 1 < stubs.size() && ok; i += 2) {
                    std::uint32_t a = stubs[i], b = stubs[i + 1];
                    if (a == b || edges[a].contains(b)) ok = false;
                    else connect(a, b);
                }
                if (!ok) continue;
                // connectivity sweep
                std::vector<bool> reached(n, false);
                std::vector<std::uint32_t> frontier{0};
                reached[0] = true;
                std::size_t visited = 1;
                while (!frontier.empty()) {
                    std::uint32_t at = frontier.back();
                    frontier.pop_back();
                    for (std::uint32_t peer : edges[at]) {
                        if (!reached[peer]) {
                            reached[peer] = true;
                            ++visited;
                            frontier.push_back(peer);
                        }
                    }
                }
                built = visited == n;
            }
            if (!built)
                throw ScenarioError(
                    "could not build a connected random-regular topology in "
                    "100 attempts");
            break;
        }
    }

    std::vector<std::vector<std::uint32_t>> adjacency(n);
    for (std::uint32_t i = 0; i < n; ++i)
        adjacency[i].assign(edges[i].begin(), edges[i].end());
    return adjacency;
}

nlohmann::ordered_json MetricsReport::to_json() const {
    nlohmann::ordered_json verdicts_doc = nlohmann::ordered_json::object();
    for (const auto& [kind, count] : verdicts)
        verdicts_doc[std::string(to_string(kind))] = count;

    nlohmann::ordered_json detections_doc = nlohmann::ordered_json::array();
    for (const SpamDetection& d : spam_detections) {
        detections_doc.push_back({
            {"origin_node", d.origin_node},
            {"epoch", d.epoch},
            {"trigger_published_at", d.trigger_published_at},
            {"first_detected_at", d.first_detected_at},
            {"detection_delay", d.detection_delay},
            {"trigger_max_delivery_delay", d.trigger_max_delivery_delay},
        });
    }

    nlohmann::ordered_json per_node_doc = nlohmann::ordered_json::array();
    for (const NodeStats& stats : per_node) {
        per_node_doc.push_back({
            {"node", "n" + std::to_string(stats.node)},
            {"messages_sent", stats.messages_sent},
            {"bandwidth_bytes", stats.bandwidth_bytes},
            {"log_high_water", stats.log_high_water},
            {"proof_verifications", stats.proof_verifications},
        });
    }

    return nlohmann::ordered_json{
        {"scenario", scenario},
        {"seed", seed},
        {"messages_published", messages_published},
        {"publish_failures", publish_failures},
        {"validations", validations},
        {"verdicts", std::move(verdicts_doc)},
        {"messages_relayed", messages_relayed},
        {"spam_messages_relayed_by_honest_nodes",
         spam_messages_relayed_by_honest_nodes},
        {"spam_detections", std::move(detections_doc)},
        {"slash_count", slash_count},
        {"slash_payout_total", slash_payout_total},
        {"per_node", std::move(per_node_doc)},
        {"registry",
         {{"deposits_received", deposits_received},
          {"escrow", escrow_total},
          {"payouts", payouts_total}}},
    };
}

std::string RunOutput::verdicts_jsonl() const {
    std::ostringstream out;
    for (const VerdictRecord& record : verdict_log) {
        nlohmann::ordered_json line{
            {"time", record.time},
            {"node", record.node},
            {"message-id", record.message_id},
            {"verdict", std::string(to_string(record.verdict))},
            {"epoch", record.epoch},
            {"nullifier", record.nullifier},
        };
        out << line.dump() << '\n';
    }
    return out.str();
}

RunOutput run_scenario(const Scenario& scenario) {
    Engine engine(scenario);
    engine.setup();
    engine.run_loop();
    engine.finish();
    return std::move(engine.out);
}

}  // namespace rln::sim
