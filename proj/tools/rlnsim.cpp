// SPDX-License-Identifier: Apache-2.0
//
// rlnsim: operator entry point for the rate-limited relay simulation.
//   run      execute a scenario file, write metrics/verdicts/ledger
//   vectors  emit conformance vectors for cross-implementation checks
//   bench    micro-benchmarks of the hot operations
//   inspect  pretty-print a previous run's output directory
//
// Exit codes: 0 success, 1 usage or input error, 2 invariant violation
// detected during a run.

#include "rln/proof.hpp"
#include "rln/relay.hpp"
#include "rln/simnet.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::ordered_json;

std::string hex_encode(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

bool write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return static_cast<bool>(out);
}

const rln::FieldModulus* kAllModuli[] = {
    &rln::FieldModulus::p97(),
    &rln::FieldModulus::p61(),
    &rln::FieldModulus::bn254(),
};

std::string modulus_label(const rln::FieldModulus& m) {
    if (&m == &rln::FieldModulus::p97()) return "p97";
    if (&m == &rln::FieldModulus::p61()) return "p61";
    return "default";
}

// --- run -----------------------------------------------------------------

struct RunArgs {
    std::string scenario_path;
    std::string out_dir;
    std::int64_t seed = -1;
    std::string modulus;
    bool quiet = false;
};

int cmd_run(const RunArgs& args) {
    rln::sim::Scenario scenario;
    try {
        scenario = rln::sim::Scenario::load_file(args.scenario_path);
        if (args.seed >= 0) scenario.seed = static_cast<std::uint64_t>(args.seed);
        if (!args.modulus.empty()) {
            if (rln::FieldModulus::by_name(args.modulus) == nullptr) {
                std::cerr << "rlnsim: unknown modulus '" << args.modulus << "'\n";
                return 1;
            }
            scenario.modulus_name = args.modulus;
        }
        scenario.validate();
    } catch (const std::exception& e) {
        std::cerr << "rlnsim: " << e.what() << '\n';
        return 1;
    }

    rln::sim::RunOutput output;
    try {
        output = rln::sim::run_scenario(scenario);
    } catch (const std::exception& e) {
        std::cerr << "rlnsim: scenario failed: " << e.what() << '\n';
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    const std::filesystem::path dir(args.out_dir);
    const std::string metrics = output.metrics.to_json().dump(2) + "\n";
    if (!write_file(dir / "metrics.json", metrics) ||
        !write_file(dir / "verdicts.jsonl", output.verdicts_jsonl()) ||
        !write_file(dir / "ledger.jsonl", output.ledger_jsonl) ||
        !write_file(dir / "registry.json",
                    output.registry_snapshot.dump(2) + "\n")) {
        std::cerr << "rlnsim: cannot write outputs under " << args.out_dir << '\n';
        return 1;
    }

    if (!args.quiet) {
        std::cout << "scenario " << scenario.name << " seed " << scenario.seed
                  << ": published " << output.metrics.messages_published
                  << ", relayed " << output.metrics.messages_relayed
                  << ", spam detections " << output.metrics.spam_detections.size()
                  << ", slashes " << output.metrics.slash_count << '\n';
    }
    if (output.invariant_violation) {
        std::cerr << "rlnsim: invariant violation: " << output.violation_reason
                  << '\n';
        return 2;
    }
    return 0;
}

// --- vectors ---------------------------------------------------------------

ordered_json hash_vector_line(std::string_view domain,
                              const std::vector<rln::FieldElement>& inputs,
                              const rln::FieldModulus& m) {
    ordered_json inputs_doc = ordered_json::array();
    for (const rln::FieldElement& fe : inputs) inputs_doc.push_back(fe.to_decimal());
    rln::FieldElement out = rln::hash_to_field(
        domain, std::span<const rln::FieldElement>(inputs), m);
    return ordered_json{
        {"domain", std::string(domain)},
        {"inputs", std::move(inputs_doc)},
        {"modulus", m.decimal()},
        {"output", out.to_decimal()},
    };
}

std::string make_hash_vectors() {
    std::ostringstream out;
    for (const rln::FieldModulus* m : kAllModuli) {
        auto fe = [m](std::uint64_t v) { return rln::FieldElement::from_u64(v, *m); };
        const rln::FieldElement top{m->prime() - 1, *m};
        out << hash_vector_line(rln::kDomainLeaf, {fe(1)}, *m) << '\n';
        out << hash_vector_line(rln::kDomainLeaf, {fe(2)}, *m) << '\n';
        out << hash_vector_line(rln::kDomainA1, {fe(2), fe(3)}, *m) << '\n';
        out << hash_vector_line(rln::kDomainA1, {fe(3), fe(2)}, *m) << '\n';
        out << hash_vector_line(rln::kDomainNullifier, {fe(7)}, *m) << '\n';
        out << hash_vector_line(rln::kDomainNode, {fe(0), top}, *m) << '\n';
        out << hash_vector_line(rln::kDomainX, {}, *m) << '\n';
    }
    return out.str();
}

std::string make_share_vectors() {
    std::ostringstream out;
    for (const rln::FieldModulus* m : kAllModuli) {
        for (std::uint64_t i = 0; i < 2; ++i) {
            rln::IdentityKeypair identity = rln::keygen(1000 + i, *m);
            rln::Epoch epoch{5 + i};
            std::string payload = "vector-payload-" + std::to_string(i);
            std::vector<std::uint8_t> bytes(payload.begin(), payload.end());
            rln::RlnShare share = rln::make_share(identity.secret, epoch, bytes);
            out << ordered_json{
                       {"modulus", m->decimal()},
                       {"secret", identity.secret.to_decimal()},
                       {"commitment", identity.commitment.to_decimal()},
                       {"epoch", epoch.index},
                       {"payload_hex", hex_encode(bytes)},
                       {"x", share.x.to_decimal()},
                       {"y", share.y.to_decimal()},
                       {"nullifier", share.nullifier.to_decimal()},
                       {"serialized_hex", hex_encode(rln::serialize_share(share))},
                   }
                << '\n';
        }
    }
    return out.str();
}

std::string make_recovery_vectors() {
    std::ostringstream out;
    for (const rln::FieldModulus* m : kAllModuli) {
        for (std::uint64_t i = 0; i < 2; ++i) {
            rln::IdentityKeypair identity = rln::keygen(2000 + i, *m);
            rln::Epoch epoch{9};
            std::string one = "first-" + std::to_string(i);
            std::string two = "second-" + std::to_string(i);
            std::vector<std::uint8_t> p1(one.begin(), one.end());
            std::vector<std::uint8_t> p2(two.begin(), two.end());
            rln::RlnShare s1 = rln::make_share(identity.secret, epoch, p1);
            rln::RlnShare s2 = rln::make_share(identity.secret, epoch, p2);
            rln::FieldElement recovered = rln::recover_secret(s1, s2);
            auto share_doc = [](const rln::RlnShare& s) {
                return ordered_json{{"x", s.x.to_decimal()},
                                    {"y", s.y.to_decimal()},
                                    {"nullifier", s.nullifier.to_decimal()}};
            };
            out << ordered_json{
                       {"modulus", m->decimal()},
                       {"epoch", epoch.index},
                       {"shares", ordered_json::array({share_doc(s1), share_doc(s2)})},
                       {"recovered", recovered.to_decimal()},
                   }
                << '\n';
        }
    }
    return out.str();
}

std::string make_tree_vectors() {
    std::ostringstream out;
    for (const rln::FieldModulus* m : kAllModuli) {
        rln::MembershipTree tree(4, *m);
        ordered_json leaves = ordered_json::array();
        for (std::uint64_t i = 0; i < 5; ++i) {
            rln::FieldElement leaf =
                rln::hash_to_field(rln::kDomainLeaf,
                                   {rln::FieldElement::from_u64(100 + i, *m)}, *m);
            tree.insert(leaf);
            leaves.push_back(leaf.to_decimal());
        }
        tree.remove(2);
        rln::MerklePath path = tree.prove(3);
        ordered_json siblings = ordered_json::array();
        for (const rln::FieldElement& s : path.siblings)
            siblings.push_back(s.to_decimal());
        out << ordered_json{
                   {"modulus", m->decimal()},
                   {"depth", tree.depth()},
                   {"leaves", std::move(leaves)},
                   {"deleted", ordered_json::array({2})},
                   {"root", tree.root().to_decimal()},
                   {"path",
                    ordered_json{{"leaf_index", path.leaf_index},
                                 {"siblings", std::move(siblings)}}},
                   {"path_leaf", tree.leaf(3).to_decimal()},
               }
            << '\n';
    }
    return out.str();
}

std::string make_bundle_vectors() {
    std::ostringstream out;
    rln::BackendRegistry backends = rln::BackendRegistry::with_defaults();
    const rln::ProofBackend* backend = backends.find(rln::TransparentBackend::kId);
    for (const rln::FieldModulus* m : kAllModuli) {
        rln::MembershipTree tree(8, *m);
        rln::IdentityKeypair identity = rln::keygen(3000, *m);
        std::uint64_t index = tree.insert(identity.commitment);
        rln::Epoch epoch{4};
        std::string payload = "bundle-vector";
        std::vector<std::uint8_t> bytes(payload.begin(), payload.end());
        rln::RlnShare share = rln::make_share(identity.secret, epoch, bytes);
        rln::RateLimitStatement statement{tree.root(), epoch, share.x, share.y,
                                          share.nullifier};
        rln::ProofBundle bundle =
            rln::prove(statement, {identity.secret, tree.prove(index)}, *backend);

        auto statement_doc = [](const rln::RateLimitStatement& st) {
            return ordered_json{{"root", st.merkle_root.to_decimal()},
                                {"epoch", st.epoch.index},
                                {"x", st.x.to_decimal()},
                                {"y", st.y.to_decimal()},
                                {"nullifier", st.nullifier.to_decimal()}};
        };
        out << ordered_json{
                   {"modulus", m->decimal()},
                   {"statement", statement_doc(statement)},
                   {"backend", bundle.backend_id},
                   {"wire_hex", hex_encode(rln::serialize_bundle(bundle))},
                   {"verifies", true},
               }
            << '\n';

        // same wire bytes with a corrupted y: must verify false
        rln::ProofBundle bad = bundle;
        bad.statement.y = bad.statement.y + rln::FieldElement::one(*m);
        out << ordered_json{
                   {"modulus", m->decimal()},
                   {"statement", statement_doc(bad.statement)},
                   {"backend", bad.backend_id},
                   {"wire_hex", hex_encode(rln::serialize_bundle(bad))},
                   {"verifies", false},
               }
            << '\n';
    }
    return out.str();
}

int cmd_vectors(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::filesystem::path dir(out_dir);

    const std::pair<std::string, std::string> files[] = {
        {"hash_vectors.jsonl", make_hash_vectors()},
        {"share_vectors.jsonl", make_share_vectors()},
        {"recovery_vectors.jsonl", make_recovery_vectors()},
        {"tree_vectors.jsonl", make_tree_vectors()},
        {"bundle_vectors.jsonl", make_bundle_vectors()},
    };

    ordered_json counts = ordered_json::object();
    for (const auto& [name, content] : files) {
        if (!write_file(dir / name, content)) {
            std::cerr << "rlnsim: cannot write " << (dir / name) << '\n';
            return 1;
        }
        counts[name] =
            std::count(content.begin(), content.end(), '\n');
    }
    ordered_json manifest{
        {"schema", "rlnsim-vectors/1"},
        {"moduli", {"p97", "p61", "default"}},
        {"files", std::move(counts)},
    };
    if (!write_file(dir / "manifest.json", manifest.dump(2) + "\n")) {
        std::cerr << "rlnsim: cannot write manifest\n";
        return 1;
    }
    return 0;
}

// --- bench -----------------------------------------------------------------

template <typename F>
std::int64_t median_ns(std::size_t iterations, F&& body) {
    std::vector<std::int64_t> samples;
    samples.reserve(iterations);
    for (std::size_t i = 0; i < iterations; ++i) {
        auto begin = std::chrono::steady_clock::now();
        body(i);
        auto end = std::chrono::steady_clock::now();
        samples.push_back(
            std::chrono::duration_cast<std::chrono::nanoseconds>(end - begin)
                .count());
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

int cmd_bench(std::size_t iterations, const std::string& out_path,
              const std::string& modulus_name) {
    const rln::FieldModulus* m = rln::FieldModulus::by_name(
        modulus_name.empty() ? "default" : modulus_name);
    if (m == nullptr) {
        std::cerr << "rlnsim: unknown modulus '" << modulus_name << "'\n";
        return 1;
    }
    iterations = std::max<std::size_t>(iterations, 100);

    ordered_json results = ordered_json::array();
    auto report = [&results](std::string_view op, std::int64_t ns) {
        results.push_back(ordered_json{{"op", std::string(op)}, {"median_ns", ns}});
    };

    rln::IdentityKeypair identity = rln::keygen(77, *m);
    rln::Epoch epoch{12};
    std::string payload_text = "bench-payload";
    std::vector<std::uint8_t> payload(payload_text.begin(), payload_text.end());

    // batched: one add is far below the clock resolution
    rln::FieldElement acc = rln::FieldElement::from_u64(1, *m);
    const rln::FieldElement step = rln::FieldElement::from_u64(12345, *m);
    report("fe_add", median_ns(iterations, [&](std::size_t) {
               for (int i = 0; i < 1024; ++i) acc = acc + step;
           }) / 1024);

    report("make_share", median_ns(iterations, [&](std::size_t i) {
               payload.back() = static_cast<std::uint8_t>(i);
               rln::make_share(identity.secret, epoch, payload);
           }));

    rln::MembershipTree tree(20, *m);
    std::uint64_t leaf_index = tree.insert(identity.commitment);
    rln::BackendRegistry backends = rln::BackendRegistry::with_defaults();
    const rln::ProofBackend* backend = backends.find(rln::TransparentBackend::kId);

    rln::RlnShare share = rln::make_share(identity.secret, epoch, payload);
    rln::RateLimitStatement statement{tree.root(), epoch, share.x, share.y,
                                      share.nullifier};
    rln::RateLimitWitness witness{identity.secret, tree.prove(leaf_index)};
    report("prove", median_ns(iterations, [&](std::size_t) {
               rln::prove(statement, witness, *backend);
           }));

    rln::ProofBundle bundle = rln::prove(statement, witness, *backend);
    report("verify", median_ns(iterations, [&](std::size_t) {
               rln::verify(bundle, backends);
           }));

    report("tree_insert_depth20", median_ns(iterations, [&](std::size_t i) {
               tree.insert(rln::FieldElement::from_u64(0x10000 + i, *m));
           }));

    std::string other_text = "bench-payload-2";
    std::vector<std::uint8_t> other(other_text.begin(), other_text.end());
    rln::RlnShare second = rln::make_share(identity.secret, epoch, other);
    report("recover_secret", median_ns(iterations, [&](std::size_t) {
               rln::recover_secret(share, second);
           }));

    // serial loop vs OpenMP kernel over one batch of independent bundles
    constexpr std::size_t kBatch = 128;
    std::vector<rln::ProofBundle> batch(kBatch, bundle);
    const std::size_t batch_reps = std::max<std::size_t>(iterations / 10, 10);
    report("verify_batch128_serial", median_ns(batch_reps, [&](std::size_t) {
               rln::verify_batch_serial(batch, backends);
           }));
    report("verify_batch128_parallel", median_ns(batch_reps, [&](std::size_t) {
               rln::verify_batch_parallel(batch, backends);
           }));

    ordered_json doc{
        {"schema", "rlnsim-bench/1"},
        {"modulus", modulus_label(*m)},
        {"iterations", iterations},
        {"results", std::move(results)},
    };
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else if (!write_file(out_path, text)) {
        std::cerr << "rlnsim: cannot write " << out_path << '\n';
        return 1;
    }
    return 0;
}

// --- inspect -----------------------------------------------------------------

int cmd_inspect(const std::string& in_dir) {
    const std::filesystem::path dir(in_dir);
    std::ifstream metrics_in(dir / "metrics.json");
    if (!metrics_in) {
        std::cerr << "rlnsim: no metrics.json under " << in_dir << '\n';
        return 1;
    }
    nlohmann::json metrics;
    try {
        metrics_in >> metrics;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "rlnsim: metrics.json is not valid JSON: " << e.what() << '\n';
        return 1;
    }

    std::cout << "scenario:   " << metrics.value("scenario", std::string("?"))
              << " (seed " << metrics.value("seed", 0ull) << ")\n"
              << "published:  " << metrics.value("messages_published", 0ull)
              << "  relayed: " << metrics.value("messages_relayed", 0ull)
              << "  validations: " << metrics.value("validations", 0ull) << '\n';
    if (metrics.contains("verdicts")) {
        std::cout << "verdicts:\n";
        for (const auto& [kind, count] : metrics["verdicts"].items())
            std::cout << "  " << kind << ": " << count << '\n';
    }
    std::cout << "slashes:    " << metrics.value("slash_count", 0ull)
              << "  payout total: " << metrics.value("slash_payout_total", 0ll)
              << '\n';
    for (const auto& detection :
         metrics.value("spam_detections", nlohmann::json::array())) {
        std::cout << "  spam by n" << detection.value("origin_node", 0)
                  << " epoch " << detection.value("epoch", 0ull)
                  << " detected after " << detection.value("detection_delay", 0ll)
                  << " time units\n";
    }

    std::ifstream ledger_in(dir / "ledger.jsonl");
    if (ledger_in) {
        std::size_t entries = 0;
        std::string line;
        while (std::getline(ledger_in, line))
            if (!line.empty()) ++entries;
        std::cout << "ledger:     " << entries << " entries\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rate-limited gossip relay simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("--scenario", run_args.scenario_path, "scenario JSON path")
        ->required();
    run->add_option("--out", run_args.out_dir, "output directory")->required();
    run->add_option("--seed", run_args.seed, "override the scenario seed");
    run->add_option("--modulus", run_args.modulus,
                    "override the field: default|p61|p97");
    run->add_flag("--quiet", run_args.quiet, "suppress the summary line");

    std::string vectors_out;
    CLI::App* vectors =
        app.add_subcommand("vectors", "emit conformance vector files");
    vectors->add_option("--out", vectors_out, "output directory")->required();

    std::size_t bench_iters = 101;
    std::string bench_out;
    std::string bench_modulus;
    CLI::App* bench = app.add_subcommand("bench", "micro-benchmarks");
    bench->add_option("--iters", bench_iters,
                      "iterations per operation (min 100)");
    bench->add_option("--out", bench_out, "write JSON here instead of stdout");
    bench->add_option("--modulus", bench_modulus, "field: default|p61|p97");

    std::string inspect_in;
    CLI::App* inspect =
        app.add_subcommand("inspect", "summarize a run output directory");
    inspect->add_option("--in", inspect_in, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (vectors->parsed()) return cmd_vectors(vectors_out);
        if (bench->parsed())
            return cmd_bench(bench_iters, bench_out, bench_modulus);
        if (inspect->parsed()) return cmd_inspect(inspect_in);
    } catch (const std::exception& e) {
        std::cerr << "rlnsim: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
