#include "setrecon/cli.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "setrecon/gossip.hpp"
#include "setrecon/relay.hpp"
#include "setrecon/sketch.hpp"
#include "setrecon/wire.hpp"

namespace setrecon::cli {

using nlohmann::json;

std::vector<u64> parse_key_set(std::istream& in, u64 m, const std::string& source) {
    std::vector<u64> keys;
    std::map<u64, std::size_t> first_line;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw Error(Errc::ParseError, source + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(begin, end - begin + 1);
        if (token.find_first_not_of("0123456789") != std::string::npos) fail("not an unsigned decimal key: " + token);
        u64 key = 0;
        try {
            std::size_t used = 0;
            key = std::stoull(token, &used);
        } catch (const std::exception&) {
            fail("key does not fit in 64 bits: " + token);
        }
        if (key >= m) fail("key " + token + " is not below m=" + std::to_string(m));
        const auto [it, fresh] = first_line.emplace(key, line_no);
        if (!fresh) fail("duplicate key " + token + " (first on line " + std::to_string(it->second) + ")");
        keys.push_back(key);
    }
    return keys;
}

std::vector<u64> read_key_set(const std::filesystem::path& path, u64 m) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot open key file " + path.string());
    return parse_key_set(in, m, path.string());
}

std::uint64_t information_floor_bits(u64 n, u64 k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    u128 exact = 1;
    bool overflow = false;
    for (u64 i = 0; i < k; ++i) {
        if (exact > (u128{1} << 100)) {
            overflow = true;
            break;
        }
        exact = exact * (n - i) / (i + 1);
    }
    if (!overflow) {
        if (exact <= 1) return 0;
        // ceil(log2 C) is the bit width of C - 1.
        u128 v = exact - 1;
        std::uint64_t bits = 0;
        while (v != 0) {
            ++bits;
            v >>= 1;
        }
        return bits;
    }
    long double log2c = 0;
    for (u64 i = 0; i < k; ++i) {
        log2c += std::log2(static_cast<long double>(n - i)) - std::log2(static_cast<long double>(i + 1));
    }
    return static_cast<std::uint64_t>(std::ceil(log2c - 1e-9L));
}

namespace {

json params_json(const SketchParams& p) {
    return {{"q", p.q()}, {"d", p.d()}, {"c", p.c()}, {"m", p.m()}, {"N", p.field().owner_count}};
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::InvalidArgument, "cannot write " + path);
    f << text;
}

int exit_code_for(const Error& e) { return is_decode_failure(e.code()) ? kExitProtocol : kExitConfig; }

std::string describe(const Error& e) {
    if (is_decode_failure(e.code())) return std::string("difference bound exceeded: ") + e.what();
    return e.what();
}

std::vector<std::vector<u64>> read_sets(const std::vector<std::string>& files, u64 m) {
    std::vector<std::vector<u64>> sets;
    sets.reserve(files.size());
    for (const auto& f : files) sets.push_back(read_key_set(f, m));
    return sets;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Reconcile2Options {
    std::string file_a, file_b, out_path;
    u64 m = 0;
    std::uint32_t d = 0, c = 2;
    bool timing = false;
};

int cmd_reconcile2(const Reconcile2Options& o, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const std::vector<u64> a = read_key_set(o.file_a, o.m);
    const std::vector<u64> b = read_key_set(o.file_b, o.m);
    const SketchParams params(choose_field(o.m, 1, o.d, o.c));

    // Each side sketches its set and ships the encoded message to the other.
    const Message from_a = encode_message(make_sketch(a, params));
    const Message from_b = encode_message(make_sketch(b, params));
    const Sketch a_sketch = make_sketch(a, params);
    const Sketch b_sketch = make_sketch(b, params);

    json report;
    report["mode"] = "reconcile2";
    report["params"] = params_json(params);
    const std::uint64_t payload_bits = params.size() * static_cast<std::uint64_t>(std::bit_width(params.q() - 1));
    report["audit"] = {{"messages", 2},
                       {"bytes_per_message", message_size(params)},
                       {"total_bytes", from_a.size() + from_b.size()},
                       {"payload_bits_per_message", payload_bits}};

    int code = kExitOk;
    try {
        const SetDifference at_a = recover_difference(a_sketch, decode_message(from_b).sketch);
        const SetDifference at_b = recover_difference(b_sketch, decode_message(from_a).sketch);
        report["status"] = "ok";
        report["parties"] = json::array({
            {{"name", "A"}, {"size", a.size()}, {"learned", at_a.b_minus_a}, {"bytes_received", from_b.size()},
             {"information_floor_bits", information_floor_bits(o.m - a.size(), o.d)}},
            {{"name", "B"}, {"size", b.size()}, {"learned", at_b.b_minus_a}, {"bytes_received", from_a.size()},
             {"information_floor_bits", information_floor_bits(o.m - b.size(), o.d)}},
        });
        report["ops"] = {{"interpolations", 2}, {"factorizations", 4}};
    } catch (const Error& e) {
        report["status"] = "error";
        report["error"] = describe(e);
        err << "error: " << describe(e) << "\n";
        code = exit_code_for(e);
    }
    if (o.timing) report["wall_time_ms"] = elapsed_ms(start);
    write_text(o.out_path, report.dump(2) + "\n", out);
    return code;
}

struct RelayOptions {
    std::vector<std::string> parties;
    std::string out_path, order = "arrival";
    u64 m = 0, seed = 0;
    std::uint32_t d = 0, c = 2;
    bool owners = false, timing = false;
};

int cmd_relay_sim(const RelayOptions& o, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    RelayRunConfig config;
    config.sets = read_sets(o.parties, o.m);
    config.m = o.m;
    config.d = o.d;
    config.c = o.c;
    config.mode = o.owners ? RelayMode::owner : RelayMode::plain;
    config.order = o.order == "ascending" ? RelayOrder::ascending : RelayOrder::arrival;
    config.seed = o.seed;
    if (config.sets.empty()) throw Error(Errc::InvalidArgument, "--parties needs at least one file");

    json report;
    report["mode"] = o.owners ? "relay-owner" : "relay";
    report["params"] = params_json(relay_params(o.m, static_cast<std::uint32_t>(config.sets.size()), o.d, o.c,
                                                config.mode));
    report["order"] = o.order;
    report["seed"] = o.seed;
    int code = kExitOk;
    try {
        const RelayRunResult r = run_relay(config);
        report["status"] = "ok";
        report["ingest_order"] = r.ingest_order;
        json parties = json::array();
        for (std::size_t i = 0; i < r.recovered.size(); ++i) {
            json p = {{"party", i + 1}, {"file", o.parties[i]}, {"recovered", r.recovered[i].keys}};
            if (o.owners) p["owners"] = r.recovered[i].owners;
            parties.push_back(std::move(p));
        }
        report["parties"] = std::move(parties);
        report["audit"] = {{"party_messages", r.party_messages},
                           {"broadcast_messages", r.broadcast_messages},
                           {"bytes_per_message", r.bytes_per_message},
                           {"total_bytes", r.total_bytes}};
        report["relay_ops"] = {{"interpolations", r.counters.interpolations},
                               {"factorizations", r.counters.factorizations},
                               {"combinations", r.counters.combinations}};
    } catch (const Error& e) {
        report["status"] = "error";
        report["error"] = describe(e);
        err << "error: " << describe(e) << "\n";
        code = exit_code_for(e);
    }
    if (o.timing) report["wall_time_ms"] = elapsed_ms(start);
    write_text(o.out_path, report.dump(2) + "\n", out);
    return code;
}

struct GossipOptions {
    std::string graph, placement, out_path, rounds_csv;
    std::vector<std::string> parties;
    u64 m = 0, seed = 0;
    std::uint32_t d = 0, c = 2, max_rounds = 100;
    bool owners = false, timing = false;
};

Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ParseError, "cannot open graph file " + path);
    return read_graph(in);
}

int cmd_gossip_sim(const GossipOptions& o, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    SimConfig config;
    config.graph = load_graph(o.graph);
    config.sets = read_sets(o.parties, o.m);
    if (config.sets.empty()) throw Error(Errc::InvalidArgument, "--parties needs at least one file");
    {
        std::ifstream in(o.placement);
        if (!in) throw Error(Errc::ParseError, "cannot open placement file " + o.placement);
        config.party_at =
            read_placement(in, config.graph.vertex_count(), static_cast<std::uint32_t>(config.sets.size()));
    }
    config.mode = o.owners ? GossipMode::owner : GossipMode::plain;
    config.params = gossip_params(o.m, static_cast<std::uint32_t>(config.sets.size()), o.d, o.c, config.mode);
    config.seed = o.seed;
    config.max_rounds = o.max_rounds;
    if (!config.graph.connected()) throw Error(Errc::Disconnected, "gossip graph must be connected");

    json report;
    report["mode"] = o.owners ? "gossip-owner" : "gossip";
    report["params"] = params_json(config.params);
    report["seed"] = o.seed;
    report["max_rounds"] = o.max_rounds;
    report["graph"] = {{"vertices", config.graph.vertex_count()}, {"edges", config.graph.edge_count()}};
    int code = kExitOk;
    try {
        const SimResult sim = simulate(config);
        const SimLog& log = sim.log;
        report["completed"] = log.completed();
        report["completion_round"] = log.completion_round ? json(*log.completion_round) : json(nullptr);
        report["rounds_run"] = log.rounds_run;
        report["audit"] = {{"bytes_per_message", message_size(config.params)},
                           {"total_messages", log.total_messages},
                           {"total_bytes", log.total_bytes},
                           {"max_messages_per_contact", log.max_messages_per_contact},
                           {"max_pull_responses", log.max_pull_responses}};
        if (log.completed()) {
            report["status"] = "ok";
            const auto recovered = decode_all(config, sim.states);
            json parties = json::array();
            for (std::size_t i = 0; i < recovered.size(); ++i) {
                json p = {{"party", i + 1}, {"file", o.parties[i]}, {"recovered", recovered[i].keys}};
                if (o.owners) p["owners"] = recovered[i].owners;
                parties.push_back(std::move(p));
            }
            report["parties"] = std::move(parties);
        } else {
            report["status"] = "max_rounds_exceeded";
        }
        if (!o.rounds_csv.empty()) {
            std::ostringstream csv;
            csv << "round,sub_round,vertex,known_count,bytes_sent\n";
            for (const auto& rec : log.records) {
                for (std::size_t v = 0; v < rec.known_count.size(); ++v) {
                    csv << rec.round << ',' << static_cast<int>(rec.sub_round) << ',' << v << ','
                        << rec.known_count[v] << ',' << rec.bytes[v] << '\n';
                }
            }
            write_text(o.rounds_csv, csv.str(), out);
        }
    } catch (const Error& e) {
        report["status"] = "error";
        report["error"] = describe(e);
        err << "error: " << describe(e) << "\n";
        code = exit_code_for(e);
    }
    if (o.timing) report["wall_time_ms"] = elapsed_ms(start);
    write_text(o.out_path, report.dump(2) + "\n", out);
    return code;
}

int cmd_conductance(const std::string& graph_path, std::ostream& out) {
    const Fraction phi = conductance(load_graph(graph_path));
    out << phi.num << '/' << phi.den << '\n';
    return kExitOk;
}

int cmd_field_find(u64 m, std::uint32_t owners, std::uint32_t d, std::uint32_t c, std::ostream& out) {
    const SketchParams params(choose_field(m, owners, d, c));
    out << "q " << params.q() << '\n' << "points";
    for (FieldElement x : params.points()) out << ' ' << x;
    out << '\n';
    return kExitOk;
}

struct SketchOptions {
    std::string keys, out_path;
    u64 m = 0;
    std::uint32_t d = 0, c = 2, owners = 1;
};

int cmd_sketch(const SketchOptions& o) {
    const SketchParams params(choose_field(o.m, o.owners, o.d, o.c));
    const Message msg = encode_message(make_sketch(read_key_set(o.keys, o.m), params));
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f) throw Error(Errc::InvalidArgument, "cannot write " + o.out_path);
    f.write(reinterpret_cast<const char*>(msg.data()), static_cast<std::streamsize>(msg.size()));
    return kExitOk;
}

int cmd_sketch_info(const std::string& path, std::ostream& out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::ParseError, "cannot open " + path);
    const Message bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const SketchMessage msg = decode_message(bytes);
    json report = {{"params", params_json(msg.sketch.params())},
                   {"cardinality", msg.sketch.cardinality()},
                   {"owner_encoded", msg.owner_encoded},
                   {"points", msg.sketch.params().points()},
                   {"evals", msg.sketch.evals()}};
    out << report.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-party set reconciliation with characteristic-polynomial sketches"};
    app.require_subcommand(1);

    Reconcile2Options r2;
    auto* reconcile2 = app.add_subcommand("reconcile2", "Two-party exchange of sketches");
    reconcile2->add_option("--a", r2.file_a, "Key file of party A")->required();
    reconcile2->add_option("--b", r2.file_b, "Key file of party B")->required();
    reconcile2->add_option("--m", r2.m, "Universe size (keys in [0, m))")->required()->check(CLI::PositiveNumber);
    reconcile2->add_option("--d", r2.d, "Difference bound")->required();
    reconcile2->add_option("--c", r2.c, "Verification points")->capture_default_str();
    reconcile2->add_option("--out", r2.out_path, "JSON report path (stdout if omitted)");
    reconcile2->add_flag("--timing", r2.timing, "Include wall time in the report");

    RelayOptions relay;
    auto* relay_cmd = app.add_subcommand("relay-sim", "N-party reconciliation through a central relay");
    relay_cmd->add_option("--parties", relay.parties, "Key files, party 1 first")->required();
    relay_cmd->add_option("--m", relay.m, "Universe size")->required()->check(CLI::PositiveNumber);
    relay_cmd->add_option("--d", relay.d, "Total difference bound")->required();
    relay_cmd->add_option("--c", relay.c, "Verification points")->capture_default_str();
    relay_cmd->add_flag("--owners", relay.owners, "Recover an owner for each missing element");
    relay_cmd->add_option("--seed", relay.seed, "Seed for arrival order")->capture_default_str();
    relay_cmd->add_option("--order", relay.order, "Ingest order")
        ->check(CLI::IsMember({"arrival", "ascending"}))
        ->capture_default_str();
    relay_cmd->add_option("--out", relay.out_path, "JSON report path")->required();
    relay_cmd->add_flag("--timing", relay.timing, "Include wall time in the report");

    GossipOptions gossip;
    auto* gossip_cmd = app.add_subcommand("gossip-sim", "PUSH-PULL reconciliation over a graph");
    gossip_cmd->add_option("--graph", gossip.graph, "Graph file")->required();
    gossip_cmd->add_option("--parties", gossip.parties, "Key files, party 1 first")->required();
    gossip_cmd->add_option("--placement", gossip.placement, "Vertex/party placement file")->required();
    gossip_cmd->add_option("--m", gossip.m, "Universe size")->required()->check(CLI::PositiveNumber);
    gossip_cmd->add_option("--d", gossip.d, "Total difference bound")->required();
    gossip_cmd->add_option("--c", gossip.c, "Verification points")->capture_default_str();
    gossip_cmd->add_flag("--owners", gossip.owners, "Carry owner tuples");
    gossip_cmd->add_option("--seed", gossip.seed, "Simulation seed")->required();
    gossip_cmd->add_option("--max-rounds", gossip.max_rounds, "Round cap")->required();
    gossip_cmd->add_option("--out", gossip.out_path, "JSON report path")->required();
    gossip_cmd->add_option("--rounds-csv", gossip.rounds_csv, "Per-sub-round CSV log");
    gossip_cmd->add_flag("--timing", gossip.timing, "Include wall time in the report");

    std::string cond_graph;
    auto* cond_cmd = app.add_subcommand("conductance", "Exact conductance of a small graph");
    cond_cmd->add_option("--graph", cond_graph, "Graph file")->required();

    u64 ff_m = 0;
    std::uint32_t ff_owners = 1, ff_d = 0, ff_c = 2;
    auto* ff_cmd = app.add_subcommand("field-find", "Choose the modulus and evaluation points");
    ff_cmd->add_option("--m", ff_m, "Universe size")->required()->check(CLI::PositiveNumber);
    ff_cmd->add_option("--owners", ff_owners, "Owner count N (1 disables owner encoding)")->capture_default_str();
    ff_cmd->add_option("--d", ff_d, "Difference bound")->required();
    ff_cmd->add_option("--c", ff_c, "Verification points")->capture_default_str();

    SketchOptions sk;
    auto* sk_cmd = app.add_subcommand("sketch", "Write the wire-format sketch of a key file");
    sk_cmd->add_option("--keys", sk.keys, "Key file")->required();
    sk_cmd->add_option("--m", sk.m, "Universe size")->required()->check(CLI::PositiveNumber);
    sk_cmd->add_option("--d", sk.d, "Difference bound")->required();
    sk_cmd->add_option("--c", sk.c, "Verification points")->capture_default_str();
    sk_cmd->add_option("--owners", sk.owners, "Owner count N")->capture_default_str();
    sk_cmd->add_option("--out", sk.out_path, "Output message file")->required();

    std::string info_path;
    auto* info_cmd = app.add_subcommand("sketch-info", "Decode a wire-format sketch to JSON");
    info_cmd->add_option("--in", info_path, "Message file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*reconcile2) return cmd_reconcile2(r2, out, err);
        if (*relay_cmd) return cmd_relay_sim(relay, out, err);
        if (*gossip_cmd) return cmd_gossip_sim(gossip, out, err);
        if (*cond_cmd) return cmd_conductance(cond_graph, out);
        if (*ff_cmd) return cmd_field_find(ff_m, ff_owners, ff_d, ff_c, out);
        if (*sk_cmd) return cmd_sketch(sk);
        if (*info_cmd) return cmd_sketch_info(info_path, out);
    } catch (const Error& e) {
        err << "error: " << describe(e) << "\n";
        return exit_code_for(e);
    }
    return kExitConfig;
}

}  // namespace setrecon::cli
