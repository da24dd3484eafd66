#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "setrecon/cli.hpp"
#include "setrecon/wire.hpp"

using namespace setrecon;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SETRECON_TEST_DATA;

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "setrecon");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string data(const char* name) { return (kData / name).string(); }

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "setrecon-cli-tests";
    fs::create_directories(dir);
    return dir / name;
}

Errc parse_error_code(const std::string& text, u64 m) {
    std::istringstream in(text);
    try {
        cli::parse_key_set(in, m, "keys");
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("key file parsing") {
    std::istringstream ok("3\n\n1\n  7 \n");
    CHECK(cli::parse_key_set(ok, 10) == std::vector<u64>{3, 1, 7});
    CHECK(parse_error_code("1\nx\n", 10) == Errc::ParseError);
    CHECK(parse_error_code("1\n10\n", 10) == Errc::ParseError);
    CHECK(parse_error_code("1\n2\n1\n", 10) == Errc::ParseError);
    CHECK(parse_error_code("-1\n", 10) == Errc::ParseError);
    std::istringstream dup("4\n5\n4\n");
    try {
        cli::parse_key_set(dup, 10, "s.keys");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("s.keys:3") != std::string::npos);
    }
}

TEST_CASE("information floor") {
    CHECK(cli::information_floor_bits(8, 2) == 5);  // C(8,2) = 28
    CHECK(cli::information_floor_bits(10, 0) == 0);
    CHECK(cli::information_floor_bits(4, 4) == 0);
    CHECK(cli::information_floor_bits(1000000, 1) == 20);
    CHECK(cli::information_floor_bits(1000000, 64) > 64 * 13);
}

TEST_CASE("field-find and conductance") {
    const Outcome ff = run_cli({"field-find", "--m", "100", "--d", "3", "--c", "2"});
    CHECK(ff.code == cli::kExitOk);
    CHECK(ff.out == "q 107\npoints 106 105 104 103 102 101\n");
    const Outcome phi = run_cli({"conductance", "--graph", data("k4.graph")});
    CHECK(phi.code == cli::kExitOk);
    CHECK(phi.out == "2/3\n");
}

TEST_CASE("reconcile2") {
    const Outcome r = run_cli({"reconcile2", "--a", data("a.keys"), "--b", data("b.keys"), "--m", "10", "--d", "2"});
    REQUIRE(r.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["parties"][0]["learned"] == nlohmann::json::array({7}));
    CHECK(j["parties"][1]["learned"] == nlohmann::json::array({1}));
    CHECK(j["audit"]["bytes_per_message"] == 42 + 8 * 5);
    CHECK(j["audit"]["total_bytes"] == 2 * (42 + 8 * 5));

    const Outcome same = run_cli({"reconcile2", "--a", data("a.keys"), "--b", data("a.keys"), "--m", "10", "--d", "2"});
    CHECK(same.code == cli::kExitOk);
    CHECK(nlohmann::json::parse(same.out)["parties"][0]["learned"].empty());

    const Outcome far = run_cli({"reconcile2", "--a", data("a.keys"), "--b", data("far.keys"), "--m", "10", "--d", "2"});
    CHECK(far.code == cli::kExitProtocol);
    CHECK(far.err.find("difference bound exceeded") != std::string::npos);
    CHECK(nlohmann::json::parse(far.out)["status"] == "error");
}

TEST_CASE("config errors exit with code 2") {
    CHECK(run_cli({}).code == cli::kExitConfig);
    CHECK(run_cli({"reconcile2", "--a", data("a.keys")}).code == cli::kExitConfig);
    CHECK(run_cli({"reconcile2", "--a", "missing.keys", "--b", data("b.keys"), "--m", "10", "--d", "2"}).code ==
          cli::kExitConfig);
    // Key 7 is outside a universe of size 5.
    CHECK(run_cli({"reconcile2", "--a", data("a.keys"), "--b", data("b.keys"), "--m", "5", "--d", "2"}).code ==
          cli::kExitConfig);
    CHECK(run_cli({"relay-sim", "--parties", data("a.keys"), "--m", "10", "--d", "2", "--order", "sideways", "--out",
                   scratch("x.json").string()})
              .code == cli::kExitConfig);
}

TEST_CASE("relay-sim reports and is deterministic") {
    const fs::path out1 = scratch("relay1.json"), out2 = scratch("relay2.json");
    for (const auto& out : {out1, out2}) {
        const Outcome r = run_cli({"relay-sim", "--parties", data("a.keys"), data("b.keys"), "--m", "10", "--d", "2",
                                   "--owners", "--seed", "7", "--out", out.string()});
        REQUIRE(r.code == cli::kExitOk);
    }
    CHECK(slurp(out1) == slurp(out2));
    const auto j = nlohmann::json::parse(slurp(out1));
    CHECK(j["audit"]["broadcast_messages"] == 2);
    CHECK(j["audit"]["party_messages"] == 2);
    CHECK(j["audit"]["total_bytes"] == 4 * j["audit"]["bytes_per_message"].get<int>());
    CHECK(j["parties"][0]["recovered"] == nlohmann::json::array({7}));
    CHECK(j["parties"][0]["owners"] == nlohmann::json::array({2}));
    CHECK(j["parties"][1]["recovered"] == nlohmann::json::array({1}));
    CHECK(j["parties"][1]["owners"] == nlohmann::json::array({1}));
}

TEST_CASE("gossip-sim is byte-identical across runs with the same seed") {
    const fs::path j1 = scratch("g1.json"), j2 = scratch("g2.json"), c1 = scratch("g1.csv"), c2 = scratch("g2.csv");
    for (const auto& [json_out, csv_out] : {std::pair{j1, c1}, std::pair{j2, c2}}) {
        const Outcome r = run_cli({"gossip-sim", "--graph", data("path5.graph"), "--parties", data("p1.keys"),
                                   data("p2.keys"), data("p3.keys"), "--placement", data("path5.placement"), "--m",
                                   "10", "--d", "3", "--owners", "--seed", "7", "--max-rounds", "200", "--out",
                                   json_out.string(), "--rounds-csv", csv_out.string()});
        REQUIRE(r.code == cli::kExitOk);
    }
    CHECK(slurp(j1) == slurp(j2));
    CHECK(slurp(c1) == slurp(c2));
    CHECK(slurp(c1).rfind("round,sub_round,vertex,known_count,bytes_sent\n", 0) == 0);
    const auto j = nlohmann::json::parse(slurp(j1));
    CHECK(j["completed"] == true);
    CHECK(j["parties"][1]["recovered"] == nlohmann::json::array({1, 3}));
}

TEST_CASE("sketch and sketch-info round trip") {
    const fs::path msg = scratch("a.sketch");
    REQUIRE(run_cli({"sketch", "--keys", data("a.keys"), "--m", "10", "--d", "2", "--out", msg.string()}).code ==
            cli::kExitOk);
    const std::string bytes = slurp(msg);
    CHECK(bytes.size() == 42 + 8 * 5);
    const SketchMessage decoded =
        decode_message(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    const SketchParams p(choose_field(10, 1, 2, 2));
    CHECK(decoded.sketch == make_sketch(std::vector<u64>{1, 4}, p));

    const Outcome info = run_cli({"sketch-info", "--in", msg.string()});
    REQUIRE(info.code == cli::kExitOk);
    const auto j = nlohmann::json::parse(info.out);
    CHECK(j["cardinality"] == 2);
    CHECK(j["evals"].get<std::vector<u64>>() == decoded.sketch.evals());

    std::ofstream(scratch("junk.sketch"), std::ios::binary) << "RCSK";
    CHECK(run_cli({"sketch-info", "--in", scratch("junk.sketch").string()}).code == cli::kExitConfig);
}
