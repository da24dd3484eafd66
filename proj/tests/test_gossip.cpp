#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "setrecon/gossip.hpp"
#include "setrecon/wire.hpp"

using namespace setrecon;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::InvalidArgument;
}

Sketch sk(std::vector<u64> keys, const SketchParams& p) { return make_sketch(keys, p); }

SimConfig all_vertices_are_parties(Graph g, std::vector<std::vector<u64>> sets, u64 m, std::uint32_t d,
                                   GossipMode mode, u64 seed) {
    const auto n = static_cast<std::uint32_t>(sets.size());
    std::vector<std::optional<PartyId>> at(g.vertex_count());
    for (std::uint32_t v = 0; v < n; ++v) at[v] = v + 1;
    return SimConfig{std::move(g), std::move(at), std::move(sets), gossip_params(m, n, d, 2, mode), mode, seed, 100};
}

std::uint32_t median_completion(const Graph& g, std::size_t seeds) {
    std::vector<std::uint32_t> rounds;
    for (u64 seed = 0; seed < seeds; ++seed) {
        std::vector<std::vector<u64>> sets;
        for (u64 i = 0; i < g.vertex_count(); ++i) sets.push_back({i});
        const SimConfig cfg =
            all_vertices_are_parties(g, sets, 1000, static_cast<std::uint32_t>(sets.size()), GossipMode::plain, seed);
        const SimResult r = simulate(cfg);
        REQUIRE(r.log.completed());
        rounds.push_back(*r.log.completion_round);
    }
    std::sort(rounds.begin(), rounds.end());
    return rounds[rounds.size() / 2];
}

}  // namespace

TEST_CASE("conductance examples") {
    CHECK(conductance(Graph::complete(4)) == Fraction{2, 3});
    CHECK(conductance(Graph::cycle(8)) == Fraction{1, 4});
    CHECK(conductance(Graph::complete(2)) == Fraction{1, 1});
    CHECK(conductance(Graph::star(5)) == Fraction{1, 1});
    CHECK(conductance(Graph::complete(16)) == Fraction{8, 15});
    CHECK(conductance(Graph::cycle(16)) == Fraction{1, 8});
    CHECK(code_of([] { conductance(Graph::path(25)); }) == Errc::GraphTooLarge);
    Graph split(4);
    split.add_edge(0, 1);
    split.add_edge(2, 3);
    CHECK(code_of([&] { conductance(split); }) == Errc::Disconnected);
}

TEST_CASE("conductance agrees with a recursive enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + oracle::below(rng, 11);
        const auto edges = oracle::random_connected_edges(rng, n);
        Graph g(n);
        for (const auto& [u, v] : edges) g.add_edge(u, v);
        const auto [num, den] = oracle::conductance_by_recursion(n, edges);
        REQUIRE(conductance(g) == Fraction{num, den});
    }
}

TEST_CASE("graph construction and parsing") {
    Graph g(3);
    g.add_edge(0, 1);
    CHECK(code_of([&] { g.add_edge(1, 0); }) == Errc::InvalidGraph);
    CHECK(code_of([&] { g.add_edge(2, 2); }) == Errc::InvalidGraph);
    CHECK(code_of([&] { g.add_edge(0, 3); }) == Errc::InvalidGraph);
    CHECK_FALSE(g.connected());

    std::istringstream text("4 3\n0 1\n1 2\n2 3\n");
    const Graph p = read_graph(text);
    CHECK(p.edge_count() == 3);
    CHECK(p.neighbors(1) == std::vector<Vertex>{0, 2});
    std::istringstream short_text("3 2\n0 1\n");
    CHECK(code_of([&] { read_graph(short_text); }) == Errc::ParseError);

    std::istringstream placement("0 2\n3 1\n");
    const auto at = read_placement(placement, 4, 2);
    CHECK(at[0] == PartyId{2});
    CHECK(at[3] == PartyId{1});
    CHECK_FALSE(at[1].has_value());
    std::istringstream twice("0 1\n1 1\n");
    CHECK(code_of([&] { read_placement(twice, 4, 2); }) == Errc::ParseError);
}

TEST_CASE("combine_plain") {
    const SketchParams p = gossip_params(10, 2, 3, 2, GossipMode::plain);
    CHECK(combine_plain(sk({1, 4}, p), sk({4, 7}, p)) == sk({1, 4, 7}, p));
    CHECK(combine_plain(sk({1, 4}, p), sk({1, 4}, p)) == sk({1, 4}, p));
    CHECK(combine_plain(sk({1, 4}, p), Sketch::empty(p)) == sk({1, 4}, p));
}

TEST_CASE("combine_tuples example") {
    const SketchParams p = gossip_params(10, 2, 2, 2, GossipMode::owner);
    const OwnerTuple a = OwnerTuple::for_party(1, std::vector<u64>{1, 4}, p);
    const OwnerTuple b = OwnerTuple::for_party(2, std::vector<u64>{4, 7}, p);
    CHECK(a.union_sketch == sk({1, 4}, p));
    CHECK(a.intersection_sketch == sk({1, 4}, p));
    const OwnerTuple e = combine_tuples(a, b);
    CHECK(e.union_sketch == make_element_sketch(std::vector<u64>{4, 11, 27}, p));
    CHECK(e.intersection_sketch == sk({4}, p));
    CHECK(e.leader == 1);
    CHECK(e.known == std::set<PartyId>{1, 2});

    const OwnerTuple swapped = combine_tuples(b, a);
    CHECK(swapped.union_sketch == e.union_sketch);
    CHECK(swapped.intersection_sketch == e.intersection_sketch);

    const OwnerTuple again = combine_tuples(e, e);
    CHECK(encode_message(again.union_sketch) == encode_message(e.union_sketch));
    CHECK(encode_message(again.intersection_sketch) == encode_message(e.intersection_sketch));
    CHECK(again.leader == e.leader);

    const OwnerTuple s = OwnerTuple::sentinel(p);
    CHECK(s.is_sentinel());
    CHECK(combine_tuples(s, a).union_sketch == a.union_sketch);
    CHECK(combine_tuples(a, s).leader == 1);
    CHECK(combine_tuples(s, s).is_sentinel());

    const OwnerTuple t3 = OwnerTuple::for_party(3, std::vector<u64>{4}, gossip_params(10, 3, 2, 2, GossipMode::owner));
    const OwnerTuple t1 = OwnerTuple::for_party(1, std::vector<u64>{4}, gossip_params(10, 3, 2, 2, GossipMode::owner));
    CHECK(combine_tuples(t3, t1).leader == 1);
}

TEST_CASE("combine_tuples matches first-holder oracle when merged in order") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + oracle::below(rng, 6);
        const auto d = static_cast<std::uint32_t>(1 + oracle::below(rng, 12));
        const u64 m = 1000 + oracle::below(rng, 100000);
        const SketchParams p = gossip_params(m, static_cast<std::uint32_t>(n), d, 2, GossipMode::owner);
        const auto sets = oracle::bounded_sets(rng, n, m, 20, oracle::below(rng, d + 1));
        OwnerTuple acc = OwnerTuple::for_party(1, sets[0], p);
        for (PartyId i = 2; i <= n; ++i) acc = combine_tuples(acc, OwnerTuple::for_party(i, sets[i - 1], p));

        std::vector<PartyId> order(n);
        std::iota(order.begin(), order.end(), 1);
        const auto common = oracle::set_intersection(sets);
        std::vector<u64> expected(common.begin(), common.end());
        for (const auto& [x, holder] : oracle::first_holders(sets, order)) expected.push_back(x + m * holder);
        REQUIRE(acc.union_sketch == make_element_sketch(expected, p));
        REQUIRE(acc.intersection_sketch == make_sketch(common, p));
        REQUIRE(acc.leader == 1);
    }
}

TEST_CASE("simulate basics") {
    for (u64 seed = 0; seed < 20; ++seed) {
        const SimConfig cfg =
            all_vertices_are_parties(Graph::complete(2), {{1, 4}, {4, 7}}, 10, 2, GossipMode::plain, seed);
        const SimResult r = simulate(cfg);
        REQUIRE(r.log.completion_round == std::uint32_t{1});
        const auto rec = decode_all(cfg, r.states);
        REQUIRE(rec[0].keys == std::vector<u64>{7});
        REQUIRE(rec[1].keys == std::vector<u64>{1});
    }

    Graph split(4);
    split.add_edge(0, 1);
    split.add_edge(2, 3);
    const SimConfig bad = all_vertices_are_parties(split, {{1}, {2}}, 10, 2, GossipMode::plain, 0);
    CHECK(code_of([&] { simulate(bad); }) == Errc::Disconnected);

    const SimConfig lone = all_vertices_are_parties(Graph(1), {{3}}, 10, 2, GossipMode::plain, 0);
    CHECK(simulate(lone).log.completion_round == std::uint32_t{0});
}

TEST_CASE("decode_all on a path with non-party vertices") {
    Graph g = Graph::path(5);
    std::vector<std::optional<PartyId>> at(5);
    at[0] = 1;
    at[2] = 2;
    at[4] = 3;
    for (GossipMode mode : {GossipMode::plain, GossipMode::owner}) {
        const SimConfig cfg{g, at, {{1}, {2}, {3}}, gossip_params(10, 3, 3, 2, mode), mode, 9, 200};
        const SimResult r = simulate(cfg);
        REQUIRE(r.log.completed());
        const auto rec = decode_all(cfg, r.states);
        CHECK(rec[0].keys == std::vector<u64>{2, 3});
        CHECK(rec[1].keys == std::vector<u64>{1, 3});
        CHECK(rec[2].keys == std::vector<u64>{1, 2});
        if (mode == GossipMode::owner) {
            CHECK(rec[0].owners == std::vector<PartyId>{2, 3});
            CHECK(rec[1].owners == std::vector<PartyId>{1, 3});
            CHECK(rec[2].owners == std::vector<PartyId>{1, 2});
        }
    }

    const SimConfig same =
        all_vertices_are_parties(Graph::cycle(4), {{5, 6}, {5, 6}, {5, 6}, {5, 6}}, 10, 2, GossipMode::owner, 3);
    const SimResult r = simulate(same);
    for (const auto& rec : decode_all(same, r.states)) CHECK(rec.keys.empty());
}

TEST_CASE("simulation is deterministic and knowledge only grows") {
    std::mt19937_64 rng(4);
    const auto sets = oracle::bounded_sets(rng, 10, 5000, 30, 12);
    for (GossipMode mode : {GossipMode::plain, GossipMode::owner}) {
        const SimConfig cfg = all_vertices_are_parties(Graph::cycle(10), sets, 5000, 12, mode, 42);
        const SimResult a = simulate(cfg);
        const SimResult b = simulate(cfg);
        REQUIRE(a.log.records.size() == b.log.records.size());
        for (std::size_t i = 0; i < a.log.records.size(); ++i) {
            REQUIRE(a.log.records[i].known_count == b.log.records[i].known_count);
            REQUIRE(a.log.records[i].bytes == b.log.records[i].bytes);
        }
        for (std::size_t v = 0; v < a.states.size(); ++v) {
            REQUIRE(a.states[v].tuple.union_sketch == b.states[v].tuple.union_sketch);
        }
        for (std::size_t i = 1; i < a.log.records.size(); ++i) {
            for (std::size_t v = 0; v < 10; ++v) {
                REQUIRE(a.log.records[i].known_count[v] >= a.log.records[i - 1].known_count[v]);
            }
        }
    }
    CHECK(draw_neighbor(7, 3, SubRound::pull, 2, 5) == draw_neighbor(7, 3, SubRound::pull, 2, 5));
}

TEST_CASE("gossip confluence and traffic bounds") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + oracle::below(rng, 10);
        const auto d = static_cast<std::uint32_t>(1 + oracle::below(rng, 12));
        const u64 m = 100 + oracle::below(rng, 100000);
        const auto sets = oracle::bounded_sets(rng, n, m, 15, oracle::below(rng, d + 1));
        const auto edges = oracle::random_connected_edges(rng, n);
        Graph g(n);
        for (const auto& [u, v] : edges) g.add_edge(u, v);
        const GossipMode mode = trial % 2 ? GossipMode::owner : GossipMode::plain;
        const SimConfig cfg = all_vertices_are_parties(g, sets, m, d, mode, trial);
        const SimResult r = simulate(cfg);
        REQUIRE(r.log.completed());
        const std::uint32_t limit = mode == GossipMode::owner ? 2 : 1;
        const std::size_t msg_bytes = message_size(cfg.params);
        for (const auto& rec : r.log.records) {
            for (std::size_t v = 0; v < n; ++v) {
                REQUIRE(rec.messages[v] <= limit);
                REQUIRE(rec.bytes[v] == rec.messages[v] * msg_bytes);
            }
        }
        const auto all = oracle::set_union(sets);
        const auto rec = decode_all(cfg, r.states);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(rec[i].keys == oracle::minus(all, sets[i]));
            if (mode == GossipMode::plain) {
                REQUIRE(r.states[i].tuple.union_sketch == make_sketch(all, cfg.params));
            } else {
                for (std::size_t k = 0; k < rec[i].keys.size(); ++k) {
                    REQUIRE(oracle::holds(sets[rec[i].owners[k] - 1], rec[i].keys[k]));
                }
            }
        }
    }
}

TEST_CASE("owner-mode attributions name true holders") {
    std::mt19937_64 rng(1000);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + oracle::below(rng, 5);
        const auto d = static_cast<std::uint32_t>(1 + oracle::below(rng, 6));
        const u64 m = 50 + oracle::below(rng, 1000);
        const auto sets = oracle::bounded_sets(rng, n, m, 5, oracle::below(rng, d + 1));
        const auto edges = oracle::random_connected_edges(rng, n);
        Graph g(n);
        for (const auto& [u, v] : edges) g.add_edge(u, v);
        const SimConfig cfg = all_vertices_are_parties(g, sets, m, d, GossipMode::owner, trial);
        const SimResult r = simulate(cfg);
        REQUIRE(r.log.completed());
        const auto all = oracle::set_union(sets);
        const auto rec = decode_all(cfg, r.states);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(rec[i].keys == oracle::minus(all, sets[i]));
            for (std::size_t k = 0; k < rec[i].keys.size(); ++k) {
                REQUIRE(oracle::holds(sets[rec[i].owners[k] - 1], rec[i].keys[k]));
            }
        }
    }
}

TEST_CASE("completion rounds scale with inverse conductance") {
    // Fitted once over 101 seeds per graph (largest ratio 0.571, K8) and frozen.
    constexpr double kScalingConstant = 0.6;
    for (std::size_t n : {8, 16}) {
        for (const Graph& g : {Graph::complete(n), Graph::cycle(n), Graph::star(n)}) {
            const double bound = kScalingConstant / conductance(g).value() * std::log2(static_cast<double>(n));
            const std::uint32_t median = median_completion(g, 101);
            INFO("n=" << n << " edges=" << g.edge_count() << " median=" << median);
            CHECK(median <= bound);
        }
    }
}
