#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include "setrecon/relay.hpp"
#include "setrecon/sketch.hpp"

namespace setrecon {

using Vertex = std::uint32_t;

/// Simple undirected graph: no self-loops, no parallel edges.
class Graph {
public:
    explicit Graph(std::size_t vertex_count = 0);

    static Graph complete(std::size_t n);
    static Graph cycle(std::size_t n);
    static Graph star(std::size_t n);  // vertex 0 is the hub
    static Graph path(std::size_t n);

    /// Throws Errc::InvalidGraph on self-loops, duplicates, or bad endpoints.
    void add_edge(Vertex u, Vertex v);

    std::size_t vertex_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edges_; }
    std::size_t degree(Vertex v) const { return adjacency_.at(v).size(); }
    /// Sorted ascending.
    const std::vector<Vertex>& neighbors(Vertex v) const { return adjacency_.at(v); }
    bool has_edge(Vertex u, Vertex v) const;
    bool connected() const;

private:
    std::vector<std::vector<Vertex>> adjacency_;
    std::size_t edges_ = 0;
};

/// Reads "V E" followed by E lines "u v" (0-based). Throws Errc::ParseError.
Graph read_graph(std::istream& in);

/// Reads "vertex party_id" lines into a vertex -> party map of size V.
/// Party labels must be 1..N, each placed exactly once. Throws Errc::ParseError.
std::vector<std::optional<PartyId>> read_placement(std::istream& in, std::size_t vertex_count, std::uint32_t parties);

struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    bool operator==(const Fraction&) const = default;
    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

inline constexpr std::size_t kMaxConductanceVertices = 24;

/// Exact conductance: min over vertex sets A with 0 < vol(A) <= vol(V)/2 of
/// cut(A)/vol(A), reduced. Throws Errc::GraphTooLarge, Errc::Disconnected.
Fraction conductance(const Graph& g);

enum class GossipMode { plain, owner };

/// Sentinel leader label for a vertex that has heard from no party yet.
inline constexpr PartyId kNoLeader = 0;

/// Running owner tuple for sub-collection `known`: union and intersection
/// sketches (intersection elements carry owner 0 in both) and the leader.
struct OwnerTuple {
    Sketch union_sketch;
    Sketch intersection_sketch;
    PartyId leader = kNoLeader;
    std::set<PartyId> known;  // simulator bookkeeping, never transmitted

    static OwnerTuple sentinel(const SketchParams& params);
    static OwnerTuple for_party(PartyId party, std::span<const u64> keys, const SketchParams& params);

    bool is_sentinel() const noexcept { return leader == kNoLeader; }
};

/// Same contract as combine_union.
Sketch combine_plain(const Sketch& a, const Sketch& b);

/// Merges two owner tuples into the tuple for the union of their sub-collections.
/// A sentinel operand returns the other unchanged.
OwnerTuple combine_tuples(const OwnerTuple& a, const OwnerTuple& b);

/// State held at one vertex. Plain mode uses `tuple.union_sketch` only and
/// keeps the intersection equal to the empty-set sketch.
struct VertexState {
    OwnerTuple tuple;

    bool informed() const noexcept { return !tuple.is_sentinel(); }
};

struct SimConfig {
    Graph graph;
    std::vector<std::optional<PartyId>> party_at;  // size V
    std::vector<std::vector<u64>> sets;            // sets[i] belongs to party i+1
    SketchParams params;
    GossipMode mode = GossipMode::plain;
    u64 seed = 0;
    std::uint32_t max_rounds = 100;
};

/// Field/point layout for a gossip session (owner mode reserves labels 0..N).
SketchParams gossip_params(u64 m, std::uint32_t parties, std::uint32_t d, std::uint32_t c, GossipMode mode);

enum class SubRound : std::uint8_t { push = 0, pull = 1 };

struct SubRoundRecord {
    std::uint32_t round = 0;
    SubRound sub_round = SubRound::push;
    std::vector<std::uint32_t> known_count;  // per vertex, after the sub-round
    std::vector<std::uint32_t> messages;     // sketch messages on the contact each vertex initiated
    std::vector<std::uint64_t> bytes;        // bytes of those messages
};

struct SimLog {
    std::vector<SubRoundRecord> records;
    std::optional<std::uint32_t> completion_round;
    std::uint32_t rounds_run = 0;
    std::uint64_t total_messages = 0;
    std::uint64_t total_bytes = 0;
    std::uint32_t max_messages_per_contact = 0;
    /// Largest number of pull requests any vertex answered in one sub-round.
    std::uint32_t max_pull_responses = 0;

    bool completed() const noexcept { return completion_round.has_value(); }
};

struct SimResult {
    SimLog log;
    std::vector<VertexState> states;
};

/// Neighbor index drawn by `vertex` in (round, sub_round): a SplitMix64 stream
/// seeded with splitmix64 folds of (seed, round, sub_round, vertex), reduced
/// to [0, degree) by rejection.
std::size_t draw_neighbor(u64 seed, std::uint32_t round, SubRound sub_round, Vertex vertex, std::size_t degree);

/// Synchronous PUSH-PULL rounds until every party vertex knows all parties or
/// max_rounds elapse. Throws Errc::Disconnected, Errc::InvalidArgument, or
/// decode errors raised while combining.
SimResult simulate(const SimConfig& config);

/// Per-party recovery (index i is party i+1) from completed final states.
std::vector<PartyRecovery> decode_all(const SimConfig& config, const std::vector<VertexState>& states);

}  // namespace setrecon
