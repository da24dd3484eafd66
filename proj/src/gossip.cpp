#include "setrecon/gossip.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "setrecon/random.hpp"
#include "setrecon/wire.hpp"

namespace setrecon {

Graph::Graph(std::size_t vertex_count) : adjacency_(vertex_count) {}

Graph Graph::complete(std::size_t n) {
    Graph g(n);
    for (Vertex u = 0; u < n; ++u) {
        for (Vertex v = u + 1; v < n; ++v) g.add_edge(u, v);
    }
    return g;
}

Graph Graph::cycle(std::size_t n) {
    Graph g(n);
    if (n == 2) {
        g.add_edge(0, 1);
    } else if (n > 2) {
        for (Vertex u = 0; u < n; ++u) g.add_edge(u, static_cast<Vertex>((u + 1) % n));
    }
    return g;
}

Graph Graph::star(std::size_t n) {
    Graph g(n);
    for (Vertex v = 1; v < n; ++v) g.add_edge(0, v);
    return g;
}

Graph Graph::path(std::size_t n) {
    Graph g(n);
    for (Vertex v = 1; v < n; ++v) g.add_edge(v - 1, v);
    return g;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
    const auto& nb = adjacency_.at(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

void Graph::add_edge(Vertex u, Vertex v) {
    if (u >= vertex_count() || v >= vertex_count()) {
        throw Error(Errc::InvalidGraph, "edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range");
    }
    if (u == v) throw Error(Errc::InvalidGraph, "self-loop at vertex " + std::to_string(u));
    if (has_edge(u, v)) {
        throw Error(Errc::InvalidGraph, "duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    auto& a = adjacency_[u];
    a.insert(std::lower_bound(a.begin(), a.end(), v), v);
    auto& b = adjacency_[v];
    b.insert(std::lower_bound(b.begin(), b.end(), u), u);
    ++edges_;
}

bool Graph::connected() const {
    if (vertex_count() == 0) return false;
    std::vector<bool> seen(vertex_count(), false);
    std::vector<Vertex> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const Vertex u = stack.back();
        stack.pop_back();
        for (Vertex v : adjacency_[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == vertex_count();
}

namespace {

std::string next_content_line(std::istream& in, std::size_t& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    return {};
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Graph read_graph(std::istream& in) {
    std::size_t line_no = 0;
    std::istringstream header(next_content_line(in, line_no));
    std::size_t v_count = 0;
    std::size_t e_count = 0;
    if (!(header >> v_count >> e_count)) parse_fail(line_no, "expected header \"V E\"");
    Graph g(v_count);
    for (std::size_t i = 0; i < e_count; ++i) {
        const std::string line = next_content_line(in, line_no);
        if (line.empty()) parse_fail(line_no, "expected " + std::to_string(e_count) + " edges, found " + std::to_string(i));
        std::istringstream row(line);
        long long u = -1;
        long long v = -1;
        std::string extra;
        if (!(row >> u >> v) || (row >> extra) || u < 0 || v < 0) parse_fail(line_no, "expected edge \"u v\"");
        try {
            g.add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v));
        } catch (const Error& e) {
            parse_fail(line_no, e.what());
        }
    }
    if (!next_content_line(in, line_no).empty()) parse_fail(line_no, "unexpected content after edge list");
    return g;
}

std::vector<std::optional<PartyId>> read_placement(std::istream& in, std::size_t vertex_count, std::uint32_t parties) {
    std::vector<std::optional<PartyId>> party_at(vertex_count);
    std::vector<bool> placed(parties + 1, false);
    std::size_t line_no = 0;
    for (std::string line = next_content_line(in, line_no); !line.empty(); line = next_content_line(in, line_no)) {
        std::istringstream row(line);
        long long vertex = -1;
        long long party = -1;
        std::string extra;
        if (!(row >> vertex >> party) || (row >> extra)) parse_fail(line_no, "expected \"vertex party_id\"");
        if (vertex < 0 || static_cast<std::size_t>(vertex) >= vertex_count) parse_fail(line_no, "vertex out of range");
        if (party < 1 || party > parties) parse_fail(line_no, "party id must be in 1.." + std::to_string(parties));
        if (party_at[vertex]) parse_fail(line_no, "vertex already hosts a party");
        if (placed[party]) parse_fail(line_no, "party placed twice");
        party_at[vertex] = static_cast<PartyId>(party);
        placed[party] = true;
    }
    for (std::uint32_t p = 1; p <= parties; ++p) {
        if (!placed[p]) throw Error(Errc::ParseError, "party " + std::to_string(p) + " has no placement");
    }
    return party_at;
}

Fraction conductance(const Graph& g) {
    const std::size_t n = g.vertex_count();
    if (n > kMaxConductanceVertices) {
        throw Error(Errc::GraphTooLarge, std::to_string(n) + " vertices exceeds exhaustive limit");
    }
    if (n < 2) throw Error(Errc::InvalidGraph, "conductance needs at least two vertices");
    if (!g.connected()) throw Error(Errc::Disconnected, "graph is disconnected");

    std::vector<std::uint32_t> nbr_mask(n, 0);
    std::vector<std::uint64_t> deg(n, 0);
    std::uint64_t total_vol = 0;
    for (Vertex v = 0; v < n; ++v) {
        for (Vertex u : g.neighbors(v)) nbr_mask[v] |= 1U << u;
        deg[v] = g.degree(v);
        total_vol += deg[v];
    }

    Fraction best{1, 0};  // +infinity
    const std::uint32_t full = (1U << n) - 1;
    for (std::uint32_t set = 1; set < full; ++set) {
        std::uint64_t vol = 0;
        std::uint64_t cut = 0;
        for (std::uint32_t rest = set; rest != 0; rest &= rest - 1) {
            const auto v = static_cast<std::size_t>(std::countr_zero(rest));
            vol += deg[v];
            cut += static_cast<std::uint64_t>(std::popcount(nbr_mask[v] & ~set));
        }
        if (2 * vol > total_vol) continue;
        if (best.den == 0 || cut * best.den < best.num * vol) best = {cut, vol};
    }
    const std::uint64_t common = std::gcd(best.num, best.den);
    return {best.num / common, best.den / common};
}

SketchParams gossip_params(u64 m, std::uint32_t parties, std::uint32_t d, std::uint32_t c, GossipMode mode) {
    if (parties == 0) throw Error(Errc::InvalidArgument, "gossip needs at least one party");
    return SketchParams(choose_field(m, mode == GossipMode::owner ? parties : 1, d, c));
}

OwnerTuple OwnerTuple::sentinel(const SketchParams& params) {
    return OwnerTuple{Sketch::empty(params), Sketch::empty(params), kNoLeader, {}};
}

OwnerTuple OwnerTuple::for_party(PartyId party, std::span<const u64> keys, const SketchParams& params) {
    // A single party's tuple: every element is in the intersection, so owner 0 throughout.
    Sketch s = make_sketch(keys, params);
    return OwnerTuple{s, s, party, {party}};
}

Sketch combine_plain(const Sketch& a, const Sketch& b) { return combine_union(a, b); }

namespace {

// Elements of `tuple`'s union outside `core`, keyed by value, with owner 0
// relabelled to the tuple's leader.
std::map<u64, PartyId> extract_owned(const OwnerTuple& tuple, const Sketch& core) {
    const u64 m = core.params().m();
    std::map<u64, PartyId> out;
    for (FieldElement e : recover_missing_elements(tuple.union_sketch, core)) {
        const OwnerElement oe = decode_owner(e, m);
        const PartyId owner = oe.owner == 0 ? tuple.leader : oe.owner;
        if (!out.emplace(oe.value, owner).second) {
            throw Error(Errc::VerificationFailed, "value " + std::to_string(oe.value) + " decoded with two owners");
        }
    }
    return out;
}

}  // namespace

OwnerTuple combine_tuples(const OwnerTuple& a, const OwnerTuple& b) {
    if (a.is_sentinel()) return b;
    if (b.is_sentinel()) return a;
    const OwnerTuple& lo = a.leader <= b.leader ? a : b;
    const OwnerTuple& hi = a.leader <= b.leader ? b : a;
    const SketchParams& params = lo.union_sketch.params();

    // (a) intersection of the two intersections, via the explicit I_lo - I_hi.
    const SetDifference inter_diff = recover_difference(lo.intersection_sketch, hi.intersection_sketch);
    Sketch intersection = pointwise_div(lo.intersection_sketch, make_sketch(inter_diff.a_minus_b, params));

    // (b) everything outside the new intersection, with minimum owners across both sides.
    std::map<u64, PartyId> owned = extract_owned(lo, intersection);
    for (const auto& [value, owner] : extract_owned(hi, intersection)) {
        auto [it, inserted] = owned.emplace(value, owner);
        if (!inserted) it->second = std::min(it->second, owner);
    }

    // (c) union = intersection times the re-encoded remainder.
    std::vector<FieldElement> encoded;
    encoded.reserve(owned.size());
    for (const auto& [value, owner] : owned) encoded.push_back(encode_owner(value, owner, params.field()));
    Sketch union_sketch = pointwise_mul(intersection, make_element_sketch(encoded, params));

    std::set<PartyId> known = lo.known;
    known.insert(hi.known.begin(), hi.known.end());
    return OwnerTuple{std::move(union_sketch), std::move(intersection), lo.leader, std::move(known)};
}

namespace {

VertexState merge(const VertexState& self, const VertexState& incoming, GossipMode mode) {
    if (mode == GossipMode::owner) return {combine_tuples(self.tuple, incoming.tuple)};
    if (!incoming.informed()) return self;
    if (!self.informed()) return incoming;
    OwnerTuple t = self.tuple;
    t.union_sketch = combine_plain(self.tuple.union_sketch, incoming.tuple.union_sketch);
    t.leader = std::min(self.tuple.leader, incoming.tuple.leader);
    t.known.insert(incoming.tuple.known.begin(), incoming.tuple.known.end());
    return {std::move(t)};
}

std::vector<std::uint32_t> known_counts(const std::vector<VertexState>& states) {
    std::vector<std::uint32_t> out(states.size());
    for (std::size_t v = 0; v < states.size(); ++v) out[v] = static_cast<std::uint32_t>(states[v].tuple.known.size());
    return out;
}

bool all_parties_complete(const SimConfig& config, const std::vector<VertexState>& states) {
    const std::size_t n = config.sets.size();
    for (std::size_t v = 0; v < states.size(); ++v) {
        if (config.party_at[v] && states[v].tuple.known.size() != n) return false;
    }
    return true;
}

void validate_config(const SimConfig& config) {
    const std::size_t v_count = config.graph.vertex_count();
    if (v_count == 0 || !config.graph.connected()) throw Error(Errc::Disconnected, "gossip graph must be connected");
    if (config.party_at.size() != v_count) {
        throw Error(Errc::InvalidArgument, "placement size differs from vertex count");
    }
    std::vector<bool> placed(config.sets.size() + 1, false);
    for (const auto& p : config.party_at) {
        if (!p) continue;
        if (*p == 0 || *p > config.sets.size() || placed[*p]) {
            throw Error(Errc::InvalidArgument, "party placement must cover labels 1..N exactly once");
        }
        placed[*p] = true;
    }
    if (std::count(placed.begin() + 1, placed.end(), true) != static_cast<std::ptrdiff_t>(config.sets.size())) {
        throw Error(Errc::InvalidArgument, "every party needs a vertex");
    }
    if (config.mode == GossipMode::owner && config.sets.size() > 1 &&
        config.params.field().owner_count < config.sets.size()) {
        throw Error(Errc::InvalidArgument, "field does not provision owner labels for every party");
    }
}

}  // namespace

std::size_t draw_neighbor(u64 seed, std::uint32_t round, SubRound sub_round, Vertex vertex, std::size_t degree) {
    u64 h = splitmix64(seed);
    h = splitmix64(h ^ round);
    h = splitmix64(h ^ static_cast<u64>(sub_round));
    h = splitmix64(h ^ vertex);
    SplitMix64 stream(h);
    return static_cast<std::size_t>(stream.below(degree));
}

SimResult simulate(const SimConfig& config) {
    validate_config(config);
    const std::size_t v_count = config.graph.vertex_count();
    const std::uint32_t per_contact = config.mode == GossipMode::owner ? 2 : 1;
    const std::uint64_t msg_bytes = message_size(config.params);

    std::vector<VertexState> states;
    states.reserve(v_count);
    for (std::size_t v = 0; v < v_count; ++v) {
        if (const auto& p = config.party_at[v]) {
            states.push_back({OwnerTuple::for_party(*p, config.sets[*p - 1], config.params)});
        } else {
            states.push_back({OwnerTuple::sentinel(config.params)});
        }
    }

    SimResult result;
    SimLog& log = result.log;
    if (all_parties_complete(config, states)) log.completion_round = 0;

    auto charge = [&](SubRoundRecord& rec, Vertex v, const VertexState& carried) {
        if (!carried.informed()) return;
        rec.messages[v] = per_contact;
        rec.bytes[v] = per_contact * msg_bytes;
        log.total_messages += per_contact;
        log.total_bytes += per_contact * msg_bytes;
        log.max_messages_per_contact = std::max(log.max_messages_per_contact, per_contact);
    };

    for (std::uint32_t round = 1; !log.completed() && round <= config.max_rounds; ++round) {
        // Push: every vertex sends its pre-sub-round state; receivers merge in ascending sender order.
        {
            SubRoundRecord rec{round, SubRound::push, {}, std::vector<std::uint32_t>(v_count, 0),
                               std::vector<std::uint64_t>(v_count, 0)};
            const std::vector<VertexState> snapshot = states;
            std::vector<std::vector<Vertex>> inbox(v_count);
            for (Vertex v = 0; v < v_count; ++v) {
                const auto& nb = config.graph.neighbors(v);
                if (nb.empty()) continue;
                const Vertex target = nb[draw_neighbor(config.seed, round, SubRound::push, v, nb.size())];
                inbox[target].push_back(v);
                charge(rec, v, snapshot[v]);
            }
            for (Vertex u = 0; u < v_count; ++u) {
                for (Vertex sender : inbox[u]) states[u] = merge(states[u], snapshot[sender], config.mode);
            }
            rec.known_count = known_counts(states);
            log.records.push_back(std::move(rec));
        }
        // Pull: every vertex fetches one neighbor's pre-sub-round state.
        {
            SubRoundRecord rec{round, SubRound::pull, {}, std::vector<std::uint32_t>(v_count, 0),
                               std::vector<std::uint64_t>(v_count, 0)};
            const std::vector<VertexState> snapshot = states;
            std::vector<std::uint32_t> served(v_count, 0);
            for (Vertex v = 0; v < v_count; ++v) {
                const auto& nb = config.graph.neighbors(v);
                if (nb.empty()) continue;
                const Vertex source = nb[draw_neighbor(config.seed, round, SubRound::pull, v, nb.size())];
                if (snapshot[source].informed()) ++served[source];
                charge(rec, v, snapshot[source]);
                states[v] = merge(states[v], snapshot[source], config.mode);
            }
            log.max_pull_responses = std::max(log.max_pull_responses, *std::max_element(served.begin(), served.end()));
            rec.known_count = known_counts(states);
            log.records.push_back(std::move(rec));
        }
        log.rounds_run = round;
        if (all_parties_complete(config, states)) log.completion_round = round;
    }
    result.states = std::move(states);
    return result;
}

std::vector<PartyRecovery> decode_all(const SimConfig& config, const std::vector<VertexState>& states) {
    if (!all_parties_complete(config, states)) {
        throw Error(Errc::InvalidArgument, "decode_all requires every party vertex to have completed");
    }
    std::vector<PartyRecovery> out(config.sets.size());
    const u64 m = config.params.m();
    for (std::size_t v = 0; v < states.size(); ++v) {
        const auto& party = config.party_at[v];
        if (!party) continue;
        std::vector<u64> own = config.sets[*party - 1];
        std::sort(own.begin(), own.end());
        const OwnerTuple& t = states[v].tuple;
        PartyRecovery& rec = out[*party - 1];
        if (config.mode == GossipMode::plain) {
            rec.keys = recover_missing(t.union_sketch, make_sketch(own, config.params));
            continue;
        }
        std::vector<OwnerElement> decoded;
        for (FieldElement e : recover_missing_elements(t.union_sketch, t.intersection_sketch)) {
            OwnerElement oe = decode_owner(e, m);
            if (oe.owner == 0) oe.owner = t.leader;
            decoded.push_back(oe);
        }
        std::sort(decoded.begin(), decoded.end());
        for (const auto& [value, owner] : decoded) {
            if (std::binary_search(own.begin(), own.end(), value)) continue;
            rec.keys.push_back(value);
            rec.owners.push_back(owner);
        }
    }
    return out;
}

}  // namespace setrecon
