#include "setrecon/relay.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "setrecon/random.hpp"
#include "setrecon/wire.hpp"

namespace setrecon {

SketchParams relay_params(u64 m, std::uint32_t parties, std::uint32_t d, std::uint32_t c, RelayMode mode) {
    if (parties == 0) throw Error(Errc::InvalidArgument, "relay needs at least one party");
    return SketchParams(choose_field(m, mode == RelayMode::owner ? parties : 1, d, c));
}

PartyState PartyState::create(PartyId index, std::vector<u64> keys, const SketchParams& params) {
    std::sort(keys.begin(), keys.end());
    Sketch sketch = make_sketch(keys, params);
    return PartyState{index, std::move(keys), std::move(sketch)};
}

bool PartyState::consistent(const SketchParams& params) const {
    return sketch.params() == params && make_sketch(set, params) == sketch;
}

Message party_encode(const PartyState& party) { return encode_message(party.sketch); }

Relay::Relay(SketchParams params, RelayMode mode) : params_(std::move(params)), mode_(mode) {}

void Relay::ingest(PartyId sender, std::span<const std::uint8_t> message) {
    ingest(sender, decode_message(message).sketch);
}

void Relay::ingest(PartyId sender, const Sketch& sketch) {
    if (!(sketch.params() == params_)) throw Error(Errc::ParamsMismatch, "party sketch parameters differ from relay's");
    if (sender == 0) throw Error(Errc::InvalidArgument, "party labels start at 1");
    if (std::find(order_.begin(), order_.end(), sender) != order_.end()) {
        throw Error(Errc::DuplicateParty, "party " + std::to_string(sender) + " already ingested");
    }
    if (mode_ == RelayMode::owner && sender > std::max<std::uint32_t>(params_.field().owner_count, 1)) {
        throw Error(Errc::OwnerOutOfRange, "party " + std::to_string(sender) + " exceeds provisioned owner count");
    }

    if (!union_) {
        union_ = sketch;
        if (mode_ == RelayMode::owner) intersection_ = sketch;
        order_.push_back(sender);
        return;
    }

    if (mode_ == RelayMode::plain) {
        Sketch next = combine_union(*union_, sketch);
        counters_.interpolations += 1;
        counters_.factorizations += 2;
        counters_.combinations += 1;
        union_ = std::move(next);
        order_.push_back(sender);
        return;
    }

    // New union elements S_i - U' and intersection evictions I' - S_i, both explicit.
    const SetDifference from_union = recover_difference(sketch, *union_);
    const SetDifference from_intersection = recover_difference(*intersection_, sketch);
    counters_.interpolations += 2;
    counters_.factorizations += 4;
    counters_.combinations += 2;

    Sketch next_union = pointwise_mul(*union_, make_sketch(from_union.a_minus_b, params_));
    Sketch next_intersection = pointwise_div(*intersection_, make_sketch(from_intersection.a_minus_b, params_));

    const PartyId first = order_.front();
    for (u64 key : from_union.a_minus_b) ledger_.emplace(key, sender);
    for (u64 key : from_intersection.a_minus_b) ledger_.emplace(key, first);

    union_ = std::move(next_union);
    intersection_ = std::move(next_intersection);
    order_.push_back(sender);
}

std::vector<Message> Relay::finalize() const {
    if (!union_) throw Error(Errc::EmptyRelay, "no party sketches ingested");
    if (mode_ == RelayMode::plain) return {encode_message(*union_)};

    std::vector<FieldElement> encoded;
    encoded.reserve(ledger_.size());
    for (const auto& [key, owner] : ledger_) encoded.push_back(encode_owner(key, owner - 1, params_.field()));
    const Sketch owner_union = pointwise_mul(*intersection_, make_element_sketch(encoded, params_));
    return {encode_message(owner_union, true), encode_message(*intersection_, true)};
}

PartyRecovery party_decode(std::span<const Message> broadcasts, const PartyState& party, RelayMode mode) {
    PartyRecovery out;
    if (mode == RelayMode::plain) {
        if (broadcasts.size() != 1) throw Error(Errc::MalformedMessage, "plain relay broadcast is one message");
        const Sketch union_sketch = decode_message(broadcasts[0]).sketch;
        out.keys = recover_missing(union_sketch, party.sketch);
        return out;
    }

    if (broadcasts.size() != 2) throw Error(Errc::MalformedMessage, "owner relay broadcast is two messages");
    const Sketch owner_union = decode_message(broadcasts[0]).sketch;
    const Sketch intersection = decode_message(broadcasts[1]).sketch;
    if (!(owner_union.params() == party.sketch.params())) {
        throw Error(Errc::ParamsMismatch, "broadcast parameters differ from party's");
    }
    std::vector<OwnerElement> decoded;
    for (FieldElement e : recover_missing_elements(owner_union, intersection)) {
        decoded.push_back(decode_owner(e, owner_union.params().m()));
    }
    std::sort(decoded.begin(), decoded.end());
    for (const auto& [value, owner_index] : decoded) {
        if (std::binary_search(party.set.begin(), party.set.end(), value)) continue;
        out.keys.push_back(value);
        out.owners.push_back(owner_index + 1);
    }
    return out;
}

Sketch combine_tree(std::span<const Sketch> sketches) {
    if (sketches.empty()) throw Error(Errc::InvalidArgument, "combine_tree needs at least one sketch");
    std::vector<Sketch> level(sketches.begin(), sketches.end());
    while (level.size() > 1) {
        std::vector<Sketch> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(combine_union(level[i], level[i + 1]));
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    return level.front();
}

RelayRunResult run_relay(const RelayRunConfig& config) {
    const auto n = static_cast<std::uint32_t>(config.sets.size());
    RelayRunResult result;
    result.params = relay_params(config.m, n, config.d, config.c, config.mode);

    std::vector<PartyState> parties;
    parties.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) parties.push_back(PartyState::create(i + 1, config.sets[i], result.params));

    std::vector<PartyId> order(n);
    std::iota(order.begin(), order.end(), PartyId{1});
    if (config.order == RelayOrder::arrival) {
        SplitMix64 rng(config.seed);
        deterministic_shuffle(std::span<PartyId>(order), rng);
    }

    Relay relay(result.params, config.mode);
    for (PartyId id : order) {
        const Message upload = party_encode(parties[id - 1]);
        result.party_messages += 1;
        result.total_bytes += upload.size();
        relay.ingest(id, upload);
    }
    const std::vector<Message> broadcasts = relay.finalize();
    result.broadcast_messages = broadcasts.size();
    for (const auto& msg : broadcasts) result.total_bytes += msg.size();
    result.bytes_per_message = message_size(result.params);

    result.recovered.reserve(n);
    for (const auto& party : parties) result.recovered.push_back(party_decode(broadcasts, party, config.mode));
    result.ingest_order = relay.ingest_order();
    result.counters = relay.counters();
    return result;
}

}  // namespace setrecon
