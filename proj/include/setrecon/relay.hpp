#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "setrecon/sketch.hpp"

namespace setrecon {

/// 1-based party label. Relay owner encoding converts to the 0-based index
/// (label - 1) when building broadcast sketches; gossip uses the label as is.
using PartyId = std::uint32_t;

enum class RelayMode { plain, owner };
enum class RelayOrder { arrival, ascending };

using Message = std::vector<std::uint8_t>;

/// Field/point layout for a relay session: owner mode provisions room for N owner indices.
SketchParams relay_params(u64 m, std::uint32_t parties, std::uint32_t d, std::uint32_t c, RelayMode mode);

struct PartyState {
    PartyId index = 0;
    std::vector<u64> set;  // sorted
    Sketch sketch;

    /// Sorts `keys` and caches their sketch. Throws Errc::KeyOutOfRange.
    static PartyState create(PartyId index, std::vector<u64> keys, const SketchParams& params);

    /// True when the cached sketch matches a fresh computation under `params`.
    bool consistent(const SketchParams& params) const;
};

/// The party's upload. Both modes send the owner-less value sketch; the relay
/// attributes owners from the sender identity it sees on ingest.
Message party_encode(const PartyState& party);

struct RelayCounters {
    u64 interpolations = 0;
    u64 factorizations = 0;
    u64 combinations = 0;
};

/// Central relay: folds party sketches into a running union (and, in owner
/// mode, a running intersection plus an element -> first-holder ledger).
class Relay {
public:
    Relay(SketchParams params, RelayMode mode);

    /// Throws Errc::DuplicateParty, Errc::ParamsMismatch, Errc::DifferenceBoundExceeded.
    void ingest(PartyId sender, const Sketch& sketch);
    void ingest(PartyId sender, std::span<const std::uint8_t> message);

    /// One message (plain) or two (owner: union then intersection). Throws Errc::EmptyRelay.
    std::vector<Message> finalize() const;

    const SketchParams& params() const noexcept { return params_; }
    RelayMode mode() const noexcept { return mode_; }
    const std::optional<Sketch>& running_union() const noexcept { return union_; }
    const std::optional<Sketch>& running_intersection() const noexcept { return intersection_; }
    /// Out-of-intersection elements with their earliest-ingested holder (owner mode only).
    const std::map<u64, PartyId>& ledger() const noexcept { return ledger_; }
    const std::vector<PartyId>& ingest_order() const noexcept { return order_; }
    const RelayCounters& counters() const noexcept { return counters_; }

private:
    SketchParams params_;
    RelayMode mode_;
    std::optional<Sketch> union_;
    std::optional<Sketch> intersection_;
    std::map<u64, PartyId> ledger_;
    std::vector<PartyId> order_;
    RelayCounters counters_;
};

/// What one party learns from the broadcast: sorted missing keys and, in owner
/// mode, the matching owner labels (1-based, parallel to `keys`).
struct PartyRecovery {
    std::vector<u64> keys;
    std::vector<PartyId> owners;

    bool operator==(const PartyRecovery&) const = default;
};

PartyRecovery party_decode(std::span<const Message> broadcasts, const PartyState& party, RelayMode mode);

/// Pairwise tree reduction of combine_union; equals the left-to-right fold.
Sketch combine_tree(std::span<const Sketch> sketches);

struct RelayRunConfig {
    std::vector<std::vector<u64>> sets;  // sets[i] belongs to party i+1
    u64 m = 0;
    std::uint32_t d = 0;
    std::uint32_t c = 2;
    RelayMode mode = RelayMode::plain;
    RelayOrder order = RelayOrder::ascending;
    u64 seed = 0;
};

struct RelayRunResult {
    SketchParams params;
    std::vector<PartyId> ingest_order;
    std::vector<PartyRecovery> recovered;  // recovered[i] for party i+1
    std::size_t party_messages = 0;
    std::size_t broadcast_messages = 0;
    std::size_t bytes_per_message = 0;
    std::size_t total_bytes = 0;
    RelayCounters counters;
};

/// Full in-process relay protocol. Arrival order is a seeded shuffle of the
/// parties; ascending order ingests party 1 first.
RelayRunResult run_relay(const RelayRunConfig& config);

}  // namespace setrecon
