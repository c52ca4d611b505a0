#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "upsilon/dyadic.hpp"
#include "upsilon/errors.hpp"

namespace upsilon {

// Symbols are plain indices 0..size-1.
using Action = std::uint32_t;
using Observation = std::uint32_t;

struct ActionSpace {
    std::uint32_t size = 1;
    bool contains(Action a) const { return a < size; }
};

struct ObservationSpace {
    std::uint32_t size = 1;
    bool contains(Observation o) const { return o < size; }
};

struct Spaces {
    ActionSpace actions;
    ObservationSpace observations;
};

struct Percept {
    Observation observation = 0;
    Dyadic reward;

    bool operator==(const Percept& o) const {
        return observation == o.observation && reward == o.reward;
    }
};

// The interaction record both parties condition on: o1 r1, a1, o2 r2, a2, ...
// The environment moves first, so element 0 is always a percept and percepts
// and actions strictly alternate.
using HistoryElement = std::variant<Percept, Action>;
using History = std::vector<HistoryElement>;

inline bool validate_history(const History& h, const Spaces& spaces) {
    for (std::size_t i = 0; i < h.size(); ++i) {
        const bool expect_percept = (i % 2 == 0);
        if (expect_percept) {
            const auto* p = std::get_if<Percept>(&h[i]);
            if (p == nullptr) return false;
            if (!spaces.observations.contains(p->observation)) return false;
            if (!p->reward.in_unit_interval()) return false;
        } else {
            const auto* a = std::get_if<Action>(&h[i]);
            if (a == nullptr) return false;
            if (!spaces.actions.contains(*a)) return false;
        }
    }
    return true;
}

// Completed (percept, action) cycles.
inline std::size_t completed_cycles(const History& h) { return h.size() / 2; }

// 1-based accessors for well-formed histories.
inline const Percept& percept_at(const History& h, std::size_t cycle) {
    return std::get<Percept>(h[2 * (cycle - 1)]);
}
inline Action action_at(const History& h, std::size_t cycle) {
    return std::get<Action>(h[2 * cycle - 1]);
}

inline constexpr std::size_t kMaxEncodableCycles = 65535;

// Canonical self-delimiting byte encoding used at the reference-machine
// boundary and in trace files: big-endian cycle count, then per cycle one
// observation byte, one reward byte (floor(r*256) clamped to 255) and one
// action byte. Rewards are quantized only here; internal arithmetic is exact.
// The history must end on a cycle boundary (..., percept, action).
inline std::vector<std::uint8_t> encode_history_bytes(const History& h) {
    if (h.size() % 2 != 0)
        throw std::invalid_argument("encode_history_bytes: history must end with an action");
    const std::size_t cycles = completed_cycles(h);
    if (cycles > kMaxEncodableCycles)
        throw std::length_error("encode_history_bytes: history exceeds 65535 cycles");
    std::vector<std::uint8_t> out;
    out.reserve(2 + 3 * cycles);
    out.push_back(static_cast<std::uint8_t>(cycles >> 8));
    out.push_back(static_cast<std::uint8_t>(cycles & 0xff));
    for (std::size_t k = 1; k <= cycles; ++k) {
        const Percept& p = percept_at(h, k);
        if (p.observation > 255 || action_at(h, k) > 255)
            throw std::invalid_argument("encode_history_bytes: symbols must fit a byte");
        out.push_back(static_cast<std::uint8_t>(p.observation));
        out.push_back(p.reward.to_byte_256());
        out.push_back(static_cast<std::uint8_t>(action_at(h, k)));
    }
    return out;
}

// Inverse of encode_history_bytes up to reward quantization.
inline History decode_history_bytes(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) throw std::invalid_argument("decode_history_bytes: truncated header");
    const std::size_t cycles = (static_cast<std::size_t>(bytes[0]) << 8) | bytes[1];
    if (bytes.size() != 2 + 3 * cycles)
        throw std::invalid_argument("decode_history_bytes: truncated body");
    History h;
    h.reserve(2 * cycles);
    for (std::size_t k = 0; k < cycles; ++k) {
        const std::uint8_t obs = bytes[2 + 3 * k];
        const std::uint8_t reward = bytes[2 + 3 * k + 1];
        const std::uint8_t action = bytes[2 + 3 * k + 2];
        h.emplace_back(Percept{obs, Dyadic(BigInt(reward), 8)});
        h.emplace_back(static_cast<Action>(action));
    }
    return h;
}

// One finished episode: the full history, its exact reward sum, and the seed
// that reproduces it.
struct InteractionRecord {
    History history;
    Dyadic cumulative_reward;
    std::size_t cycles_run = 0;
    std::uint64_t seed = 0;
};

}  // namespace upsilon
