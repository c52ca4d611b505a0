#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "upsilon/dyadic.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/history.hpp"
#include "upsilon/rng.hpp"
#include "upsilon/schedule.hpp"

namespace upsilon {

struct WeightedPercept {
    Percept percept;
    Rat probability;
};

// A conditional percept distribution mu(o_k r_k | history), driven as a
// single-episode state machine: reset(), then step(k=1), step(k=2), ...
// Internal state must be a deterministic function of (history, env stream).
class Environment {
public:
    virtual ~Environment() = default;

    virtual const Spaces& spaces() const = 0;

    // The weight sequence bounding this environment's rewards. Used for
    // truncation bounds and for normalizing rewards in learning statistics.
    virtual const BoundingSchedule& schedule() const = 0;

    virtual std::string id() const = 0;

    virtual void reset(Rng rng) = 0;

    // Percept for the next cycle. prev_action is a_{k-1}, absent at k=1.
    virtual Percept step(std::optional<Action> prev_action) = 0;

    // Exact percept distribution for the next cycle, when enumerable.
    virtual std::optional<std::vector<WeightedPercept>> next_distribution(
        std::optional<Action> prev_action) const {
        (void)prev_action;
        return std::nullopt;
    }
};

// Samples exactly from rational percept probabilities by drawing an integer
// below the common denominator. Denominators are kept under 2^63 by the
// bias parser, so the draw fits a u64.
inline const Percept& sample_weighted(const std::vector<WeightedPercept>& dist, Rng& rng) {
    BigInt denom = 1;
    for (const auto& wp : dist) denom = lcm(denom, denominator(wp.probability));
    const std::uint64_t d = denom.convert_to<std::uint64_t>();
    std::uint64_t u = rng.below(d);
    for (const auto& wp : dist) {
        const std::uint64_t ticks =
            (numerator(wp.probability) * (denom / denominator(wp.probability)))
                .convert_to<std::uint64_t>();
        if (u < ticks) return wp.percept;
        u -= ticks;
    }
    throw InternalError("percept probabilities sum to less than 1");
}

// --- Two Coins -------------------------------------------------------------
//
// Each cycle two coins with the same heads bias are tossed; the observation
// is the head count and the raw reward is 1 when it matches the previous
// action (the guess), else 0. Raw rewards are bounded by the schedule.

struct CoinBias {
    Rat p_heads;  // both coins share the bias

    explicit CoinBias(Rat p) : p_heads(std::move(p)) {
        if (p_heads < 0 || p_heads > 1) throw UsageError("coin bias must be in [0,1]");
        if (denominator(p_heads) > (BigInt(1) << 31))
            throw UsageError("coin bias denominator too large (max 2^31)");
    }

    // P(head count = o), o in {0,1,2}.
    Rat head_count_probability(Observation o) const {
        const Rat p = p_heads;
        const Rat q = 1 - p;
        switch (o) {
            case 0: return q * q;
            case 1: return 2 * p * q;
            case 2: return p * p;
            default: throw std::invalid_argument("head count out of range");
        }
    }
};

// Raw-reward distribution for the next cycle of the Two Coins game: reward 1
// exactly when the observed head count equals the previous guess. Cycle 1
// (no previous action) pays 0.
inline std::vector<WeightedPercept> two_coins_distribution(std::optional<Action> prev_action,
                                                           const CoinBias& bias) {
    std::vector<WeightedPercept> dist;
    dist.reserve(3);
    for (Observation o = 0; o < 3; ++o) {
        const bool match = prev_action.has_value() && *prev_action == o;
        dist.push_back({Percept{o, match ? Dyadic::one() : Dyadic::zero()},
                        bias.head_count_probability(o)});
    }
    return dist;
}

// History-level form of the same distribution.
inline std::vector<WeightedPercept> two_coins_distribution(const History& h,
                                                           const CoinBias& bias) {
    std::optional<Action> prev;
    if (completed_cycles(h) > 0) prev = action_at(h, completed_cycles(h));
    return two_coins_distribution(prev, bias);
}

class TwoCoinsEnvironment final : public Environment {
public:
    TwoCoinsEnvironment(CoinBias bias, BoundingSchedule schedule)
        : bias_(std::move(bias)), schedule_(std::move(schedule)) {
        spaces_ = Spaces{ActionSpace{3}, ObservationSpace{3}};
    }

    const Spaces& spaces() const override { return spaces_; }
    const BoundingSchedule& schedule() const override { return schedule_; }

    std::string id() const override { return "twocoins:p=" + format_rational(bias_.p_heads); }

    void reset(Rng rng) override {
        rng_ = rng;
        cycle_ = 0;
    }

    Percept step(std::optional<Action> prev_action) override {
        ++cycle_;
        auto raw = two_coins_distribution(prev_action, bias_);
        Percept p = sample_weighted(raw, rng_);
        p.reward = schedule_.apply(p.reward.to_rat(), cycle_);
        return p;
    }

    std::optional<std::vector<WeightedPercept>> next_distribution(
        std::optional<Action> prev_action) const override {
        auto dist = two_coins_distribution(prev_action, bias_);
        for (auto& wp : dist) wp.percept.reward = schedule_.apply(wp.percept.reward.to_rat(), cycle_ + 1);
        return dist;
    }

    const CoinBias& bias() const { return bias_; }

private:
    CoinBias bias_;
    BoundingSchedule schedule_;
    Spaces spaces_;
    Rng rng_;
    std::size_t cycle_ = 0;
};

// --- mu^alt ----------------------------------------------------------------
//
// Two actions, a single empty observation. Cycle k pays exactly 2^-k when the
// last two actions differ, else 0; cycles 1 and 2 (no such pair) pay 0.

inline Percept alternation_percept(std::size_t k, std::optional<Action> a_prev,
                                   std::optional<Action> a_prev2) {
    const bool alternated = k >= 3 && a_prev.has_value() && a_prev2.has_value() &&
                            *a_prev != *a_prev2;
    return Percept{0, alternated ? Dyadic::pow2(static_cast<unsigned>(k)) : Dyadic::zero()};
}

inline Percept alternation_distribution(const History& h) {
    const std::size_t k = completed_cycles(h) + 1;
    std::optional<Action> a1, a2;
    if (k >= 2) a1 = action_at(h, k - 1);
    if (k >= 3) a2 = action_at(h, k - 2);
    return alternation_percept(k, a1, a2);
}

class AlternationEnvironment final : public Environment {
public:
    AlternationEnvironment() {
        spaces_ = Spaces{ActionSpace{2}, ObservationSpace{1}};
        schedule_ = BoundingSchedule::halving();
    }

    const Spaces& spaces() const override { return spaces_; }
    const BoundingSchedule& schedule() const override { return schedule_; }
    std::string id() const override { return "alt"; }

    void reset(Rng) override {
        cycle_ = 0;
        prev_.reset();
        prev2_.reset();
    }

    Percept step(std::optional<Action> prev_action) override {
        ++cycle_;
        prev2_ = prev_;
        prev_ = prev_action;
        return alternation_percept(cycle_, prev_, prev2_);
    }

    std::optional<std::vector<WeightedPercept>> next_distribution(
        std::optional<Action> prev_action) const override {
        return std::vector<WeightedPercept>{
            {alternation_percept(cycle_ + 1, prev_action, prev_), Rat(1)}};
    }

private:
    Spaces spaces_;
    BoundingSchedule schedule_;
    std::size_t cycle_ = 0;
    std::optional<Action> prev_, prev2_;
};

// --- mu^slide --------------------------------------------------------------
//
// Rest at the bottom of the slide and cycle k pays 2^-k-4; climb and it pays
// nothing but the next cycle, sliding back down regardless of the action,
// pays 2^-k. Deliveries are indexed by the cycle in which they arrive.

enum class SlideState { Bottom, Top };

inline constexpr Action kSlideRest = 0;
inline constexpr Action kSlideClimb = 1;

// Percept for cycle k given the state before the previous action was taken.
inline Percept slide_percept(std::size_t k, std::optional<Action> prev_action, SlideState before) {
    if (!prev_action.has_value()) return Percept{0, Dyadic::zero()};
    if (before == SlideState::Top) return Percept{0, Dyadic::pow2(static_cast<unsigned>(k))};
    if (*prev_action == kSlideRest)
        return Percept{0, Dyadic::pow2(static_cast<unsigned>(k) + 4)};
    return Percept{0, Dyadic::zero()};  // climbing pays nothing this cycle
}

inline SlideState slide_state_after(SlideState before, Action action) {
    if (before == SlideState::Top) return SlideState::Bottom;  // always slides down
    return action == kSlideClimb ? SlideState::Top : SlideState::Bottom;
}

inline Percept slide_distribution(const History& h) {
    const std::size_t k = completed_cycles(h) + 1;
    SlideState state = SlideState::Bottom;
    for (std::size_t j = 1; j + 1 < k; ++j) state = slide_state_after(state, action_at(h, j));
    std::optional<Action> prev;
    if (k >= 2) prev = action_at(h, k - 1);
    return slide_percept(k, prev, state);
}

class SlideEnvironment final : public Environment {
public:
    SlideEnvironment() {
        spaces_ = Spaces{ActionSpace{2}, ObservationSpace{1}};
        schedule_ = BoundingSchedule::halving();
    }

    const Spaces& spaces() const override { return spaces_; }
    const BoundingSchedule& schedule() const override { return schedule_; }
    std::string id() const override { return "slide"; }

    void reset(Rng) override {
        cycle_ = 0;
        state_ = SlideState::Bottom;
    }

    Percept step(std::optional<Action> prev_action) override {
        ++cycle_;
        Percept p = slide_percept(cycle_, prev_action, state_);
        if (prev_action.has_value()) state_ = slide_state_after(state_, *prev_action);
        return p;
    }

    std::optional<std::vector<WeightedPercept>> next_distribution(
        std::optional<Action> prev_action) const override {
        return std::vector<WeightedPercept>{
            {slide_percept(cycle_ + 1, prev_action, state_), Rat(1)}};
    }

private:
    Spaces spaces_;
    BoundingSchedule schedule_;
    std::size_t cycle_ = 0;
    SlideState state_ = SlideState::Bottom;
};

// --- registry ----------------------------------------------------------------

inline const std::vector<std::string>& builtin_environment_ids() {
    static const std::vector<std::string> ids = {"twocoins:p=<rational>", "alt", "slide"};
    return ids;
}

// Builds a built-in environment from its stable id. The schedule applies to
// environments with raw {0,1} rewards; alt and slide carry their own 2^-k
// reward scale and always declare halving.
inline std::unique_ptr<Environment> make_environment(const std::string& id,
                                                     const BoundingSchedule& schedule) {
    if (id == "alt") return std::make_unique<AlternationEnvironment>();
    if (id == "slide") return std::make_unique<SlideEnvironment>();
    if (id.rfind("twocoins:p=", 0) == 0) {
        Rat p;
        try {
            p = parse_rational(id.substr(11));
        } catch (const std::invalid_argument& e) {
            throw UsageError("bad environment id '" + id + "': " + e.what());
        }
        return std::make_unique<TwoCoinsEnvironment>(CoinBias(p), schedule);
    }
    std::string valid;
    for (const auto& v : builtin_environment_ids()) valid += (valid.empty() ? "" : ", ") + v;
    throw UsageError("unknown environment id '" + id + "' (valid: " + valid + ")");
}

}  // namespace upsilon
