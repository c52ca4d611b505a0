#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "upsilon/dyadic.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/history.hpp"
#include "upsilon/rng.hpp"
#include "upsilon/schedule.hpp"

namespace upsilon {

// A policy over histories. One instance serves one episode at a time;
// begin_episode() is the reset point that makes each environment see a fresh
// learner with a stream re-derived by the harness.
class Agent {
public:
    virtual ~Agent() = default;

    virtual std::string id() const = 0;

    virtual void begin_episode(const Spaces& spaces, const BoundingSchedule& schedule, Rng rng) = 0;

    // Chooses a_k given the history through the cycle-k percept.
    virtual Action act(const History& history) = 0;
};

struct AgentOptions {
    // Probability of a uniformly random action at each decision. The table
    // agents default to 0.1; 0 gives the pure argmax for oracle tests.
    double explore_prob = 0.1;
    // When true, basic/2back argmax only once every action has a sample in
    // the current context (uniform until then); when false, untried actions
    // default to estimate 0 and the argmax applies as soon as any action has
    // a sample, matching the default-0 rule of the two-step lookahead.
    bool uniform_until_all_seen = false;
};

// --- learning statistics -----------------------------------------------------

struct ActionStats {
    std::uint64_t count = 0;
    double sum = 0.0;

    double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

// Per-context, per-action counts and sums of normalized rewards. Context keys
// pack the window bytes exactly, so distinct contexts never collide.
class StatTable {
public:
    void clear(std::uint32_t action_count) {
        rows_.clear();
        action_count_ = action_count;
    }

    void update(std::uint64_t key, Action action, double normalized_reward) {
        auto& row = rows_.try_emplace(key, action_count_).first->second;
        row[action].count += 1;
        row[action].sum += normalized_reward;
    }

    const std::vector<ActionStats>* find(std::uint64_t key) const {
        auto it = rows_.find(key);
        return it == rows_.end() ? nullptr : &it->second;
    }

    std::size_t context_count() const { return rows_.size(); }

private:
    std::unordered_map<std::uint64_t, std::vector<ActionStats>> rows_;
    std::uint32_t action_count_ = 0;
};

// Exact comparison of sum/count ratios (untried actions count as estimate 0).
// Division-free: the cross products are formed from the exact binary
// representations of the sums, so equal means compare equal no matter how
// they are distributed over counts, and scaling every sum by a common factor
// cannot reorder distinct means.
inline int compare_stats(const ActionStats& a, const ActionStats& b) {
    const bool a_zero = a.count == 0 || a.sum <= 0.0;
    const bool b_zero = b.count == 0 || b.sum <= 0.0;
    if (a_zero || b_zero) {
        if (a_zero && b_zero) return 0;
        return a_zero ? -1 : 1;
    }
    // a.sum / a.count <=> b.sum / b.count  <=>  a.sum * b.count <=> b.sum * a.count
    int ea = 0, eb = 0;
    const double ma = std::frexp(a.sum, &ea);
    const double mb = std::frexp(b.sum, &eb);
    unsigned __int128 ia = static_cast<unsigned __int128>(ma * 9007199254740992.0);  // 2^53
    unsigned __int128 ib = static_cast<unsigned __int128>(mb * 9007199254740992.0);
    ia *= b.count;
    ib *= a.count;
    // counts are at most 2^32, so the products stay below 2^85 and a shift of
    // more than 34 bits decides the comparison outright
    const int shift = ea - eb;
    if (shift > 34) return 1;
    if (shift < -34) return -1;
    if (shift > 0)
        ia <<= shift;
    else
        ib <<= -shift;
    if (ia < ib) return -1;
    return ia > ib ? 1 : 0;
}

// Argmax over per-action means, ties broken by the lowest action index.
inline Action greedy_action(const std::vector<ActionStats>& row) {
    Action best = 0;
    for (Action a = 1; a < row.size(); ++a)
        if (compare_stats(row[a], row[best]) > 0) best = a;
    return best;
}

inline bool all_actions_seen(const std::vector<ActionStats>& row) {
    return std::all_of(row.begin(), row.end(),
                       [](const ActionStats& s) { return s.count > 0; });
}

inline bool any_action_seen(const std::vector<ActionStats>& row) {
    return std::any_of(row.begin(), row.end(),
                       [](const ActionStats& s) { return s.count > 0; });
}

namespace detail {

// Rewards are learned on a schedule-normalized scale (observed r_k divided by
// the harness weight w_k, clamped to [0,1]) so table means are stationary.
inline double normalized_reward(const Dyadic& reward, const BoundingSchedule& schedule,
                                std::size_t cycle) {
    if (reward.is_zero()) return 0.0;
    const Rat ratio = reward.to_rat() / schedule.applied_weight(cycle).to_rat();
    if (ratio >= 1) return 1.0;
    return to_double(ratio);
}

inline std::uint8_t reward_context_byte(double normalized) {
    const double scaled = std::floor(normalized * 256.0);
    if (scaled >= 255.0) return 255;
    if (scaled <= 0.0) return 0;
    return static_cast<std::uint8_t>(scaled);
}

inline std::uint64_t pack_key(std::initializer_list<std::uint8_t> bytes) {
    std::uint64_t key = 0;
    for (std::uint8_t b : bytes) key = (key << 8) | b;
    return key;
}

}  // namespace detail

// --- baseline agents ---------------------------------------------------------

// pi^rand: uniformly random actions.
class RandomAgent final : public Agent {
public:
    std::string id() const override { return "rand"; }

    void begin_episode(const Spaces& spaces, const BoundingSchedule&, Rng rng) override {
        action_count_ = spaces.actions.size;
        rng_ = rng;
    }

    Action act(const History&) override {
        return static_cast<Action>(rng_.below(action_count_));
    }

private:
    std::uint32_t action_count_ = 1;
    Rng rng_;
};

// Always plays one fixed action. Plumbing for oracle tests.
class ConstAgent final : public Agent {
public:
    explicit ConstAgent(Action action) : action_(action) {}

    std::string id() const override { return "const:" + std::to_string(action_); }

    void begin_episode(const Spaces&, const BoundingSchedule&, Rng) override {}

    Action act(const History&) override { return action_; }

private:
    Action action_;
};

// Plays a fixed action pattern round-robin. Plumbing for scripted oracles
// (e.g. strict alternation).
class CycleAgent final : public Agent {
public:
    explicit CycleAgent(std::vector<Action> pattern) : pattern_(std::move(pattern)) {
        if (pattern_.empty()) throw UsageError("cycle agent needs at least one action");
    }

    std::string id() const override {
        std::string s = "cycle:";
        for (std::size_t i = 0; i < pattern_.size(); ++i)
            s += (i ? "," : "") + std::to_string(pattern_[i]);
        return s;
    }

    void begin_episode(const Spaces&, const BoundingSchedule&, Rng) override { next_ = 0; }

    Action act(const History&) override {
        Action a = pattern_[next_ % pattern_.size()];
        ++next_;
        return a;
    }

private:
    std::vector<Action> pattern_;
    std::size_t next_ = 0;
};

// --- table agents --------------------------------------------------------------

// Shared machinery: ingesting completed cycles into tables keyed by a context
// function, and the 90/10 action selection rule.
class TableAgentBase : public Agent {
public:
    explicit TableAgentBase(AgentOptions options) : options_(options) {}

    void begin_episode(const Spaces& spaces, const BoundingSchedule& schedule, Rng rng) override {
        if (spaces.actions.size > 256 || spaces.observations.size > 256)
            throw UsageError("table agents support at most 256 symbols per space");
        spaces_ = spaces;
        schedule_ = schedule;
        rng_ = rng;
        processed_cycles_ = 0;
        rewards_.clear(spaces.actions.size);
        on_reset();
    }

    Action act(const History& history) override {
        ingest(history);
        const std::size_t k = (history.size() + 1) / 2;  // current cycle
        return select(history, k);
    }

    const StatTable& reward_table() const { return rewards_; }

protected:
    virtual void on_reset() {}
    virtual std::uint64_t context_key(const History& h, std::size_t k) const = 0;
    virtual Action select(const History& h, std::size_t k) = 0;
    // Extension hook for agents that track more than next-cycle reward.
    virtual void on_sample(const History&, std::size_t) {}

    Action uniform_action() { return static_cast<Action>(rng_.below(spaces_.actions.size)); }

    bool explore() { return rng_.bernoulli(options_.explore_prob); }

    double normalized_reward_at(const History& h, std::size_t cycle) const {
        return detail::normalized_reward(percept_at(h, cycle).reward, schedule_, cycle);
    }

    Spaces spaces_;
    BoundingSchedule schedule_;
    Rng rng_;
    StatTable rewards_;
    AgentOptions options_;

private:
    // Credit the reward of cycle j to the (context, action) pair of cycle j-1.
    void ingest(const History& h) {
        const std::size_t cycles = (h.size() + 1) / 2;  // percepts available
        for (std::size_t j = processed_cycles_ + 1; j <= cycles; ++j) {
            if (j >= 2) {
                const std::uint64_t key = context_key(h, j - 1);
                rewards_.update(key, action_at(h, j - 1), normalized_reward_at(h, j));
                on_sample(h, j);
            }
        }
        processed_cycles_ = cycles;
    }

    std::size_t processed_cycles_ = 0;
};

// pi^basic: statistics conditioned on the current observation alone; the
// argmax action with probability 0.9, uniform otherwise. An observation with
// untried actions is treated as unseen and played uniformly.
class BasicAgent final : public TableAgentBase {
public:
    explicit BasicAgent(AgentOptions options = {}) : TableAgentBase(options) {}

    std::string id() const override { return "basic"; }

protected:
    std::uint64_t context_key(const History& h, std::size_t k) const override {
        return detail::pack_key({static_cast<std::uint8_t>(percept_at(h, k).observation)});
    }

    Action select(const History& h, std::size_t k) override {
        if (explore()) return uniform_action();
        const auto* row = rewards_.find(context_key(h, k));
        if (row == nullptr || !any_action_seen(*row)) return uniform_action();
        if (options_.uniform_until_all_seen && !all_actions_seen(*row)) return uniform_action();
        return greedy_action(*row);
    }
};

namespace detail {

// Context window for the 2back family: the last two percepts and the last two
// actions, with presence flags for the first cycles. Rewards enter the key on
// their normalized scale quantized to a byte.
inline std::uint64_t window2_key(const History& h, std::size_t k, const BoundingSchedule& schedule) {
    const bool has1 = k >= 2;  // a_{k-1} and percept k-1
    const bool has2 = k >= 3;  // a_{k-2}
    const Percept& now = percept_at(h, k);
    const std::uint8_t flags = static_cast<std::uint8_t>((has1 ? 1 : 0) | (has2 ? 2 : 0));
    std::uint8_t o_prev = 0, r_prev = 0, a_prev = 0, a_prev2 = 0;
    if (has1) {
        const Percept& prev = percept_at(h, k - 1);
        o_prev = static_cast<std::uint8_t>(prev.observation);
        r_prev = reward_context_byte(normalized_reward(prev.reward, schedule, k - 1));
        a_prev = static_cast<std::uint8_t>(action_at(h, k - 1));
    }
    if (has2) a_prev2 = static_cast<std::uint8_t>(action_at(h, k - 2));
    const std::uint8_t o_now = static_cast<std::uint8_t>(now.observation);
    const std::uint8_t r_now = reward_context_byte(normalized_reward(now.reward, schedule, k));
    return pack_key({flags, o_now, r_now, a_prev, o_prev, r_prev, a_prev2});
}

}  // namespace detail

// pi^2back: as pi^basic but conditioned on the full two-cycle window of
// observations, rewards and actions.
class TwoBackAgent final : public TableAgentBase {
public:
    explicit TwoBackAgent(AgentOptions options = {}) : TableAgentBase(options) {}

    std::string id() const override { return "2back"; }

protected:
    std::uint64_t context_key(const History& h, std::size_t k) const override {
        return detail::window2_key(h, k, schedule_);
    }

    Action select(const History& h, std::size_t k) override {
        if (explore()) return uniform_action();
        const auto* row = rewards_.find(context_key(h, k));
        if (row == nullptr || !any_action_seen(*row)) return uniform_action();
        if (options_.uniform_until_all_seen && !all_actions_seen(*row)) return uniform_action();
        return greedy_action(*row);
    }
};

// pi^2forward: chooses the action maximizing the estimated two-step return
// rhat_{k+1}(a) + rhat_{k+2}, where the second term averages over the
// empirically observed successor contexts of (context, a) and assumes the
// next action is chosen to maximize it. Unseen quantities default to 0.
class TwoForwardAgent final : public TableAgentBase {
public:
    explicit TwoForwardAgent(AgentOptions options = {}) : TableAgentBase(options) {}

    std::string id() const override { return "2forward"; }

    // Direct table access for oracle tests with hand-populated statistics.
    StatTable& mutable_rewards() { return rewards_; }
    std::map<std::pair<std::uint64_t, Action>, std::map<std::uint64_t, std::uint64_t>>&
    mutable_transitions() {
        return transitions_;
    }

    // The deterministic two-step score, exposed for exhaustive evaluation.
    double two_step_score(std::uint64_t context, Action a) const {
        double r1 = 0.0;
        if (const auto* row = rewards_.find(context)) r1 = (*row)[a].mean();
        double r2 = 0.0;
        auto it = transitions_.find({context, a});
        if (it != transitions_.end() && !it->second.empty()) {
            double weighted = 0.0;
            std::uint64_t total = 0;
            for (const auto& [successor, count] : it->second) {
                weighted += static_cast<double>(count) * best_mean(successor);
                total += count;
            }
            r2 = weighted / static_cast<double>(total);
        }
        return r1 + r2;
    }

protected:
    void on_reset() override { transitions_.clear(); }

    std::uint64_t context_key(const History& h, std::size_t k) const override {
        return detail::window2_key(h, k, schedule_);
    }

    void on_sample(const History& h, std::size_t j) override {
        // successor context observed after acting in cycle j-1
        transitions_[{context_key(h, j - 1), action_at(h, j - 1)}][context_key(h, j)] += 1;
    }

    Action select(const History& h, std::size_t k) override {
        if (explore()) return uniform_action();
        const std::uint64_t ctx = context_key(h, k);
        const auto* row = rewards_.find(ctx);
        if (row == nullptr || !any_action_seen(*row)) return uniform_action();
        Action best = 0;
        double best_score = -1.0;
        for (Action a = 0; a < spaces_.actions.size; ++a) {
            const double s = two_step_score(ctx, a);
            if (s > best_score) {
                best_score = s;
                best = a;
            }
        }
        return best;
    }

private:
    double best_mean(std::uint64_t context) const {
        const auto* row = rewards_.find(context);
        if (row == nullptr) return 0.0;
        double best = 0.0;
        for (const ActionStats& s : *row) best = std::max(best, s.mean());
        return best;
    }

    std::map<std::pair<std::uint64_t, Action>, std::map<std::uint64_t, std::uint64_t>>
        transitions_;
};

// --- registry -----------------------------------------------------------------

inline const std::vector<std::string>& builtin_agent_ids() {
    static const std::vector<std::string> ids = {"rand", "basic", "2back",
                                                 "2forward", "const:<a>", "cycle:<a,b,...>"};
    return ids;
}

inline std::unique_ptr<Agent> make_agent(const std::string& id, AgentOptions options = {}) {
    if (id == "rand") return std::make_unique<RandomAgent>();
    if (id == "basic") return std::make_unique<BasicAgent>(options);
    if (id == "2back") return std::make_unique<TwoBackAgent>(options);
    if (id == "2forward") return std::make_unique<TwoForwardAgent>(options);
    auto parse_action = [&](const std::string& s) -> Action {
        if (s.empty() || s.size() > 3 || s.find_first_not_of("0123456789") != std::string::npos)
            throw UsageError("bad action index '" + s + "' in agent id '" + id + "'");
        return static_cast<Action>(std::stoul(s));
    };
    if (id.rfind("const:", 0) == 0) return std::make_unique<ConstAgent>(parse_action(id.substr(6)));
    if (id.rfind("cycle:", 0) == 0) {
        std::vector<Action> pattern;
        std::string rest = id.substr(6);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const std::size_t comma = rest.find(',', pos);
            const std::string tok =
                rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            pattern.push_back(parse_action(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return std::make_unique<CycleAgent>(std::move(pattern));
    }
    std::string valid;
    for (const auto& v : builtin_agent_ids()) valid += (valid.empty() ? "" : ", ") + v;
    throw UsageError("unknown agent id '" + id + "' (valid: " + valid + ")");
}

}  // namespace upsilon
