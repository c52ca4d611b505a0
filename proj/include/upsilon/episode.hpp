#pragma once

#include <cstdint>
#include <optional>

#include "upsilon/agent.hpp"
#include "upsilon/environment.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/history.hpp"
#include "upsilon/rng.hpp"

namespace upsilon {

// Drives one episode of the turn-taking protocol: the environment sends the
// cycle-k percept, the agent answers with a_k, for exactly `horizon` cycles.
// All randomness comes from two streams derived from `seed`, so identical
// inputs give bit-identical records. A reference-machine timeout is not an
// error (the environment maps it to the default percept); an out-of-range
// agent action aborts with a ProtocolViolation naming the cycle.
inline InteractionRecord run_episode(Agent& agent, Environment& env, std::size_t horizon,
                                     std::uint64_t seed) {
    env.reset(Rng(derive_seed(seed, {stream::kEnvironment})));
    agent.begin_episode(env.spaces(), env.schedule(), Rng(derive_seed(seed, {stream::kAgent})));

    InteractionRecord record;
    record.seed = seed;
    record.history.reserve(2 * horizon);
    std::optional<Action> prev_action;
    for (std::size_t k = 1; k <= horizon; ++k) {
        Percept percept = env.step(prev_action);
        if (!env.spaces().observations.contains(percept.observation))
            throw InternalError("environment emitted an out-of-range observation");
        record.history.emplace_back(percept);
        record.cumulative_reward += percept.reward;

        const Action action = agent.act(record.history);
        if (!env.spaces().actions.contains(action))
            throw ProtocolViolation(k, "agent chose action " + std::to_string(action) +
                                           " outside the action space of size " +
                                           std::to_string(env.spaces().actions.size));
        record.history.emplace_back(action);
        prev_action = action;
    }
    record.cycles_run = horizon;
    return record;
}

}  // namespace upsilon
