#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "upsilon/agent.hpp"
#include "upsilon/environment.hpp"
#include "upsilon/episode.hpp"
#include "upsilon/rng.hpp"

namespace upsilon {

// Expected discounted value (analysis mode): (1/Gamma) * sum_i gamma^i r_i
// with Gamma = gamma / (1 - gamma) and rewards indexed from cycle 1. Finite
// sequences are treated as zero-padded.
inline double discounted_value(const std::vector<double>& rewards, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("discount gamma must lie in (0,1)");
    const double big_gamma = gamma / (1.0 - gamma);
    double sum = 0.0;
    double factor = 1.0;
    for (double r : rewards) {
        factor *= gamma;  // gamma^i for the i-th reward
        sum += factor * r;
    }
    return sum / big_gamma;
}

// Monte-Carlo value of an agent in one environment. Episode sums are exact;
// the mean is kept exact alongside its double view. stderr is the sample
// standard deviation over episodes divided by sqrt(N).
struct ValueEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t episodes = 0;
    std::size_t horizon = 0;
    Rat truncation_bound;  // exact upper bound on reward beyond the horizon
    Rat mean_exact;
};

// Per-episode exact cumulative rewards. Episode e draws its streams from
// (master_seed, env_index, e), which is the agent-reset contract: fresh
// learner and fresh streams for every episode.
inline std::vector<Dyadic> run_value_episodes(Agent& agent, Environment& env,
                                              std::size_t episodes, std::size_t horizon,
                                              std::uint64_t master_seed,
                                              std::uint64_t env_index) {
    std::vector<Dyadic> values;
    values.reserve(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
        const std::uint64_t seed = derive_seed(master_seed, {env_index, e});
        values.push_back(run_episode(agent, env, horizon, seed).cumulative_reward);
    }
    return values;
}

inline ValueEstimate summarize_episodes(const std::vector<Dyadic>& values, std::size_t horizon,
                                        const Rat& truncation_bound) {
    ValueEstimate est;
    est.episodes = values.size();
    est.horizon = horizon;
    est.truncation_bound = truncation_bound;
    if (values.empty()) return est;
    Dyadic total;
    for (const Dyadic& v : values) total += v;
    est.mean_exact = total.to_rat() / Rat(BigInt(values.size()));
    est.mean = to_double(est.mean_exact);
    if (values.size() > 1) {
        double sq = 0.0;
        for (const Dyadic& v : values) {
            const double d = v.to_double() - est.mean;
            sq += d * d;
        }
        const double n = static_cast<double>(values.size());
        est.stderr_mean = std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    }
    return est;
}

inline ValueEstimate estimate_value(Agent& agent, Environment& env, std::size_t episodes,
                                    std::size_t horizon, std::uint64_t master_seed,
                                    std::uint64_t env_index = 0) {
    if (episodes < 1) throw std::invalid_argument("estimate_value needs at least one episode");
    const auto values = run_value_episodes(agent, env, episodes, horizon, master_seed, env_index);
    return summarize_episodes(values, horizon, env.schedule().truncation_bound(horizon));
}

}  // namespace upsilon
