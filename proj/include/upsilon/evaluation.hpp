#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "upsilon/agent.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/rng.hpp"
#include "upsilon/suite.hpp"
#include "upsilon/value.hpp"

namespace upsilon {

struct UpsilonParams {
    std::size_t episodes = 200;
    std::size_t horizon = 30;
    std::uint64_t master_seed = 1;
    unsigned workers = 1;
    AgentOptions agent_options{};
};

struct UpsilonRow {
    std::string id;  // program hex, or the built-in environment id
    std::size_t length_bits = 0;
    Rat weight;
    bool is_program = false;
    ValueEstimate value;
};

// The weighted aggregate over a suite. upsilon_hat and weight_mass are exact
// rationals, so the report is bit-identical for any worker count and the
// weighted sum needs no floating-point accumulation tolerance at all.
struct UpsilonReport {
    std::string agent_id;
    SuiteMode mode = SuiteMode::Corpus;
    std::string schedule_id;
    std::size_t episodes = 0;
    std::size_t horizon = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t step_limit = 0;
    std::vector<UpsilonRow> rows;
    Rat upsilon_hat;
    Rat weight_mass;
    double uncertainty = 0.0;  // sum of weight * stderr
};

inline const char* suite_mode_name(SuiteMode mode) {
    switch (mode) {
        case SuiteMode::Enumeration: return "enumeration";
        case SuiteMode::Sampled: return "sampled";
        case SuiteMode::Corpus: return "corpus";
    }
    return "unknown";
}

namespace detail {

// Runs fn(0..count) on `workers` threads. Results must be written to
// per-index slots; the caller reduces in index order afterwards, so output
// never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(workers, std::thread::hardware_concurrency() * 4 + 4);
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

struct AgentSuiteRun {
    UpsilonReport report;
    // episode_values[row][episode], kept only when requested by comparisons
    std::vector<std::vector<double>> episode_values;
};

inline AgentSuiteRun run_agent_on_suite(const std::string& agent_id,
                                        const EnvironmentSuite& suite,
                                        const UpsilonParams& params,
                                        bool keep_episode_values = false) {
    if (params.episodes < 1) throw UsageError("need at least one episode");
    AgentSuiteRun run;
    UpsilonReport& report = run.report;
    report.agent_id = agent_id;
    report.mode = suite.mode;
    report.schedule_id = suite.schedule.id();
    report.episodes = params.episodes;
    report.horizon = params.horizon;
    report.master_seed = params.master_seed;
    report.step_limit = suite.step_limit;
    report.rows.resize(suite.entries.size());
    if (keep_episode_values) run.episode_values.resize(suite.entries.size());

    detail::parallel_for(suite.entries.size(), params.workers, [&](std::size_t i) {
        const SuiteEntry& entry = suite.entries[i];
        auto agent = make_agent(agent_id, params.agent_options);
        auto env = entry.factory();
        const auto values = run_value_episodes(*agent, *env, params.episodes, params.horizon,
                                               params.master_seed, i);
        UpsilonRow row;
        row.id = entry.id;
        row.length_bits = entry.length_bits;
        row.weight = entry.weight;
        row.is_program = entry.is_program;
        row.value = summarize_episodes(values, params.horizon,
                                       env->schedule().truncation_bound(params.horizon));
        report.rows[i] = std::move(row);
        if (keep_episode_values) {
            auto& slot = run.episode_values[i];
            slot.reserve(values.size());
            for (const Dyadic& v : values) slot.push_back(v.to_double());
        }
    });

    // fixed-order reduction in canonical row order
    Rat upsilon = 0;
    Rat mass = 0;
    double uncertainty = 0.0;
    for (const UpsilonRow& row : report.rows) {
        upsilon += row.weight * row.value.mean_exact;
        mass += row.weight;
        uncertainty += to_double(row.weight) * row.value.stderr_mean;
    }
    report.upsilon_hat = upsilon;
    report.weight_mass = mass;
    report.uncertainty = uncertainty;

    if (report.upsilon_hat < 0 || report.upsilon_hat > report.weight_mass)
        throw InternalError("upsilon_hat outside [0, weight_mass]");
    if (suite.mode != SuiteMode::Sampled && report.weight_mass > 1)
        throw InternalError("weight mass exceeds 1 on a raw-weight suite");
    return run;
}

inline UpsilonReport estimate_upsilon(const std::string& agent_id, const EnvironmentSuite& suite,
                                      const UpsilonParams& params) {
    return run_agent_on_suite(agent_id, suite, params, false).report;
}

// --- paired comparisons ---------------------------------------------------------

struct ComparePair {
    std::string agent_a;
    std::string agent_b;
    Rat difference_exact;  // upsilon_hat(a) - upsilon_hat(b)
    double difference = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t rows_positive = 0;
    std::size_t rows_negative = 0;
    std::size_t rows_tied = 0;
    double sign_test_p = 1.0;
    bool ordered = false;  // bootstrap CI excludes 0
};

struct ComparisonReport {
    std::vector<UpsilonReport> agents;
    std::vector<ComparePair> pairs;
    std::size_t bootstrap_samples = 0;
};

namespace detail {

// Two-sided sign test p-value for `successes` out of `n` fair trials.
inline double sign_test_p_value(std::size_t positive, std::size_t negative) {
    const std::size_t n = positive + negative;
    if (n == 0) return 1.0;
    const std::size_t k = std::min(positive, negative);
    // tail P(X <= k) for X ~ Binomial(n, 1/2), via log pmf for stability
    double tail = 0.0;
    for (std::size_t x = 0; x <= k; ++x) {
        const double log_pmf = std::lgamma(static_cast<double>(n) + 1.0) -
                               std::lgamma(static_cast<double>(x) + 1.0) -
                               std::lgamma(static_cast<double>(n - x) + 1.0) -
                               static_cast<double>(n) * std::log(2.0);
        tail += std::exp(log_pmf);
    }
    return std::min(1.0, 2.0 * tail);
}

}  // namespace detail

// Paired design: every agent sees identical environments, episode seeds and
// horizons, so per-episode differences cancel shared randomness. The CI is a
// percentile bootstrap over the paired per-episode weighted value slices
// D_e = sum_i w_i (v_a[i][e] - v_b[i][e]); the episode axis carries the
// Monte-Carlo uncertainty of the estimate (the row set itself is fixed, and
// single-environment comparisons stay well-defined). The sign test counts
// rows by the sign of their weighted mean difference, ignoring exact ties.
inline ComparisonReport compare_agents(const std::vector<std::string>& agent_ids,
                                       const EnvironmentSuite& suite,
                                       const UpsilonParams& params,
                                       std::size_t bootstrap_samples = 2000) {
    if (agent_ids.size() < 2) throw UsageError("compare needs at least two agents");
    ComparisonReport report;
    report.bootstrap_samples = bootstrap_samples;

    std::vector<std::vector<double>> slices(agent_ids.size());  // [agent][episode]
    std::vector<std::vector<Rat>> row_means(agent_ids.size());  // [agent][row], exact
    for (std::size_t a = 0; a < agent_ids.size(); ++a) {
        AgentSuiteRun run = run_agent_on_suite(agent_ids[a], suite, params, true);
        auto& slice = slices[a];
        slice.assign(params.episodes, 0.0);
        for (std::size_t i = 0; i < run.episode_values.size(); ++i) {
            const double w = to_double(suite.entries[i].weight);
            for (std::size_t e = 0; e < params.episodes; ++e)
                slice[e] += w * run.episode_values[i][e];
        }
        row_means[a].reserve(run.report.rows.size());
        for (const UpsilonRow& row : run.report.rows) row_means[a].push_back(row.value.mean_exact);
        report.agents.push_back(std::move(run.report));
    }

    for (std::size_t a = 0; a < agent_ids.size(); ++a) {
        for (std::size_t b = a + 1; b < agent_ids.size(); ++b) {
            ComparePair pair;
            pair.agent_a = agent_ids[a];
            pair.agent_b = agent_ids[b];
            pair.difference_exact = report.agents[a].upsilon_hat - report.agents[b].upsilon_hat;
            pair.difference = to_double(pair.difference_exact);

            std::vector<double> diffs(params.episodes);
            for (std::size_t e = 0; e < params.episodes; ++e)
                diffs[e] = slices[a][e] - slices[b][e];

            Rng rng(derive_seed(params.master_seed, {stream::kBootstrap, a, b}));
            std::vector<double> means;
            means.reserve(bootstrap_samples);
            for (std::size_t s = 0; s < bootstrap_samples; ++s) {
                double sum = 0.0;
                for (std::size_t e = 0; e < params.episodes; ++e)
                    sum += diffs[rng.below(params.episodes)];
                means.push_back(sum / static_cast<double>(params.episodes));
            }
            std::sort(means.begin(), means.end());
            const double lo_rank = 0.025 * static_cast<double>(bootstrap_samples - 1);
            const double hi_rank = 0.975 * static_cast<double>(bootstrap_samples - 1);
            pair.ci_low = means[static_cast<std::size_t>(std::floor(lo_rank))];
            pair.ci_high = means[static_cast<std::size_t>(std::ceil(hi_rank))];
            pair.ordered = pair.ci_low > 0.0 || pair.ci_high < 0.0;

            for (std::size_t i = 0; i < suite.entries.size(); ++i) {
                const Rat d = row_means[a][i] - row_means[b][i];
                if (d > 0)
                    ++pair.rows_positive;
                else if (d < 0)
                    ++pair.rows_negative;
                else
                    ++pair.rows_tied;
            }
            pair.sign_test_p = detail::sign_test_p_value(pair.rows_positive, pair.rows_negative);
            report.pairs.push_back(std::move(pair));
        }
    }
    return report;
}

}  // namespace upsilon
