#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "upsilon/environment.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/machine.hpp"
#include "upsilon/schedule.hpp"

namespace upsilon {

// Built-in environments enter weighted reports with a fixed nominal
// description length. With enumerations capped at 12 opcodes the total mass
// stays within the Kraft budget: 59/64 + 3/64 <= 1.
inline constexpr std::size_t kBuiltinLengthBits = 6;

// One evaluable environment row: an id, a factory producing fresh instances
// (one per worker task), and the exact weight it contributes to the report.
struct SuiteEntry {
    std::string id;
    std::function<std::unique_ptr<Environment>()> factory;
    Rat weight;
    std::size_t length_bits = 0;
    bool is_program = false;
};

// Report modes. Sampled rows carry importance weights and must not be mixed
// with raw-weight rows in one report.
enum class SuiteMode { Enumeration, Sampled, Corpus };

struct EnvironmentSuite {
    SuiteMode mode = SuiteMode::Corpus;
    std::vector<SuiteEntry> entries;
    Spaces program_spaces{ActionSpace{3}, ObservationSpace{3}};
    std::uint64_t step_limit = kDefaultStepLimit;
    BoundingSchedule schedule;

    Rat weight_mass() const {
        Rat mass = 0;
        for (const auto& e : entries) mass += e.weight;
        return mass;
    }
};

namespace detail {

inline SuiteEntry program_entry(Program p, const Spaces& spaces, const BoundingSchedule& schedule,
                                std::uint64_t step_limit, Rat weight) {
    SuiteEntry entry;
    entry.id = program_to_hex(p);
    entry.length_bits = p.length_bits();
    entry.weight = std::move(weight);
    entry.is_program = true;
    entry.factory = [p = std::move(p), spaces, schedule, step_limit]() {
        return std::make_unique<ProgramEnvironment>(p, spaces, schedule, step_limit);
    };
    return entry;
}

}  // namespace detail

// Raw 2^-l(p) weights (enumeration / corpus mode).
inline EnvironmentSuite suite_from_programs(std::vector<Program> programs, SuiteMode mode,
                                            const BoundingSchedule& schedule,
                                            const Spaces& spaces = {ActionSpace{3},
                                                                    ObservationSpace{3}},
                                            std::uint64_t step_limit = kDefaultStepLimit) {
    EnvironmentSuite suite;
    suite.mode = mode;
    suite.program_spaces = spaces;
    suite.step_limit = step_limit;
    suite.schedule = schedule;
    suite.entries.reserve(programs.size());
    for (auto& p : programs) {
        const Rat weight(1, BigInt(1) << p.length_bits());
        suite.entries.push_back(
            detail::program_entry(std::move(p), spaces, schedule, step_limit, weight));
    }
    return suite;
}

inline EnvironmentSuite suite_from_enumeration(std::size_t max_opcount,
                                               const BoundingSchedule& schedule,
                                               const Spaces& spaces = {ActionSpace{3},
                                                                       ObservationSpace{3}},
                                               std::uint64_t step_limit = kDefaultStepLimit) {
    return suite_from_programs(enumerate_programs(max_opcount), SuiteMode::Enumeration, schedule,
                               spaces, step_limit);
}

// Importance-corrected weights for an i.i.d. sample: each draw contributes
// 2^-l(p) / P(draw = p) / count, which keeps the weighted sum an unbiased
// estimate of the enumeration total. The 8^-n opcode factor cancels exactly.
inline EnvironmentSuite suite_from_sample(std::size_t count, const LengthDistribution& lengths,
                                          std::uint64_t master_seed,
                                          const BoundingSchedule& schedule,
                                          const Spaces& spaces = {ActionSpace{3},
                                                                  ObservationSpace{3}},
                                          std::uint64_t step_limit = kDefaultStepLimit) {
    Rng rng(derive_seed(master_seed, {stream::kSampler}));
    std::vector<Program> programs = sample_programs(count, lengths, rng);
    EnvironmentSuite suite;
    suite.mode = SuiteMode::Sampled;
    suite.program_spaces = spaces;
    suite.step_limit = step_limit;
    suite.schedule = schedule;
    suite.entries.reserve(programs.size());
    for (auto& p : programs) {
        const std::size_t n = p.opcode_count();
        const Rat gamma_mass(1, BigInt(1) << gamma_length(n + 1));
        const Rat weight = gamma_mass / lengths.probability(n) / Rat(BigInt(count));
        suite.entries.push_back(
            detail::program_entry(std::move(p), spaces, schedule, step_limit, weight));
    }
    return suite;
}

// Prepends built-in environments with their nominal weight. Only valid for
// raw-weight suites.
inline void add_builtin_environments(EnvironmentSuite& suite, const std::vector<std::string>& ids,
                                     const BoundingSchedule& schedule) {
    if (suite.mode == SuiteMode::Sampled)
        throw UsageError("built-in environments cannot join a sampled report");
    std::vector<SuiteEntry> entries;
    entries.reserve(ids.size() + suite.entries.size());
    for (const auto& id : ids) {
        make_environment(id, schedule);  // validate now
        SuiteEntry entry;
        entry.id = id;
        entry.length_bits = kBuiltinLengthBits;
        entry.weight = Rat(1, BigInt(1) << kBuiltinLengthBits);
        entry.is_program = false;
        entry.factory = [id, schedule]() { return make_environment(id, schedule); };
        entries.push_back(std::move(entry));
    }
    for (auto& e : suite.entries) entries.push_back(std::move(e));
    suite.entries = std::move(entries);
}

}  // namespace upsilon
