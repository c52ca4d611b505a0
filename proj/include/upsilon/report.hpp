#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "upsilon/evaluation.hpp"
#include "upsilon/history.hpp"
#include "upsilon/version.hpp"

namespace upsilon {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Cycle-by-cycle trace with exact fractional rewards.
inline void write_trace(std::ostream& out, const InteractionRecord& record,
                        const std::string& agent_id, const std::string& env_id,
                        const std::string& schedule_id, const std::string& config_hash) {
    out << "# upsilon trace\n";
    out << "# version: " << kVersion << "\n";
    out << "# config_hash: " << config_hash << "\n";
    out << "# agent: " << agent_id << "\n";
    out << "# env: " << env_id << "\n";
    out << "# schedule: " << schedule_id << "\n";
    out << "# seed: " << record.seed << "\n";
    out << "k\to\tr\ta\n";
    for (std::size_t k = 1; k <= completed_cycles(record.history); ++k) {
        const Percept& p = percept_at(record.history, k);
        out << k << "\t" << p.observation << "\t" << p.reward.to_string() << "\t"
            << action_at(record.history, k) << "\n";
    }
    out << "# cumulative_reward: " << record.cumulative_reward.to_string() << "\n";
}

inline void write_upsilon_csv(std::ostream& out, const UpsilonReport& report,
                              const std::string& config_hash) {
    out << "# upsilon " << kVersion << "\n";
    out << "# config_hash: " << config_hash << "\n";
    out << "# agent: " << report.agent_id << "\n";
    out << "# mode: " << suite_mode_name(report.mode) << "\n";
    out << "program_hex,length_bits,weight,mean,stderr,episodes,horizon\n";
    for (const UpsilonRow& row : report.rows) {
        out << row.id << "," << row.length_bits << "," << format_double(to_double(row.weight))
            << "," << format_double(row.value.mean) << "," << format_double(row.value.stderr_mean)
            << "," << row.value.episodes << "," << row.value.horizon << "\n";
    }
}

inline Json upsilon_summary_json(const UpsilonReport& report, const std::string& config_hash) {
    Json j;
    j["agent"] = report.agent_id;
    j["upsilon_hat"] = to_double(report.upsilon_hat);
    j["weight_mass"] = to_double(report.weight_mass);
    j["uncertainty"] = report.uncertainty;
    j["mode"] = suite_mode_name(report.mode);
    j["schedule"] = report.schedule_id;
    j["episodes"] = report.episodes;
    j["horizon"] = report.horizon;
    j["step_limit"] = report.step_limit;
    j["environments"] = report.rows.size();
    j["master_seed"] = report.master_seed;
    j["config_hash"] = config_hash;
    j["version"] = kVersion;
    return j;
}

inline Json comparison_json(const ComparisonReport& report, const std::string& config_hash) {
    Json j;
    Json agents = Json::array();
    for (const UpsilonReport& r : report.agents) {
        Json a;
        a["agent"] = r.agent_id;
        a["upsilon_hat"] = to_double(r.upsilon_hat);
        a["uncertainty"] = r.uncertainty;
        agents.push_back(a);
    }
    j["agents"] = agents;
    Json pairs = Json::array();
    for (const ComparePair& p : report.pairs) {
        Json e;
        e["agent_a"] = p.agent_a;
        e["agent_b"] = p.agent_b;
        e["difference"] = p.difference;
        e["ci_low"] = p.ci_low;
        e["ci_high"] = p.ci_high;
        e["ordered"] = p.ordered;
        e["rows_positive"] = p.rows_positive;
        e["rows_negative"] = p.rows_negative;
        e["rows_tied"] = p.rows_tied;
        e["sign_test_p"] = p.sign_test_p;
        pairs.push_back(e);
    }
    j["pairs"] = pairs;
    j["bootstrap_samples"] = report.bootstrap_samples;
    j["config_hash"] = config_hash;
    j["version"] = kVersion;
    return j;
}

inline void write_comparison_table(std::ostream& out, const ComparisonReport& report) {
    out << "agent\tupsilon_hat\tuncertainty\n";
    for (const UpsilonReport& r : report.agents) {
        out << r.agent_id << "\t" << format_double(to_double(r.upsilon_hat)) << "\t"
            << format_double(r.uncertainty) << "\n";
    }
    out << "\npair\tdifference\tci95\tordered\tsign(+/-/=)\tp\n";
    for (const ComparePair& p : report.pairs) {
        out << p.agent_a << ">" << p.agent_b << "\t" << format_double(p.difference) << "\t["
            << format_double(p.ci_low) << ", " << format_double(p.ci_high) << "]\t"
            << (p.ordered ? "yes" : "no") << "\t" << p.rows_positive << "/" << p.rows_negative
            << "/" << p.rows_tied << "\t" << format_double(p.sign_test_p) << "\n";
    }
}

}  // namespace upsilon
