#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "upsilon/errors.hpp"

namespace upsilon {

// A fully serializable experiment description. The canonical text below
// defines the config hash embedded in every output file; `workers` and `out`
// are excluded because outputs are contractually independent of them.
struct RunConfig {
    std::vector<std::string> agents;
    std::vector<std::string> envs;
    std::string corpus_path;
    long enumerate_opcount = -1;  // -1: unset
    long sample_count = -1;       // -1: unset
    std::string schedule_id = "halving";
    std::size_t episodes = 200;
    std::size_t horizon = 30;
    std::uint64_t step_limit = 4096;
    std::uint64_t seed = 1;
    double explore = 0.1;
    unsigned workers = 1;
    std::string out_dir;

    std::string canonical_text() const {
        std::ostringstream out;
        for (const auto& a : agents) out << "agent=" << a << "\n";
        for (const auto& e : envs) out << "env=" << e << "\n";
        if (!corpus_path.empty()) out << "corpus=" << corpus_path << "\n";
        if (enumerate_opcount >= 0) out << "enumerate=" << enumerate_opcount << "\n";
        if (sample_count >= 0) out << "sample=" << sample_count << "\n";
        out << "schedule=" << schedule_id << "\n";
        out << "episodes=" << episodes << "\n";
        out << "horizon=" << horizon << "\n";
        out << "step-limit=" << step_limit << "\n";
        out << "seed=" << seed << "\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", explore);
        out << "explore=" << buf << "\n";
        return out.str();
    }

    // FNV-1a over the canonical text.
    std::string hash_hex() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical_text()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

// Flat key=value config files mirroring the flags; '#' starts a comment.
// Repeated agent=/env= keys append. Values from flags override these.
inline void load_config_file(const std::string& path, RunConfig& config) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto eq = line.find('=', start);
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(start, eq - start);
        const std::string value = line.substr(eq + 1);
        auto bad = [&](const std::string& why) {
            return UsageError(path + ":" + std::to_string(line_no) + ": " + why);
        };
        try {
            if (key == "agent") config.agents.push_back(value);
            else if (key == "env") config.envs.push_back(value);
            else if (key == "corpus") config.corpus_path = value;
            else if (key == "enumerate") config.enumerate_opcount = std::stol(value);
            else if (key == "sample") config.sample_count = std::stol(value);
            else if (key == "schedule") config.schedule_id = value;
            else if (key == "episodes") config.episodes = std::stoul(value);
            else if (key == "horizon") config.horizon = std::stoul(value);
            else if (key == "step-limit") config.step_limit = std::stoull(value);
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "explore") config.explore = std::stod(value);
            else if (key == "workers") config.workers = static_cast<unsigned>(std::stoul(value));
            else if (key == "out") config.out_dir = value;
            else throw bad("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw bad("bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw bad("value out of range for '" + key + "'");
        }
    }
}

}  // namespace upsilon
