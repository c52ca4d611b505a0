// Command-line runner for reproducible agent-evaluation experiments:
// single-episode traces, weighted value reports over program corpora, paired
// agent comparisons, and program enumeration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "upsilon/config.hpp"
#include "upsilon/episode.hpp"
#include "upsilon/evaluation.hpp"
#include "upsilon/machine.hpp"
#include "upsilon/report.hpp"
#include "upsilon/version.hpp"

namespace fs = std::filesystem;
using namespace upsilon;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void write_config_echo(const fs::path& dir, const RunConfig& config) {
    auto out = open_output(dir / "config.txt");
    out << "# upsilon " << kVersion << " config (hash " << config.hash_hex() << ")\n";
    out << config.canonical_text();
    out << "workers=" << config.workers << "\n";
}

fs::path prepare_out_dir(const RunConfig& config) {
    if (config.out_dir.empty()) throw UsageError("--out is required for this command");
    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

EnvironmentSuite build_suite(const RunConfig& config) {
    const BoundingSchedule schedule = BoundingSchedule::from_id(config.schedule_id);
    int sources = 0;
    sources += config.corpus_path.empty() ? 0 : 1;
    sources += config.enumerate_opcount >= 0 ? 1 : 0;
    sources += config.sample_count >= 0 ? 1 : 0;
    if (sources > 1)
        throw UsageError("choose at most one of --corpus, --enumerate, --sample");

    const Spaces spaces{ActionSpace{3}, ObservationSpace{3}};
    EnvironmentSuite suite;
    if (!config.corpus_path.empty()) {
        std::ifstream in(config.corpus_path);
        if (!in) throw IoError("cannot open corpus file '" + config.corpus_path + "'");
        auto programs = parse_corpus(in, config.corpus_path);
        suite = suite_from_programs(std::move(programs), SuiteMode::Corpus, schedule, spaces,
                                    config.step_limit);
    } else if (config.enumerate_opcount >= 0) {
        suite = suite_from_enumeration(static_cast<std::size_t>(config.enumerate_opcount),
                                       schedule, spaces, config.step_limit);
    } else if (config.sample_count >= 0) {
        suite = suite_from_sample(static_cast<std::size_t>(config.sample_count),
                                  LengthDistribution::default_distribution(), config.seed,
                                  schedule, spaces, config.step_limit);
    } else {
        suite.mode = SuiteMode::Corpus;
        suite.schedule = schedule;
        suite.step_limit = config.step_limit;
    }
    if (!config.envs.empty()) add_builtin_environments(suite, config.envs, schedule);
    if (suite.entries.empty())
        throw UsageError("no environments selected (use --env, --corpus, --enumerate or --sample)");
    return suite;
}

UpsilonParams params_from(const RunConfig& config) {
    UpsilonParams params;
    params.episodes = config.episodes;
    params.horizon = config.horizon;
    params.master_seed = config.seed;
    params.workers = config.workers;
    params.agent_options.explore_prob = config.explore;
    return params;
}

int cmd_episode(const RunConfig& config) {
    if (config.agents.size() != 1) throw UsageError("episode needs exactly one --agent");
    if (config.envs.size() != 1) throw UsageError("episode needs exactly one --env");
    const BoundingSchedule schedule = BoundingSchedule::from_id(config.schedule_id);
    auto env = make_environment(config.envs[0], schedule);
    auto agent = make_agent(config.agents[0], AgentOptions{config.explore});
    // same stream derivation as episode 0 of a value run
    const std::uint64_t seed = derive_seed(config.seed, {0, 0});
    InteractionRecord record = run_episode(*agent, *env, config.horizon, seed);

    if (!config.out_dir.empty()) {
        const fs::path dir = prepare_out_dir(config);
        auto out = open_output(dir / "trace.txt");
        write_trace(out, record, config.agents[0], config.envs[0], schedule.id(),
                    config.hash_hex());
        write_config_echo(dir, config);
    } else {
        write_trace(std::cout, record, config.agents[0], config.envs[0], schedule.id(),
                    config.hash_hex());
    }
    std::cout << "cumulative_reward " << record.cumulative_reward.to_string() << "\n";
    return 0;
}

int cmd_upsilon(const RunConfig& config) {
    if (config.agents.size() != 1) throw UsageError("upsilon needs exactly one --agent");
    const EnvironmentSuite suite = build_suite(config);
    const UpsilonReport report = estimate_upsilon(config.agents[0], suite, params_from(config));

    if (!config.out_dir.empty()) {
        const fs::path dir = prepare_out_dir(config);
        auto csv = open_output(dir / "report.csv");
        write_upsilon_csv(csv, report, config.hash_hex());
        auto json = open_output(dir / "summary.json");
        json << upsilon_summary_json(report, config.hash_hex()).dump(2) << "\n";
        write_config_echo(dir, config);
    }
    std::cout << "upsilon_hat " << format_double(to_double(report.upsilon_hat)) << "\n";
    std::cout << "weight_mass " << format_double(to_double(report.weight_mass)) << "\n";
    return 0;
}

int cmd_compare(const RunConfig& config) {
    if (config.agents.size() < 2) throw UsageError("compare needs at least two --agent flags");
    const EnvironmentSuite suite = build_suite(config);
    const ComparisonReport report = compare_agents(config.agents, suite, params_from(config));

    write_comparison_table(std::cout, report);
    if (!config.out_dir.empty()) {
        const fs::path dir = prepare_out_dir(config);
        auto json = open_output(dir / "comparison.json");
        json << comparison_json(report, config.hash_hex()).dump(2) << "\n";
        write_config_echo(dir, config);
    }
    return 0;
}

int cmd_enumerate(const RunConfig& config) {
    if (config.enumerate_opcount < 0) throw UsageError("enumerate needs --enumerate N with N >= 0");
    const auto programs = enumerate_programs(static_cast<std::size_t>(config.enumerate_opcount));
    const std::string header = "enumeration of programs with at most " +
                               std::to_string(config.enumerate_opcount) + " opcodes (" +
                               std::to_string(programs.size()) + " programs)";
    if (config.out_dir.empty()) {
        write_corpus(std::cout, programs, header, kVersion, config.hash_hex());
    } else {
        auto out = open_output(config.out_dir);
        write_corpus(out, programs, header, kVersion, config.hash_hex());
    }
    std::cerr << "wrote " << programs.size() << " programs\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Occam-weighted agent evaluation harness"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    RunConfig config;
    std::string config_path;

    // flags shared by the experiment subcommands; values given on the command
    // line override the config file
    std::vector<std::string> flag_agents, flag_envs;
    std::string flag_corpus, flag_schedule, flag_out;
    long flag_enumerate = -1, flag_sample = -1;
    long flag_episodes = -1, flag_horizon = -1;
    long long flag_step_limit = -1, flag_seed = -1, flag_workers = -1;
    double flag_explore = -1.0;

    auto add_common = [&](CLI::App* cmd, bool with_sources) {
        cmd->add_option("--config", config_path, "key=value config file mirroring the flags");
        cmd->add_option("--agent", flag_agents,
                        "agent id: rand, basic, 2back, 2forward, const:<a>, cycle:<a,b,...>");
        cmd->add_option("--env", flag_envs,
                        "built-in environment id: twocoins:p=<rational>, alt, slide");
        if (with_sources) {
            cmd->add_option("--corpus", flag_corpus, "program corpus file (hex, one per line)");
            cmd->add_option("--enumerate", flag_enumerate,
                            "enumerate all programs with at most N opcodes");
            cmd->add_option("--sample", flag_sample, "sample N programs from the length prior");
            cmd->add_option("--episodes", flag_episodes, "episodes per environment");
            cmd->add_option("--step-limit", flag_step_limit, "machine steps per cycle");
            cmd->add_option("--workers", flag_workers, "rollout threads (output-invariant)");
            cmd->add_option("--explore", flag_explore, "exploration probability for table agents");
        }
        cmd->add_option("--schedule", flag_schedule,
                        "bounding schedule: halving, geometric:<gamma>, telescoping");
        cmd->add_option("--horizon", flag_horizon, "cycles per episode");
        cmd->add_option("--seed", flag_seed, "master seed");
        cmd->add_option("--out", flag_out, "output directory (enumerate: output file)");
    };

    CLI::App* episode = app.add_subcommand("episode", "trace one agent/environment episode");
    add_common(episode, false);
    episode->add_option("--explore", flag_explore, "exploration probability for table agents");

    CLI::App* upsilon_cmd = app.add_subcommand("upsilon", "weighted value report over a suite");
    add_common(upsilon_cmd, true);

    CLI::App* compare = app.add_subcommand("compare", "paired agent comparison");
    add_common(compare, true);

    CLI::App* enumerate = app.add_subcommand("enumerate", "write a program corpus");
    enumerate->add_option("--enumerate", flag_enumerate, "maximum opcode count");
    enumerate->add_option("--out", flag_out, "corpus file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) load_config_file(config_path, config);
        if (!flag_agents.empty()) config.agents = flag_agents;
        if (!flag_envs.empty()) config.envs = flag_envs;
        if (!flag_corpus.empty()) config.corpus_path = flag_corpus;
        if (flag_enumerate >= 0) config.enumerate_opcount = flag_enumerate;
        if (flag_sample >= 0) config.sample_count = flag_sample;
        if (!flag_schedule.empty()) config.schedule_id = flag_schedule;
        if (flag_episodes >= 0) config.episodes = static_cast<std::size_t>(flag_episodes);
        if (flag_horizon >= 0) config.horizon = static_cast<std::size_t>(flag_horizon);
        if (flag_step_limit >= 0) config.step_limit = static_cast<std::uint64_t>(flag_step_limit);
        if (flag_seed >= 0) config.seed = static_cast<std::uint64_t>(flag_seed);
        if (flag_workers >= 0) config.workers = static_cast<unsigned>(flag_workers);
        if (flag_explore >= 0) config.explore = flag_explore;
        if (!flag_out.empty()) config.out_dir = flag_out;

        if (episode->parsed()) return cmd_episode(config);
        if (upsilon_cmd->parsed()) return cmd_upsilon(config);
        if (compare->parsed()) return cmd_compare(config);
        if (enumerate->parsed()) return cmd_enumerate(config);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ProtocolViolation& e) {
        std::cerr << "error: protocol violation: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
