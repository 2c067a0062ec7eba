#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chopsim/config.hpp"
#include "chopsim/harness.hpp"
#include "chopsim/perception.hpp"
#include "chopsim/planner.hpp"
#include "chopsim/scene.hpp"

namespace {

using namespace chopsim;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SimConfig load_config(const std::string& path, bool perfect) {
    SimConfig config;
    if (!path.empty()) config = config_from_json(read_file(path));
    return perfect ? make_perfect(config) : config;
}

struct EpisodeArgs {
    std::string scene_path;
    bool random = false;
    std::uint64_t seed = 0;
    std::string goal;
    std::string trace_path;
    std::string config_path;
    std::string dump_dir;
    bool perfect = false;
};

int run_episode_cmd(const EpisodeArgs& a) {
    const SimConfig config = load_config(a.config_path, a.perfect);
    if (a.random == !a.scene_path.empty()) throw ConfigError("give exactly one of --scene FILE or --random");
    GoalSpec goal;
    try {
        goal = parse_goal(a.goal);
    } catch (const GoalParseError& e) {
        throw ConfigError(std::string("bad goal: ") + e.what());
    }
    Scene scene;
    if (a.random) {
        scene = generate_scene(config.scene, derive_seed(a.seed, 0));
    } else {
        try {
            scene = scene_from_json(read_file(a.scene_path));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad scene file: ") + e.what());
        }
    }

    int observation = 0;
    std::function<void(const Observation&)> dump;
    if (!a.dump_dir.empty()) {
        dump = [&](const Observation& obs) {
            char name[32];
            std::snprintf(name, sizeof(name), "observe_%03d", observation++);
            dump_observation(obs, std::filesystem::path(a.dump_dir) / name);
        };
    }
    const EpisodeResult r = run_episode(scene, goal, config.planner, a.seed, dump);
    if (!a.trace_path.empty()) write_text_file(a.trace_path, trace_to_jsonl(r.trace));

    std::cout << (r.success ? "success" : "failure") << " iterations=" << r.iterations;
    for (const GoalEntry& e : goal.entries) {
        std::cout << ' ' << to_string(e.food_class) << '=' << r.final_scene.count(e.food_class) << '/'
                  << e.target_count;
    }
    std::cout << '\n';
    return r.success ? 0 : kExitFailure;
}

struct ExperimentArgs {
    std::string family;
    int trials = 1;
    std::uint64_t seed = 0;
    std::string config_path;
    std::string out;
    std::string json;
    std::string rows;
    int jobs = 1;
    bool perfect = false;
};

int run_experiment_cmd(const ExperimentArgs& a) {
    ExperimentSpec spec;
    const auto family = parse_family(a.family);
    if (!family) throw ConfigError("unknown family '" + a.family + "'");
    if (a.trials < 1) throw ConfigError("--trials must be >= 1");
    spec.family = *family;
    spec.trials = a.trials;
    spec.jobs = a.jobs;
    spec.config = load_config(a.config_path, a.perfect);

    const ExperimentResult r = run_experiment(spec, a.seed);
    const std::string csv = metrics_to_csv(r.metrics);
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(a.out, csv);
    }
    if (!a.json.empty()) write_text_file(a.json, metrics_to_json(r.metrics));
    if (!a.rows.empty()) write_text_file(a.rows, rows_to_jsonl(r.rows));
    std::cerr << r.metrics.experiment << ": " << r.metrics.episode_successes << '/' << r.metrics.trials
              << " episodes succeeded in " << r.metrics.runtime_s << " s\n";
    return 0;
}

int run_gen_scene_cmd(std::uint64_t seed, const std::string& out, const std::string& config_path) {
    const SimConfig config = load_config(config_path, false);
    const std::string text = scene_to_json(generate_scene(config.scene, seed));
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_file(out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seeded 2D chopping simulator"};
    app.require_subcommand(1);

    EpisodeArgs ep;
    CLI::App* episode = app.add_subcommand("episode", "Run one goal-driven episode");
    episode->add_option("--scene", ep.scene_path, "Scene JSON file");
    episode->add_flag("--random", ep.random, "Generate a random scene from --seed");
    episode->add_option("--seed", ep.seed, "Seed");
    episode->add_option("--goal", ep.goal, "Goal, e.g. \"apple=4:even; cucumber=3:long\"")->required();
    episode->add_option("--trace", ep.trace_path, "Write the event trace (JSON Lines)");
    episode->add_option("--config", ep.config_path, "Config JSON");
    episode->add_option("--dump-dir", ep.dump_dir, "Write observation masks (PGM) here");
    episode->add_flag("--perfect", ep.perfect, "Force every probability to 1");

    ExperimentArgs ex;
    CLI::App* experiment = app.add_subcommand("experiment", "Run an experiment family");
    experiment->add_option("--family", ex.family, "exp1 | exp2 | exp3")->required();
    experiment->add_option("--trials", ex.trials, "Number of trials")->required();
    experiment->add_option("--seed", ex.seed, "Seed");
    experiment->add_option("--config", ex.config_path, "Config JSON");
    experiment->add_option("--out", ex.out, "CSV report (stdout if omitted)");
    experiment->add_option("--json", ex.json, "JSON report");
    experiment->add_option("--rows", ex.rows, "Per-trial rows (JSON Lines)");
    experiment->add_option("--jobs", ex.jobs, "Worker threads")->check(CLI::PositiveNumber);
    experiment->add_flag("--perfect", ex.perfect, "Force every probability to 1");

    std::uint64_t gen_seed = 0;
    std::string gen_out;
    std::string gen_config;
    CLI::App* gen = app.add_subcommand("gen-scene", "Generate a random scene");
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_option("--out", gen_out, "Output file (stdout if omitted)");
    gen->add_option("--config", gen_config, "Config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (episode->parsed()) return run_episode_cmd(ep);
        if (experiment->parsed()) return run_experiment_cmd(ex);
        return run_gen_scene_cmd(gen_seed, gen_out, gen_config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
