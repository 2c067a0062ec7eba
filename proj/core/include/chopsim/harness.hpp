#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chopsim/config.hpp"
#include "chopsim/planner.hpp"

namespace chopsim {

enum class ExperimentFamily { ComponentEval, SingleChop, MultiObject };

std::string_view to_string(ExperimentFamily f);
/// Accepts "exp1", "exp2", "exp3".
std::optional<ExperimentFamily> parse_family(std::string_view name);

/// One multi-object task: the initial pieces on the board and the goal.
struct TaskSpec {
    std::string name;
    std::vector<FoodClass> initial;
    GoalSpec goal;
};

/// The ten apple/cucumber tasks of the multi-object suite.
std::vector<TaskSpec> multi_object_tasks(CutStyle style = CutStyle::Long);

struct ExperimentSpec {
    ExperimentFamily family = ExperimentFamily::ComponentEval;
    int trials = 1;
    SimConfig config;
    /// MultiObject only; empty means multi_object_tasks(config.task_style).
    std::vector<TaskSpec> tasks;
    /// Worker threads. Results do not depend on this.
    int jobs = 1;
    bool keep_traces = false;
};

struct Tally {
    std::string component;
    std::optional<FoodClass> food_class;
    std::optional<CutStyle> style;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;

    double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
    friend bool operator==(const Tally&, const Tally&) = default;
};

struct Metrics {
    std::string experiment;
    std::uint64_t trials = 0;
    std::uint64_t episode_successes = 0;
    /// Ordered by first appearance; Exp2 cells in (class, style) order.
    std::vector<Tally> tallies;
    /// Wall clock; not serialized and ignored by ==.
    double runtime_s = 0.0;

    const Tally* find(std::string_view component, std::optional<FoodClass> c = std::nullopt,
                      std::optional<CutStyle> s = std::nullopt) const;
    Tally& at(std::string_view component, std::optional<FoodClass> c = std::nullopt,
              std::optional<CutStyle> s = std::nullopt);
    void record(std::string_view component, bool success, std::optional<FoodClass> c = std::nullopt,
                std::optional<CutStyle> s = std::nullopt);

    friend bool operator==(const Metrics& a, const Metrics& b) {
        return a.experiment == b.experiment && a.trials == b.trials &&
               a.episode_successes == b.episode_successes && a.tallies == b.tallies;
    }
};

struct TrialRow {
    int index = 0;
    std::uint64_t seed = 0;
    std::string task;
    bool success = false;
    int iterations = 0;
    std::vector<std::pair<std::string, std::int64_t>> counters;
    std::optional<EpisodeTrace> trace;
};

struct ExperimentResult {
    Metrics metrics;
    std::vector<TrialRow> rows;
};

/// Trial i runs on derive_seed(seed, i). Identical (spec, seed) give identical results.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::uint64_t seed);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval, 95% by default.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

/// Columns: experiment, component, class, style, successes, trials, rate, ci_low, ci_high.
/// Components with no trials are omitted.
std::string metrics_to_csv(const Metrics& metrics);
std::string metrics_to_json(const Metrics& metrics);
Metrics metrics_from_json(std::string_view text);
std::string rows_to_jsonl(const std::vector<TrialRow>& rows);

/// Throws std::runtime_error when the destination cannot be written.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace chopsim
