#include "chopsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace chopsim {

namespace {

constexpr double kPlanAngleTolerance = 15.0 * kPi / 180.0;
constexpr double kSegmentationIou = 0.8;

struct Record {
    std::string component;
    std::optional<FoodClass> food_class;
    std::optional<CutStyle> style;
    bool success;
};

struct TrialOutcome {
    std::vector<Record> records;
    TrialRow row;
};

double angle_gap(double a, double b) {
    const double d = std::fabs(normalize_half_turn(a) - normalize_half_turn(b));
    return std::min(d, kPi - d);
}

std::set<int> collider_ids(const std::vector<std::size_t>& colliders, const Observation& obs) {
    std::set<int> ids;
    for (std::size_t k : colliders) ids.insert(obs.objects[k].true_ids.begin(), obs.objects[k].true_ids.end());
    return ids;
}

std::optional<std::size_t> observed_index_of(const Observation& obs, int id) {
    for (std::size_t k = 0; k < obs.objects.size(); ++k) {
        const auto& ids = obs.objects[k].true_ids;
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) return k;
    }
    return std::nullopt;
}

constexpr int kSceneRedraws = 16;

// Scene for one trial. A layout that cannot be placed is redrawn from the
// next derived seed; the number of redraws is recorded on the row.
template <typename Generate>
Scene trial_scene(std::uint64_t child, TrialRow& row, Generate generate) {
    for (int attempt = 0;; ++attempt) {
        const std::uint64_t seed = attempt == 0 ? derive_seed(child, 0) : derive_seed(child, 100 + attempt);
        try {
            Scene scene = generate(seed);
            if (attempt > 0) row.counters.emplace_back("scene_redraws", attempt);
            return scene;
        } catch (const PlacementError&) {
            if (attempt + 1 >= kSceneRedraws) throw;
        }
    }
}

void counter(TrialRow& row, std::string name, std::int64_t value) { row.counters.emplace_back(std::move(name), value); }

// Single-cut episode on random clutter with every component scored against ground truth.
TrialOutcome component_trial(const ExperimentSpec& spec, std::uint64_t child) {
    const SimConfig& cfg = spec.config;
    const PlannerConfig& pc = cfg.planner;
    TrialOutcome out;
    auto rec = [&](std::string c, bool ok) { out.records.push_back({std::move(c), std::nullopt, std::nullopt, ok}); };

    Scene scene = trial_scene(child, out.row, [&](std::uint64_t s) { return generate_scene(cfg.scene, s); });
    Rng rng(derive_seed(child, 1));
    Rng pick(derive_seed(child, 2));

    const SceneObject& target_obj = scene.objects[static_cast<std::size_t>(
        uniform_int(pick, 0, static_cast<int>(scene.objects.size()) - 1))];
    const FoodClass target_class = target_obj.food_class;
    const int target_id = target_obj.id;
    const CutStyle style = kAllStyles[static_cast<std::size_t>(uniform_int(pick, 0, 1))];

    const Observation obs = observe(scene, target_class, pc.perception, rng);
    const Observation truth = observe_perfect(scene, target_class, pc.perception);

    int detected = 0;
    int segmented = 0;
    for (const SceneObject& o : scene.objects) {
        int hits = 0;
        for (const Detection& d : obs.detections) {
            if (d.label == o.food_class && d.true_ids == std::vector<int>{o.id}) ++hits;
        }
        const bool ok = hits == 1;
        rec("detection_object", ok);
        if (!ok) continue;
        ++detected;
        bool seg = false;
        if (const auto k = observed_index_of(obs, o.id)) {
            const RasterMask truth_mask = rasterize(o.shape, obs.objects[*k].mask.grid());
            seg = iou(obs.objects[*k].mask, truth_mask) >= kSegmentationIou;
        }
        rec("segmentation_object", seg);
        if (seg) ++segmented;
    }
    const int n = static_cast<int>(scene.objects.size());
    rec("detection_scene", detected == n);
    if (detected > 0) rec("segmentation_scene", segmented == detected);
    counter(out.row, "objects", n);
    counter(out.row, "detected", detected);
    counter(out.row, "segmented", segmented);

    bool episode_ok = false;
    const auto truth_idx = observed_index_of(truth, target_id);
    const auto obs_idx = observed_index_of(obs, target_id);
    if (truth_idx && obs_idx) {
        const CutPlanRecord truth_plan = plan_cut(truth, *truth_idx, style);
        const CutPlanRecord plan = plan_cut(obs, *obs_idx, style);
        const bool crosses = split_polygon(target_obj.shape, {plan.pose.com, plan.pose.angle}).size() >= 2;
        rec("cut_planning", crosses && angle_gap(plan.pose.angle, truth_plan.pose.angle) <= kPlanAngleTolerance);

        const auto colliders = check_collisions(plan, obs, pc.blade);
        const auto truth_colliders = check_collisions(truth_plan, truth, pc.blade);
        rec("collision_prediction", collider_ids(colliders, obs) == collider_ids(truth_colliders, truth));

        const OrientedRect footprint = blade_footprint(plan.pose, pc.blade);
        for (std::size_t k : colliders) {
            const auto other = object_at(scene, obs.objects[k].centroid);
            if (!other || *other == target_id) continue;
            const PushResult p = execute_push(scene, *other, target_id, footprint, pc.exec, rng);
            scene = p.scene;
            rec("push_execution", p.cleared);
        }

        const auto under = object_at(scene, plan.pose.com);
        if (under) {
            const FoodClass under_class = scene.at(*under).food_class;
            const CutResult cut = execute_cut(scene, *under, plan.pose, style, pc.exec, rng);
            scene = cut.scene;
            const bool separated = cut.outcome == CutOutcome::Clean || cut.outcome == CutOutcome::Stuck;
            out.records.push_back({"cut_execution", under_class, style, separated});
            episode_ok = cut.outcome == CutOutcome::Clean;
            if (cut.outcome == CutOutcome::Stuck) {
                const DisturbResult d = execute_disturb(scene, plan.pose, pc.exec, rng);
                scene = d.scene;
                const bool freed = stuck_pairs_near(scene, plan.pose.com, pc.exec.stuck_gap_mm).empty();
                rec("disturb", freed);
                episode_ok = freed;
            }
        }
    }
    rec("episode", episode_ok);
    out.row.success = episode_ok;
    out.row.task = std::string(to_string(target_class)) + ":" + std::string(to_string(style));
    return out;
}

// One cut on a single centered object; cells cycle through (class, style).
TrialOutcome single_chop_trial(const ExperimentSpec& spec, int index, std::uint64_t child) {
    const SimConfig& cfg = spec.config;
    const int cell = index % 6;
    const FoodClass cls = kAllClasses[static_cast<std::size_t>(cell / 2)];
    const CutStyle style = kAllStyles[static_cast<std::size_t>(cell % 2)];

    Rng shape_rng(derive_seed(child, 0));
    const auto& fractions = cfg.scene.size_fractions;
    const SizeFraction fraction =
        fractions[static_cast<std::size_t>(uniform_int(shape_rng, 0, static_cast<int>(fractions.size()) - 1))];
    const double rotation = uniform(shape_rng, 0.0, 2.0 * kPi);
    Polygon shape = slice_shape(shape_template(cls), fraction, shape_rng);
    const Point2 center{0.5 * cfg.scene.board.width, 0.5 * cfg.scene.board.height};
    shape = shape.translated(center - shape.centroid()).rotated(rotation, center);

    Scene scene;
    scene.board = cfg.scene.board;
    scene.objects.push_back({1, cls, fraction, std::move(shape), std::nullopt});
    scene.next_id = 2;

    Rng rng(derive_seed(child, 1));
    const Observation obs = observe_perfect(scene, cls, spec.config.planner.perception);
    const CutPlanRecord plan = plan_cut(obs, select_target(obs, cls), style);
    const CutResult r = execute_cut(scene, 1, plan.pose, style, spec.config.planner.exec, rng);
    const bool ok = r.outcome == CutOutcome::Clean || r.outcome == CutOutcome::Stuck;

    TrialOutcome out;
    out.records.push_back({"chop", cls, style, ok});
    out.records.push_back({"episode", std::nullopt, std::nullopt, ok});
    out.row.success = ok;
    out.row.task = std::string(to_string(cls)) + ":" + std::string(to_string(style));
    counter(out.row, "pieces", static_cast<std::int64_t>(r.piece_ids.size()));
    return out;
}

TrialOutcome multi_object_trial(const ExperimentSpec& spec, const std::vector<TaskSpec>& tasks, int index,
                                std::uint64_t child) {
    const TaskSpec& task = tasks[static_cast<std::size_t>(index) % tasks.size()];
    TrialOutcome out;
    const Scene scene = trial_scene(
        child, out.row, [&](std::uint64_t s) { return generate_scene_with(task.initial, spec.config.scene, s); });
    EpisodeResult r = run_episode(scene, task.goal, spec.config.planner, derive_seed(child, 1));

    auto rec = [&](std::string c, bool ok) { out.records.push_back({std::move(c), std::nullopt, std::nullopt, ok}); };
    rec("episode", r.success);
    rec("task_" + task.name, r.success);
    int cuts = 0;
    int disturbs = 0;
    int pushes = 0;
    for (const TraceEvent& e : r.trace.events) {
        if (const auto* c = std::get_if<CutEvent>(&e)) {
            if (c->object_id < 0) continue;
            ++cuts;
            rec("cut_execution", c->outcome == CutOutcome::Clean || c->outcome == CutOutcome::Stuck);
        } else if (const auto* p = std::get_if<PushEvent>(&e)) {
            if (p->object_id < 0) continue;
            ++pushes;
            rec("push_execution", p->cleared);
        } else if (const auto* d = std::get_if<DisturbEvent>(&e)) {
            ++disturbs;
            rec("disturb", d->applied);
        }
    }
    out.row.success = r.success;
    out.row.task = task.name;
    out.row.iterations = r.iterations;
    counter(out.row, "cuts", cuts);
    counter(out.row, "pushes", pushes);
    counter(out.row, "disturbs", disturbs);
    for (const GoalEntry& g : task.goal.entries) {
        counter(out.row, "final_" + std::string(to_string(g.food_class)),
                static_cast<std::int64_t>(r.final_scene.count(g.food_class)));
    }
    if (spec.keep_traces) out.row.trace = std::move(r.trace);
    return out;
}

}  // namespace

std::string_view to_string(ExperimentFamily f) {
    switch (f) {
        case ExperimentFamily::ComponentEval: return "exp1";
        case ExperimentFamily::SingleChop: return "exp2";
        case ExperimentFamily::MultiObject: return "exp3";
    }
    return "exp1";
}

std::optional<ExperimentFamily> parse_family(std::string_view name) {
    if (name == "exp1") return ExperimentFamily::ComponentEval;
    if (name == "exp2") return ExperimentFamily::SingleChop;
    if (name == "exp3") return ExperimentFamily::MultiObject;
    return std::nullopt;
}

std::vector<TaskSpec> multi_object_tasks(CutStyle style) {
    struct Row {
        int apples, cucumbers, apple_target, cucumber_target;
    };
    static constexpr Row kRows[] = {{4, 2, 8, 3}, {2, 2, 3, 4}, {1, 2, 3, 4}, {3, 0, 8, 0}, {0, 4, 0, 8},
                                    {0, 5, 0, 8}, {2, 1, 4, 3}, {0, 5, 0, 7}, {2, 0, 6, 0}, {2, 0, 7, 0}};
    std::vector<TaskSpec> tasks;
    int n = 0;
    for (const Row& r : kRows) {
        TaskSpec t;
        t.name = std::to_string(++n);
        t.initial.assign(static_cast<std::size_t>(r.apples), FoodClass::Apple);
        t.initial.insert(t.initial.end(), static_cast<std::size_t>(r.cucumbers), FoodClass::Cucumber);
        if (r.apple_target > 0) t.goal.entries.push_back({FoodClass::Apple, r.apple_target, style});
        if (r.cucumber_target > 0) t.goal.entries.push_back({FoodClass::Cucumber, r.cucumber_target, style});
        tasks.push_back(std::move(t));
    }
    return tasks;
}

const Tally* Metrics::find(std::string_view component, std::optional<FoodClass> c,
                           std::optional<CutStyle> s) const {
    for (const Tally& t : tallies) {
        if (t.component == component && t.food_class == c && t.style == s) return &t;
    }
    return nullptr;
}

Tally& Metrics::at(std::string_view component, std::optional<FoodClass> c, std::optional<CutStyle> s) {
    for (Tally& t : tallies) {
        if (t.component == component && t.food_class == c && t.style == s) return t;
    }
    tallies.push_back({std::string(component), c, s, 0, 0});
    return tallies.back();
}

void Metrics::record(std::string_view component, bool success, std::optional<FoodClass> c,
                     std::optional<CutStyle> s) {
    Tally& t = at(component, c, s);
    ++t.trials;
    if (success) ++t.successes;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::uint64_t seed) {
    if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
    spec.config.scene.validate();
    spec.config.planner.validate();
    const std::vector<TaskSpec> tasks =
        spec.tasks.empty() ? multi_object_tasks(spec.config.task_style) : spec.tasks;

    const auto start = std::chrono::steady_clock::now();
    const auto n = static_cast<std::size_t>(spec.trials);
    std::vector<TrialOutcome> outcomes(n);
    auto run_one = [&](std::size_t i) {
        const std::uint64_t child = derive_seed(seed, i);
        const int index = static_cast<int>(i);
        TrialOutcome o;
        switch (spec.family) {
            case ExperimentFamily::ComponentEval: o = component_trial(spec, child); break;
            case ExperimentFamily::SingleChop: o = single_chop_trial(spec, index, child); break;
            case ExperimentFamily::MultiObject: o = multi_object_trial(spec, tasks, index, child); break;
        }
        o.row.index = index;
        o.row.seed = child;
        outcomes[i] = std::move(o);
    };

    const int jobs = std::clamp(spec.jobs, 1, spec.trials);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        run_one(i);
                    } catch (...) {
                        const std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& t : workers) t.join();
        if (error) std::rethrow_exception(error);
    }

    ExperimentResult result;
    Metrics& m = result.metrics;
    m.experiment = std::string(to_string(spec.family));
    if (spec.family == ExperimentFamily::SingleChop) {
        for (FoodClass c : kAllClasses) {
            for (CutStyle s : kAllStyles) m.at("chop", c, s);
        }
    }
    for (TrialOutcome& o : outcomes) {
        ++m.trials;
        if (o.row.success) ++m.episode_successes;
        for (const Record& r : o.records) m.record(r.component, r.success, r.food_class, r.style);
        result.rows.push_back(std::move(o.row));
    }
    m.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace chopsim
