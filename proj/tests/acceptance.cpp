// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "chopsim/config.hpp"
#include "chopsim/harness.hpp"
#include "chopsim/perception.hpp"
#include "chopsim/planner.hpp"
#include "loop_oracle.hpp"
#include "oracles.hpp"

using namespace chopsim;

namespace {

constexpr std::uint64_t kSeed = 20261019;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// C1: exact diameter, area conservation and blade overlap against oracles.
Verdict geometry_oracles() {
    Rng rng(derive_seed(kSeed, 1));
    int diam_ok = 0;
    for (int k = 0; k < 100; ++k) {
        const RasterMask m = oracle::random_blob(rng);
        const Chord c = longest_diameter(m);
        const auto ref = oracle::brute_force_diameter(m);
        diam_ok += c.length == std::sqrt(static_cast<double>(ref.d2)) * m.resolution() &&
                   c.a == m.cell_center(ref.ai, ref.aj) && c.b == m.cell_center(ref.bi, ref.bj);
    }
    int split_ok = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Polygon p = oracle::random_convex_polygon(rng);
        const Point2 c = p.centroid();
        const Point2 through{c.x + uniform(rng, -3, 3), c.y + uniform(rng, -3, 3)};
        const auto pieces = split_polygon(p, {p.contains(through) ? through : c, uniform(rng, 0, kPi)});
        double sum = 0.0;
        for (const Polygon& q : pieces) sum += oracle::shoelace_area(q.vertices());
        const double area = oracle::shoelace_area(p.vertices());
        const double rel = std::fabs(sum - area) / area;
        worst = std::max(worst, rel);
        split_ok += pieces.size() == 2 && rel <= 1e-9;
    }
    int blade_ok = 0;
    for (int k = 0; k < 500; ++k) {
        const RasterMask m = oracle::random_blob(rng);
        const OrientedRect blade({uniform(rng, 0, 200), uniform(rng, 0, 200)}, uniform(rng, 20, 200),
                                 uniform(rng, 1, 10), uniform(rng, 0, kPi));
        blade_ok += blade_overlap(blade, m) == oracle::fine_raster_overlap(blade, m);
    }
    return {diam_ok == 100 && split_ok == 1000 && blade_ok == 500,
            fmt("diameter %d/100 exact, split %d/1000 (worst rel %.1e), blade %d/500", diam_ok, split_ok, worst,
                blade_ok)};
}

// C2: perfect configuration, random scenes and goals, exact final counts.
Verdict noiseless_end_to_end() {
    SimConfig cfg = make_perfect(SimConfig{});
    cfg.scene.classes = {kAllClasses.begin(), kAllClasses.end()};
    int successes = 0, exact = 0, trace_ok = 0;
    std::string first_problem;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const std::uint64_t child = derive_seed(derive_seed(kSeed, 2), t);
        Scene scene;
        for (std::uint64_t attempt = 0;; ++attempt) {
            try {
                scene = generate_scene(cfg.scene, derive_seed(child, attempt));
                break;
            } catch (const PlacementError&) {
            }
        }
        Rng rng(derive_seed(child, 1000));
        GoalSpec goal;
        int budget = 12;
        for (FoodClass c : kAllClasses) {
            const int have = static_cast<int>(scene.count(c));
            if (have == 0 || budget < have) continue;
            if (!goal.entries.empty() && !bernoulli(rng, 0.6)) continue;
            const int target = uniform_int(rng, have, std::min(budget, have + 4));
            budget -= target;
            goal.entries.push_back({c, target, bernoulli(rng, 0.5) ? CutStyle::Even : CutStyle::Long});
        }
        const EpisodeResult r = run_episode(scene, goal, cfg.planner, derive_seed(child, 1));
        successes += r.success;
        bool all_exact = true;
        for (const GoalEntry& e : goal.entries) {
            all_exact &= static_cast<int>(r.final_scene.count(e.food_class)) == e.target_count;
        }
        exact += all_exact;
        const auto check = oracle::check_loop_trace(r.trace, goal, cfg.planner.iterations_per_target);
        trace_ok += check.ok();
        if ((!r.success || !all_exact || !check.ok()) && first_problem.empty()) {
            first_problem = fmt("; first problem trial %d goal '%s' %s", static_cast<int>(t),
                                format_goal(goal).c_str(), check.error.c_str());
        }
    }
    return {successes == 100 && exact == 100 && trace_ok == 100,
            fmt("success %d/100, exact counts %d/100, loop traces %d/100%s", successes, exact, trace_ok,
                first_problem.c_str())};
}

// C3: single-chop cells against the calibration table.
Verdict single_chop_table() {
    ExperimentSpec spec;
    spec.family = ExperimentFamily::SingleChop;
    spec.trials = 6000;
    const Metrics m = run_experiment(spec, derive_seed(kSeed, 3)).metrics;
    const double table[3][2] = {{100, 100}, {100, 80}, {80, 40}};
    bool ok = true;
    std::string cells;
    for (FoodClass c : kAllClasses) {
        for (CutStyle s : kAllStyles) {
            const Tally* t = m.find("chop", c, s);
            const double pct = t ? 100.0 * t->rate() : -1.0;
            const double want = table[index_of(c)][static_cast<std::size_t>(s)];
            const bool cell_ok = t && t->trials == 1000 && std::fabs(pct - want) <= 3.0;
            ok &= cell_ok;
            cells += fmt("%s%s/%s %.1f (%g)", cells.empty() ? "" : ", ", std::string(to_string(c)).c_str(),
                         std::string(to_string(s)).c_str(), pct, want);
        }
    }
    return {ok, cells};
}

Scene two_piece_stuck_scene() {
    Scene s;
    s.objects.push_back({1, FoodClass::Apple, {2}, Polygon({{180, 130}, {200, 130}, {200, 170}, {180, 170}}), std::nullopt});
    s.objects.push_back({2, FoodClass::Apple, {2}, Polygon({{200, 130}, {220, 130}, {220, 170}, {200, 170}}), std::nullopt});
    s.next_id = 3;
    return s;
}

// C4: object-level perception rates plus disturb and push executors.
Verdict component_calibration() {
    ExperimentSpec spec;
    spec.family = ExperimentFamily::ComponentEval;
    spec.trials = 1850;
    const Metrics m = run_experiment(spec, derive_seed(kSeed, 4)).metrics;
    const Tally* det = m.find("detection_object");
    const Tally* seg = m.find("segmentation_object");
    const bool enough = det && det->trials >= 10000;
    const double det_pct = det ? 100.0 * det->rate() : -1.0;
    const double seg_pct = seg ? 100.0 * seg->rate() : -1.0;

    const ExecConfig exec;
    Rng rng(derive_seed(kSeed, 40));
    int separated = 0;
    for (int k = 0; k < 1000; ++k) {
        const DisturbResult r = execute_disturb(two_piece_stuck_scene(), CutPose{{200, 150}, kPi / 2}, exec, rng);
        separated += polygon_distance(r.scene.at(1).shape, r.scene.at(2).shape) > exec.stuck_gap_mm;
    }
    Scene push_scene;
    push_scene.objects.push_back({1, FoodClass::Apple, {1}, regular_polygon({150, 150}, 30, 48), std::nullopt});
    push_scene.objects.push_back({2, FoodClass::Cucumber, {1}, rectangle({215, 150}, 30, 30), std::nullopt});
    push_scene.next_id = 3;
    const OrientedRect footprint({150, 150}, 200, 5, 0.0);
    int cleared = 0;
    for (int k = 0; k < 1000; ++k) cleared += execute_push(push_scene, 2, 1, footprint, exec, rng).cleared;
    const double dist_pct = separated / 10.0, push_pct = cleared / 10.0;

    const bool ok = enough && std::fabs(det_pct - 93.4) <= 1.0 && std::fabs(seg_pct - 97.5) <= 1.0 &&
                    std::fabs(dist_pct - 66.7) <= 3.0 && std::fabs(push_pct - 69.2) <= 3.0;
    return {ok, fmt("detection %.2f%% of %llu objects (93.4), segmentation %.2f%% (97.5), disturb %.1f%% (66.7), "
                    "push %.1f%% (69.2)",
                    det_pct, static_cast<unsigned long long>(det ? det->trials : 0), seg_pct, dist_pct, push_pct)};
}

bool has_recovery_pattern(const EpisodeTrace& t) {
    for (std::size_t k = 0; k + 3 < t.events.size(); ++k) {
        const auto* cut = std::get_if<CutEvent>(&t.events[k]);
        const auto* under = std::get_if<ObserveEvent>(&t.events[k + 1]);
        const auto* dist = std::get_if<DisturbEvent>(&t.events[k + 2]);
        const auto* fixed = std::get_if<ObserveEvent>(&t.events[k + 3]);
        if (cut && under && dist && fixed && cut->outcome == CutOutcome::Stuck && under->n_obs < under->count &&
            fixed->n_obs == fixed->count) {
            return true;
        }
    }
    return false;
}

// C5: task suite success band, disturb ablation and a traced recovery.
Verdict task_suite() {
    ExperimentSpec spec;
    spec.family = ExperimentFamily::MultiObject;
    spec.trials = 5000;
    spec.keep_traces = true;
    const std::uint64_t seed = derive_seed(kSeed, 5);
    const ExperimentResult with = run_experiment(spec, seed);
    const double rate = 100.0 * static_cast<double>(with.metrics.episode_successes) / spec.trials;

    int recoveries = 0;
    std::string example;
    for (const TrialRow& row : with.rows) {
        if (row.trace && has_recovery_pattern(*row.trace)) {
            if (example.empty()) example = fmt(" (first: trial %d, task %s)", row.index, row.task.c_str());
            ++recoveries;
        }
    }

    spec.keep_traces = false;
    spec.config.planner.exec.p_disturb = 0.0;
    const bool stuck_possible = spec.config.planner.exec.p_stuck_given_cut[index_of(FoodClass::Apple)] > 0.0;
    const ExperimentResult without = run_experiment(spec, seed);
    const double rate_off = 100.0 * static_cast<double>(without.metrics.episode_successes) / spec.trials;

    std::string tasks;
    for (int k = 1; k <= 10; ++k) {
        const Tally* t = with.metrics.find("task_" + std::to_string(k));
        tasks += fmt("%s%d", tasks.empty() ? "" : " ", t ? static_cast<int>(std::lround(100.0 * t->rate())) : -1);
    }
    const bool ok = rate >= 55.0 && rate <= 85.0 && stuck_possible && rate_off < rate && recoveries > 0;
    return {ok, fmt("(a) %.1f%% over 5000 [55, 85], per task %s; (b) disturb off %.1f%% < %.1f%%; "
                    "(c) recovery pattern in %d traces%s",
                    rate, tasks.c_str(), rate_off, rate, recoveries, example.c_str())};
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(CHOPSIM_EXE) + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// C6: two CLI runs give byte-identical reports.
Verdict cli_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "chopsim_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::string outs[2][3];
    bool exits_ok = true;
    for (int run = 0; run < 2; ++run) {
        const auto base = dir / std::to_string(run);
        exits_ok &= run_cli("experiment --family exp3 --trials 50 --seed 7 --out " + (base.string() + ".csv") +
                            " --json " + (base.string() + ".json") + " --rows " + (base.string() + ".jsonl")) == 0;
        outs[run][0] = slurp(base.string() + ".csv");
        outs[run][1] = slurp(base.string() + ".json");
        outs[run][2] = slurp(base.string() + ".jsonl");
    }
    std::filesystem::remove_all(dir);
    const bool same = outs[0][0] == outs[1][0] && outs[0][1] == outs[1][1] && outs[0][2] == outs[1][2];
    const bool nonempty = !outs[0][0].empty() && !outs[0][2].empty();
    return {exits_ok && same && nonempty,
            fmt("csv %zu bytes, json %zu bytes, jsonl %zu bytes, identical: %s", outs[0][0].size(),
                outs[0][1].size(), outs[0][2].size(), same ? "yes" : "no")};
}

// C7: scripted stuck cut with a collider; the branch structure must match exactly.
Verdict loop_fidelity() {
    PlannerConfig pc = perfect_planner();
    pc.exec.p_stuck_given_cut = {0.0, 1.0, 0.0};
    Scene s;
    s.objects.push_back({1, FoodClass::Cucumber, {1},
                         shape_template(FoodClass::Cucumber).base_polygon.translated({200, 150}), std::nullopt});
    s.objects.push_back({2, FoodClass::Apple, {1}, regular_polygon({200, 215}, 20, 48), std::nullopt});
    s.next_id = 3;
    const GoalSpec goal = parse_goal("cucumber=2:even");
    const EpisodeResult r = run_episode(s, goal, pc, derive_seed(kSeed, 7));

    std::string names;
    for (const TraceEvent& e : r.trace.events) names += std::string(names.empty() ? "" : ",") + std::string(event_name(e));
    const std::string expected =
        "observe,plan_cut,collision_check,push,observe,cut,observe,disturb,observe,terminate";
    bool scripted = r.success && names == expected;
    if (scripted) {
        const auto& cc = std::get<CollisionCheckEvent>(r.trace.events[2]);
        const auto& push = std::get<PushEvent>(r.trace.events[3]);
        const auto& cut = std::get<CutEvent>(r.trace.events[5]);
        const auto& under = std::get<ObserveEvent>(r.trace.events[6]);
        const auto& fixed = std::get<ObserveEvent>(r.trace.events[8]);
        scripted = cc.colliders.size() == 1 && push.observed_index == cc.colliders[0] && push.object_id == 2 &&
                   cut.outcome == CutOutcome::Stuck && under.n_obs == 1 && under.count == 2 && fixed.n_obs == 2;
    }
    const auto scripted_check = oracle::check_loop_trace(r.trace, goal);

    // The same structure must hold on calibrated episodes.
    ExperimentSpec spec;
    spec.family = ExperimentFamily::MultiObject;
    spec.trials = 200;
    spec.keep_traces = true;
    const ExperimentResult ex = run_experiment(spec, derive_seed(kSeed, 70));
    const auto tasks = multi_object_tasks(spec.config.task_style);
    int conform = 0, disturbs = 0, pushes = 0;
    std::string first_error;
    for (const TrialRow& row : ex.rows) {
        const auto check = oracle::check_loop_trace(*row.trace, tasks[static_cast<std::size_t>(row.index % 10)].goal);
        conform += check.ok() && check.success == row.success;
        disturbs += check.disturbs;
        pushes += check.pushes;
        if (!check.ok() && first_error.empty()) first_error = " first error: " + check.error;
    }
    return {scripted && scripted_check.ok() && conform == 200,
            fmt("scripted trace %s [%s]; calibrated traces conform %d/200 (%d disturbs, %d pushes)%s",
                scripted ? "matches" : "differs", names.c_str(), conform, disturbs, pushes, first_error.c_str())};
}

// C8: perfect-classifier fusion rebuilds the blob exactly.
Verdict fusion_exactness() {
    PerceptionConfig pc;
    pc.p_label = 1.0;
    pc.partials_min = 1;
    pc.partials_max = 8;
    Rng rng(derive_seed(kSeed, 8));
    int exact = 0;
    double worst = 1.0;
    for (int k = 0; k < 200; ++k) {
        const RasterMask blob = oracle::random_blob(rng);
        const auto parts = oversegment(blob, pc, rng);
        std::vector<std::optional<FoodClass>> labels;
        for (const PartialMask& p : parts) labels.push_back(classify_partial(p, FoodClass::Carrot, pc, rng));
        const auto fused = fuse_masks(parts, labels, FoodClass::Carrot);
        const double v = fused ? iou(*fused, blob) : 0.0;
        worst = std::min(worst, v);
        exact += v == 1.0;
    }
    return {exact == 200, fmt("IoU 1.0 in %d/200, worst %.6f", exact, worst)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limit_s;  // <= 0 when the criterion has no runtime bound
        std::function<Verdict()> run;
    };
    const Criterion criteria[] = {
        {"C1 geometry oracles", 10.0, geometry_oracles},
        {"C2 noiseless end-to-end", 30.0, noiseless_end_to_end},
        {"C3 single-chop table", 60.0, single_chop_table},
        {"C4 component calibration", 0.0, component_calibration},
        {"C5 multi-object tasks", 0.0, task_suite},
        {"C6 CLI determinism", 0.0, cli_determinism},
        {"C7 loop fidelity", 0.0, loop_fidelity},
        {"C8 fusion exactness", 0.0, fusion_exactness},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.2f s", secs);
        if (c.limit_s > 0.0) {
            timing += fmt(" < %.0f s", c.limit_s);
            if (secs >= c.limit_s) {
                v.pass = false;
                timing += " EXCEEDED";
            }
        }
        failures += !v.pass;
        std::printf("%s %s: %s [%s]\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
