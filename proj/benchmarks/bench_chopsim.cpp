#include <benchmark/benchmark.h>

#include "chopsim/harness.hpp"

using namespace chopsim;

namespace {

Scene board(int objects) {
    std::vector<FoodClass> classes;
    for (int i = 0; i < objects; ++i) classes.push_back(i % 2 == 0 ? FoodClass::Apple : FoodClass::Cucumber);
    return generate_scene_with(classes, SceneGenConfig{}, 99);
}

}  // namespace

static void BM_Rasterize(benchmark::State& state) {
    const Polygon shape = shape_template(FoodClass::Cucumber).base_polygon.translated({200, 150});
    for (auto _ : state) benchmark::DoNotOptimize(rasterize(shape, 1.0));
}
BENCHMARK(BM_Rasterize);

static void BM_LongestDiameter(benchmark::State& state) {
    const RasterMask mask = rasterize(regular_polygon({200, 150}, static_cast<double>(state.range(0)), 64), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(longest_diameter(mask));
}
BENCHMARK(BM_LongestDiameter)->Arg(10)->Arg(40)->Arg(80);

static void BM_Observe(benchmark::State& state) {
    const Scene scene = board(static_cast<int>(state.range(0)));
    const PerceptionConfig config = three_class_perception();
    Rng rng(7);
    for (auto _ : state) benchmark::DoNotOptimize(observe(scene, FoodClass::Apple, config, rng));
}
BENCHMARK(BM_Observe)->Arg(2)->Arg(6);

static void BM_RunEpisode(benchmark::State& state) {
    const Scene scene = board(2);
    const GoalSpec goal = parse_goal("apple=4:even; cucumber=4:long");
    const PlannerConfig config;
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_episode(scene, goal, config, ++seed));
}
BENCHMARK(BM_RunEpisode)->Unit(benchmark::kMillisecond);

static void BM_SingleChopExperiment(benchmark::State& state) {
    ExperimentSpec spec;
    spec.family = ExperimentFamily::SingleChop;
    spec.trials = 60;
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(spec, 11));
}
BENCHMARK(BM_SingleChopExperiment)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
