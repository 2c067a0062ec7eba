#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chopsim/perception.hpp"
#include "chopsim/primitives.hpp"
#include "chopsim/scene.hpp"

namespace chopsim {

struct GoalEntry {
    FoodClass food_class = FoodClass::Apple;
    int target_count = 1;
    CutStyle style = CutStyle::Even;

    friend bool operator==(const GoalEntry&, const GoalEntry&) = default;
};

struct GoalSpec {
    std::vector<GoalEntry> entries;

    int total_target() const;
    friend bool operator==(const GoalSpec&, const GoalSpec&) = default;
};

class GoalParseError : public std::invalid_argument {
public:
    GoalParseError(std::size_t offset, const std::string& message);
    /// Byte offset into the goal text where parsing failed.
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Grammar: entries separated by ';', each `class=COUNT:style`.
/// Case-insensitive, whitespace ignored. Example: "apple=3:even; cucumber=4:long".
GoalSpec parse_goal(std::string_view text);
std::string format_goal(const GoalSpec& goal);

struct CutPlanRecord {
    std::size_t target = 0;  // index into Observation::objects
    CutPose pose;
    CutStyle style = CutStyle::Even;
};

/// Largest-area object of the class; ties go to the smaller centroid (x, then y).
std::size_t select_target(const Observation& obs, FoodClass food_class);

/// Even: blade perpendicular to the longest diameter. Long: parallel to it.
CutPlanRecord plan_cut(const Observation& obs, std::size_t target, CutStyle style);

/// Non-target objects the blade would touch, largest overlap first.
std::vector<std::size_t> check_collisions(const CutPlanRecord& plan, const Observation& obs,
                                          const BladeSpec& blade);

struct PlannerConfig {
    PerceptionConfig perception;
    ExecConfig exec;
    BladeSpec blade;
    /// Episode iteration budget is this factor times the summed target counts.
    int iterations_per_target = 8;

    void validate() const;
};

/// Calibrated defaults with every success probability forced to 1.
PlannerConfig perfect_planner(PlannerConfig base = {});

// Trace events. Each carries enough to replay the loop's branch decisions.
struct ObservedItem {
    FoodClass label;
    Point2 centroid;
    double area;
};
struct ObserveEvent {
    FoodClass food_class;
    int count;  // expected pieces at the time of the observe
    int n_obs;
    std::vector<ObservedItem> objects;
};
struct PlanCutEvent {
    CutPlanRecord record;
};
struct CollisionCheckEvent {
    std::vector<std::size_t> colliders;
};
struct PushEvent {
    std::size_t observed_index;
    int object_id;
    bool cleared;
};
struct CutEvent {
    CutPose pose;
    int object_id;  // -1 when nothing lay under the blade
    CutOutcome outcome;
    int count;  // expected pieces after the cut
};
struct DisturbEvent {
    CutPose pose;
    bool applied;
};
struct TerminateEvent {
    std::string reason;  // goal-reached | max-iterations | no-target
};

using TraceEvent = std::variant<ObserveEvent, PlanCutEvent, CollisionCheckEvent, PushEvent,
                                CutEvent, DisturbEvent, TerminateEvent>;

std::string_view event_name(const TraceEvent& e);

struct EpisodeTrace {
    std::uint64_t seed = 0;
    std::string config_digest;
    std::vector<TraceEvent> events;
};

/// JSON Lines: a header line with seed and config digest, then one event per line.
std::string trace_to_jsonl(const EpisodeTrace& trace);

/// Mutable state threaded through the class loops of one episode.
struct EpisodeState {
    Scene scene;
    int iterations = 0;
    int max_iterations = 0;
    std::optional<CutPose> last_pose;
    EpisodeTrace trace;
    std::function<void(const Observation&)> on_observe;
};

/// Observe / plan / push / cut / disturb loop for a single class. Returns
/// true once the observed count reaches `target_count`; on failure a
/// Terminate event is appended.
bool run_class_loop(EpisodeState& state, FoodClass food_class, int target_count, CutStyle style,
                    const PlannerConfig& config, Rng& rng);

struct EpisodeResult {
    EpisodeTrace trace;
    Scene final_scene;
    bool success = false;
    int iterations = 0;
};

EpisodeResult run_episode(const Scene& scene, const GoalSpec& goal, const PlannerConfig& config,
                          std::uint64_t seed,
                          std::function<void(const Observation&)> on_observe = {});

/// Stable hex digest of a config serialization.
std::string digest_hex(std::string_view text);

}  // namespace chopsim
