#include "chopsim/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "chopsim/config.hpp"

namespace chopsim {

int GoalSpec::total_target() const {
    int sum = 0;
    for (const GoalEntry& e : entries) sum += e.target_count;
    return sum;
}

GoalParseError::GoalParseError(std::size_t offset, const std::string& message)
    : std::invalid_argument(message + " at byte " + std::to_string(offset)), offset_(offset) {}

namespace {

class GoalCursor {
public:
    explicit GoalCursor(std::string_view text) : text_(text) {}

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool done() {
        skip_space();
        return pos_ >= text_.size();
    }
    std::size_t pos() const { return pos_; }

    std::string word() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) throw GoalParseError(start, "expected a name");
        return std::string(text_.substr(start, pos_ - start));
    }

    long number() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) throw GoalParseError(start, "expected a count");
        if (pos_ - start > 9) throw GoalParseError(start, "count too large");
        return std::stol(std::string(text_.substr(start, pos_ - start)));
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            throw GoalParseError(pos_, std::string("expected '") + c + "'");
        }
        ++pos_;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

GoalSpec parse_goal(std::string_view text) {
    GoalCursor cur(text);
    if (cur.done()) throw GoalParseError(0, "empty goal");
    GoalSpec goal;
    while (true) {
        cur.skip_space();
        const std::size_t class_at = cur.pos();
        const auto cls = parse_food_class(cur.word());
        if (!cls) throw GoalParseError(class_at, "unknown class");
        for (const GoalEntry& e : goal.entries) {
            if (e.food_class == *cls) throw GoalParseError(class_at, "duplicate class");
        }
        cur.expect('=');
        cur.skip_space();
        const std::size_t count_at = cur.pos();
        const long count = cur.number();
        if (count < 1) throw GoalParseError(count_at, "count must be at least 1");
        cur.expect(':');
        cur.skip_space();
        const std::size_t style_at = cur.pos();
        const auto style = parse_cut_style(cur.word());
        if (!style) throw GoalParseError(style_at, "unknown cut style");
        goal.entries.push_back({*cls, static_cast<int>(count), *style});
        if (cur.done()) break;
        cur.expect(';');
    }
    return goal;
}

std::string format_goal(const GoalSpec& goal) {
    std::string out;
    for (const GoalEntry& e : goal.entries) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(e.food_class)) + "=" + std::to_string(e.target_count) + ":" +
               std::string(to_string(e.style));
    }
    return out;
}

std::size_t select_target(const Observation& obs, FoodClass food_class) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < obs.objects.size(); ++k) {
        const FusedObject& o = obs.objects[k];
        if (o.label != food_class) continue;
        if (!best) {
            best = k;
            continue;
        }
        const FusedObject& b = obs.objects[*best];
        const bool larger = o.area > b.area;
        const bool tie_wins = o.area == b.area &&
                              (o.centroid.x < b.centroid.x ||
                               (o.centroid.x == b.centroid.x && o.centroid.y < b.centroid.y));
        if (larger || tie_wins) best = k;
    }
    if (!best) throw std::invalid_argument("no observed object of class " + std::string(to_string(food_class)));
    return *best;
}

CutPlanRecord plan_cut(const Observation& obs, std::size_t target, CutStyle style) {
    if (target >= obs.objects.size()) throw std::out_of_range("cut target index out of range");
    const FusedObject& o = obs.objects[target];
    const double axis = longest_diameter(o.mask).angle();
    const double angle = style == CutStyle::Even ? normalize_half_turn(axis + 0.5 * kPi) : axis;
    return {target, {o.centroid, angle}, style};
}

std::vector<std::size_t> check_collisions(const CutPlanRecord& plan, const Observation& obs,
                                          const BladeSpec& blade) {
    const OrientedRect footprint = blade_footprint(plan.pose, blade);
    std::vector<std::pair<std::size_t, std::size_t>> hits;  // (cells, index)
    for (std::size_t k = 0; k < obs.objects.size(); ++k) {
        if (k == plan.target) continue;
        const std::size_t cells = blade_overlap_cells(footprint, obs.objects[k].mask);
        if (cells > 0) hits.emplace_back(cells, k);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& l, const auto& r) {
        return l.first != r.first ? l.first > r.first : l.second < r.second;
    });
    std::vector<std::size_t> out;
    for (const auto& h : hits) out.push_back(h.second);
    return out;
}

void PlannerConfig::validate() const {
    perception.validate();
    exec.validate();
    blade.validate();
    if (iterations_per_target < 1) throw std::invalid_argument("iterations_per_target must be >= 1");
}

PlannerConfig perfect_planner(PlannerConfig base) {
    base.perception.p_detect = 1.0;
    base.perception.p_label = 1.0;
    base.exec = perfect_exec(base.exec);
    return base;
}

std::string_view event_name(const TraceEvent& e) {
    struct Namer {
        std::string_view operator()(const ObserveEvent&) const { return "observe"; }
        std::string_view operator()(const PlanCutEvent&) const { return "plan_cut"; }
        std::string_view operator()(const CollisionCheckEvent&) const { return "collision_check"; }
        std::string_view operator()(const PushEvent&) const { return "push"; }
        std::string_view operator()(const CutEvent&) const { return "cut"; }
        std::string_view operator()(const DisturbEvent&) const { return "disturb"; }
        std::string_view operator()(const TerminateEvent&) const { return "terminate"; }
    };
    return std::visit(Namer{}, e);
}

namespace {

Observation observe_and_log(EpisodeState& state, FoodClass food_class, int count,
                            const PlannerConfig& config, Rng& rng) {
    Observation obs = observe(state.scene, food_class, config.perception, rng);
    if (state.on_observe) state.on_observe(obs);
    ObserveEvent ev{food_class, count, obs.n_target(), {}};
    for (const FusedObject& o : obs.objects) ev.objects.push_back({o.label, o.centroid, o.area});
    state.trace.events.emplace_back(std::move(ev));
    return obs;
}

}  // namespace

bool run_class_loop(EpisodeState& state, FoodClass food_class, int target_count, CutStyle style,
                    const PlannerConfig& config, Rng& rng) {
    if (target_count < 1) throw std::invalid_argument("target count must be >= 1");
    Observation obs = observe_and_log(state, food_class, 0, config, rng);
    int n_obs = obs.n_target();
    if (n_obs == 0) {
        state.trace.events.emplace_back(TerminateEvent{"no-target"});
        return false;
    }
    int count = n_obs;
    std::get<ObserveEvent>(state.trace.events.back()).count = count;

    while (n_obs < target_count) {
        if (state.iterations >= state.max_iterations) {
            state.trace.events.emplace_back(TerminateEvent{"max-iterations"});
            return false;
        }
        ++state.iterations;

        if (count != n_obs) {
            const DisturbResult d = execute_disturb(state.scene, state.last_pose, config.exec, rng);
            state.scene = d.scene;
            state.trace.events.emplace_back(DisturbEvent{*state.last_pose, d.applied});
            obs = observe_and_log(state, food_class, count, config, rng);
            n_obs = obs.n_target();
            continue;
        }

        const std::size_t target = select_target(obs, food_class);
        const CutPlanRecord plan = plan_cut(obs, target, style);
        state.trace.events.emplace_back(PlanCutEvent{plan});
        const std::vector<std::size_t> colliders = check_collisions(plan, obs, config.blade);
        state.trace.events.emplace_back(CollisionCheckEvent{colliders});

        const OrientedRect footprint = blade_footprint(plan.pose, config.blade);
        for (std::size_t idx : colliders) {
            const auto target_id = object_at(state.scene, plan.pose.com);
            const auto other_id = object_at(state.scene, obs.objects[idx].centroid);
            if (!target_id || !other_id || *target_id == *other_id) {
                state.trace.events.emplace_back(PushEvent{idx, -1, false});
                continue;
            }
            const PushResult p = execute_push(state.scene, *other_id, *target_id, footprint, config.exec, rng);
            state.scene = p.scene;
            state.trace.events.emplace_back(PushEvent{idx, *other_id, p.cleared});
        }
        obs = observe_and_log(state, food_class, count, config, rng);
        n_obs = obs.n_target();

        // The loop assumes every cut produces one more piece.
        ++count;
        state.last_pose = plan.pose;
        CutEvent cut{plan.pose, -1, CutOutcome::Missed, count};
        if (const auto under = object_at(state.scene, plan.pose.com)) {
            const CutResult r = execute_cut(state.scene, *under, plan.pose, style, config.exec, rng);
            state.scene = r.scene;
            cut.object_id = *under;
            cut.outcome = r.outcome;
        }
        state.trace.events.emplace_back(cut);
        obs = observe_and_log(state, food_class, count, config, rng);
        n_obs = obs.n_target();
    }
    return true;
}

EpisodeResult run_episode(const Scene& scene, const GoalSpec& goal, const PlannerConfig& config,
                          std::uint64_t seed, std::function<void(const Observation&)> on_observe) {
    config.validate();
    if (goal.entries.empty()) throw std::invalid_argument("goal has no entries");
    Rng rng(seed);
    EpisodeState state;
    state.scene = scene;
    state.max_iterations = config.iterations_per_target * goal.total_target();
    state.trace.seed = seed;
    state.trace.config_digest = digest_hex(planner_config_to_json(config));
    state.on_observe = std::move(on_observe);

    bool success = true;
    for (const GoalEntry& e : goal.entries) {
        if (!run_class_loop(state, e.food_class, e.target_count, e.style, config, rng)) {
            success = false;
            break;
        }
    }
    if (success) state.trace.events.emplace_back(TerminateEvent{"goal-reached"});
    return {std::move(state.trace), std::move(state.scene), success, state.iterations};
}

std::string digest_hex(std::string_view text) {
    // FNV-1a, 64 bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace chopsim
