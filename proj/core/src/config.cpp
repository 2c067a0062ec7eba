#include "chopsim/config.hpp"

#include <set>

#include <json.hpp>

namespace chopsim {

namespace {

using nlohmann::json;

json scene_json(const SceneGenConfig& c) {
    json classes = json::array();
    for (FoodClass f : c.classes) classes.push_back(std::string(to_string(f)));
    json fractions = json::array();
    for (SizeFraction f : c.size_fractions) fractions.push_back(f.value());
    return {{"n_objects_min", c.n_objects_min},
            {"n_objects_max", c.n_objects_max},
            {"classes", std::move(classes)},
            {"size_fractions", std::move(fractions)},
            {"min_gap_mm", c.min_gap},
            {"max_placement_attempts", c.max_placement_attempts},
            {"board", {{"width_mm", c.board.width}, {"height_mm", c.board.height}}}};
}

json perception_json(const PerceptionConfig& c) {
    return {{"p_detect", c.p_detect},         {"p_label", c.p_label},
            {"partials_min", c.partials_min}, {"partials_max", c.partials_max},
            {"stuck_gap_mm", c.stuck_gap_mm}, {"resolution_mm", c.resolution},
            {"bbox_margin_mm", c.bbox_margin_mm}};
}

json exec_json(const ExecConfig& c) {
    json p_cut = json::object();
    json p_stuck = json::object();
    for (FoodClass f : kAllClasses) {
        const std::string name(to_string(f));
        for (CutStyle s : kAllStyles) p_cut[name][std::string(to_string(s))] = c.cut_probability(f, s);
        p_stuck[name] = c.p_stuck_given_cut[index_of(f)];
    }
    return {{"p_cut", std::move(p_cut)},
            {"p_stuck_given_cut", std::move(p_stuck)},
            {"p_push", c.p_push},
            {"p_disturb", c.p_disturb},
            {"separation_mm", c.separation_mm},
            {"roll_distance_mm", {c.roll_min_mm, c.roll_max_mm}},
            {"push_clearance_mm", c.push_clearance_mm},
            {"push_step_mm", c.push_step_mm},
            {"push_max_steps", c.push_max_steps},
            {"stuck_gap_mm", c.stuck_gap_mm},
            {"keep_out_mm", c.keep_out_mm},
            {"resolution_mm", c.resolution}};
}

json planner_json(const PlannerConfig& c) {
    return {{"perception", perception_json(c.perception)},
            {"execution", exec_json(c.exec)},
            {"blade", {{"length_mm", c.blade.length}, {"width_mm", c.blade.width}}},
            {"planner", {{"iterations_per_target", c.iterations_per_target}}}};
}

// Reads known keys from one JSON object; anything else is an error.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown config key " + path_ + "." + key);
        }
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("bad value for " + path_ + "." + key);
        }
    }
    const json* child(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }
    std::string path(const std::string& key) const { return path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

FoodClass class_named(const std::string& name, const std::string& where) {
    const auto c = parse_food_class(name);
    if (!c) throw ConfigError("unknown class '" + name + "' in " + where);
    return *c;
}

void read_scene(const json& j, SceneGenConfig& c) {
    Section s(j, "scene");
    s.read("n_objects_min", c.n_objects_min);
    s.read("n_objects_max", c.n_objects_max);
    s.read("min_gap_mm", c.min_gap);
    s.read("max_placement_attempts", c.max_placement_attempts);
    if (const json* classes = s.child("classes")) {
        std::vector<std::string> names;
        try {
            names = classes->get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw ConfigError("scene.classes must be a list of names");
        }
        c.classes.clear();
        for (const auto& n : names) c.classes.push_back(class_named(n, "scene.classes"));
    }
    if (const json* fractions = s.child("size_fractions")) {
        std::vector<double> values;
        try {
            values = fractions->get<std::vector<double>>();
        } catch (const json::exception&) {
            throw ConfigError("scene.size_fractions must be a list of numbers");
        }
        c.size_fractions.clear();
        for (double v : values) {
            if (!(v > 0.0) || v > 1.0) throw ConfigError("size fractions must lie in (0, 1]");
            c.size_fractions.push_back({static_cast<std::uint32_t>(std::llround(1.0 / v))});
        }
    }
    if (const json* board = s.child("board")) {
        Section b(*board, s.path("board"));
        b.read("width_mm", c.board.width);
        b.read("height_mm", c.board.height);
        b.finish();
    }
    s.finish();
}

void read_perception(const json& j, PerceptionConfig& c) {
    Section s(j, "perception");
    s.read("p_detect", c.p_detect);
    s.read("p_label", c.p_label);
    s.read("partials_min", c.partials_min);
    s.read("partials_max", c.partials_max);
    s.read("stuck_gap_mm", c.stuck_gap_mm);
    s.read("resolution_mm", c.resolution);
    s.read("bbox_margin_mm", c.bbox_margin_mm);
    s.finish();
}

void read_exec(const json& j, ExecConfig& c) {
    Section s(j, "execution");
    if (const json* p_cut = s.child("p_cut")) {
        Section table(*p_cut, s.path("p_cut"));
        for (FoodClass f : kAllClasses) {
            const json* row = table.child(std::string(to_string(f)));
            if (row == nullptr) continue;
            Section r(*row, table.path(std::string(to_string(f))));
            for (CutStyle st : kAllStyles) {
                r.read(std::string(to_string(st)), c.p_cut[index_of(f)][static_cast<std::size_t>(st)]);
            }
            r.finish();
        }
        table.finish();
    }
    if (const json* p_stuck = s.child("p_stuck_given_cut")) {
        Section table(*p_stuck, s.path("p_stuck_given_cut"));
        for (FoodClass f : kAllClasses) table.read(std::string(to_string(f)), c.p_stuck_given_cut[index_of(f)]);
        table.finish();
    }
    s.read("p_push", c.p_push);
    s.read("p_disturb", c.p_disturb);
    s.read("separation_mm", c.separation_mm);
    if (const json* roll = s.child("roll_distance_mm")) {
        if (!roll->is_array() || roll->size() != 2 || !(*roll)[0].is_number() || !(*roll)[1].is_number()) {
            throw ConfigError("execution.roll_distance_mm must be [min, max]");
        }
        c.roll_min_mm = (*roll)[0].get<double>();
        c.roll_max_mm = (*roll)[1].get<double>();
    }
    s.read("push_clearance_mm", c.push_clearance_mm);
    s.read("push_step_mm", c.push_step_mm);
    s.read("push_max_steps", c.push_max_steps);
    s.read("stuck_gap_mm", c.stuck_gap_mm);
    s.read("keep_out_mm", c.keep_out_mm);
    s.read("resolution_mm", c.resolution);
    s.finish();
}

}  // namespace

std::string planner_config_to_json(const PlannerConfig& config) { return planner_json(config).dump(); }

std::string config_to_json(const SimConfig& config) {
    json j = planner_json(config.planner);
    j["scene"] = scene_json(config.scene);
    j["task_style"] = std::string(to_string(config.task_style));
    return j.dump(2) + "\n";
}

SimConfig config_from_json(std::string_view text, SimConfig base) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    {
        Section root(doc, "config");
        if (const json* j = root.child("scene")) read_scene(*j, base.scene);
        if (const json* j = root.child("perception")) read_perception(*j, base.planner.perception);
        if (const json* j = root.child("execution")) read_exec(*j, base.planner.exec);
        if (const json* j = root.child("blade")) {
            Section b(*j, "blade");
            b.read("length_mm", base.planner.blade.length);
            b.read("width_mm", base.planner.blade.width);
            b.finish();
        }
        if (const json* j = root.child("planner")) {
            Section p(*j, "planner");
            p.read("iterations_per_target", base.planner.iterations_per_target);
            p.finish();
        }
        std::string style(to_string(base.task_style));
        root.read("task_style", style);
        const auto parsed = parse_cut_style(style);
        if (!parsed) throw ConfigError("task_style must be 'even' or 'long'");
        base.task_style = *parsed;
        root.finish();
    }
    try {
        base.scene.validate();
        base.planner.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return base;
}

SimConfig make_perfect(SimConfig config) {
    config.planner = perfect_planner(config.planner);
    return config;
}

}  // namespace chopsim
