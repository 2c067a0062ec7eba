#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "chopsim/planner.hpp"

namespace chopsim {

namespace {

using nlohmann::json;

double r6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
}

json pose_json(const CutPose& p) { return {{"com", {r6(p.com.x), r6(p.com.y)}}, {"angle", r6(p.angle)}}; }

struct EventJson {
    json operator()(const ObserveEvent& e) const {
        json objs = json::array();
        for (const ObservedItem& o : e.objects) {
            objs.push_back({{"label", std::string(to_string(o.label))},
                            {"centroid", {r6(o.centroid.x), r6(o.centroid.y)}},
                            {"area", r6(o.area)}});
        }
        return {{"class", std::string(to_string(e.food_class))},
                {"count", e.count},
                {"n_obs", e.n_obs},
                {"objects", std::move(objs)}};
    }
    json operator()(const PlanCutEvent& e) const {
        return {{"target", e.record.target},
                {"pose", pose_json(e.record.pose)},
                {"style", std::string(to_string(e.record.style))}};
    }
    json operator()(const CollisionCheckEvent& e) const { return {{"colliders", e.colliders}}; }
    json operator()(const PushEvent& e) const {
        return {{"index", e.observed_index}, {"object_id", e.object_id}, {"cleared", e.cleared}};
    }
    json operator()(const CutEvent& e) const {
        return {{"pose", pose_json(e.pose)},
                {"object_id", e.object_id},
                {"outcome", std::string(to_string(e.outcome))},
                {"count", e.count}};
    }
    json operator()(const DisturbEvent& e) const {
        return {{"pose", pose_json(e.pose)}, {"applied", e.applied}};
    }
    json operator()(const TerminateEvent& e) const { return {{"reason", e.reason}}; }
};

}  // namespace

std::string trace_to_jsonl(const EpisodeTrace& trace) {
    std::string out = json{{"type", "header"}, {"seed", trace.seed}, {"config_digest", trace.config_digest}}.dump();
    out += '\n';
    for (std::size_t k = 0; k < trace.events.size(); ++k) {
        json line = std::visit(EventJson{}, trace.events[k]);
        line["event"] = std::string(event_name(trace.events[k]));
        line["step"] = k;
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace chopsim
