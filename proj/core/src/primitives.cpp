#include "chopsim/primitives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chopsim {

std::string_view to_string(CutStyle s) { return s == CutStyle::Even ? "even" : "long"; }

std::optional<CutStyle> parse_cut_style(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "even") return CutStyle::Even;
    if (lower == "long") return CutStyle::Long;
    return std::nullopt;
}

std::string_view to_string(CutOutcome o) {
    switch (o) {
        case CutOutcome::Clean: return "clean";
        case CutOutcome::Stuck: return "stuck";
        case CutOutcome::Rolled: return "rolled";
        case CutOutcome::Missed: return "missed";
    }
    return "unknown";
}

void BladeSpec::validate() const {
    if (!(length > 0.0) || !(width > 0.0)) throw std::invalid_argument("blade dimensions must be positive");
}

OrientedRect blade_footprint(const CutPose& pose, const BladeSpec& blade) {
    return OrientedRect(pose.com, blade.length, blade.width, pose.angle);
}

void ExecConfig::validate() const {
    auto prob = [](double p, const std::string& name) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(name + " must be in [0, 1]");
    };
    for (const auto& row : p_cut) {
        for (double p : row) prob(p, "p_cut");
    }
    for (double p : p_stuck_given_cut) prob(p, "p_stuck_given_cut");
    prob(p_push, "p_push");
    prob(p_disturb, "p_disturb");
    if (!(separation_mm > 0.0)) throw std::invalid_argument("separation_mm must be positive");
    if (!(roll_min_mm >= 0.0) || roll_max_mm < roll_min_mm) throw std::invalid_argument("bad roll distance range");
    if (!(push_clearance_mm >= 0.0)) throw std::invalid_argument("push_clearance_mm must be >= 0");
    if (!(push_step_mm > 0.0) || push_max_steps < 1) throw std::invalid_argument("bad push stepping");
    if (!(stuck_gap_mm >= 0.0)) throw std::invalid_argument("stuck_gap_mm must be >= 0");
    if (!(keep_out_mm >= 0.0)) throw std::invalid_argument("keep_out_mm must be >= 0");
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
}

ExecConfig perfect_exec(ExecConfig base) {
    for (auto& row : base.p_cut) row.fill(1.0);
    base.p_stuck_given_cut.fill(0.0);
    base.p_push = 1.0;
    base.p_disturb = 1.0;
    return base;
}

namespace {

Point2 unit_normal(double angle) { return {-std::sin(angle), std::cos(angle)}; }

double side_of(Point2 p, const CutPose& pose) {
    return dot(p - pose.com, unit_normal(pose.angle)) >= 0.0 ? 1.0 : -1.0;
}

// Direction of the farthest vertex pair.
Point2 long_axis(const Polygon& shape) {
    const auto& v = shape.vertices();
    double best = -1.0;
    Point2 axis{1.0, 0.0};
    for (std::size_t a = 0; a < v.size(); ++a) {
        for (std::size_t b = a + 1; b < v.size(); ++b) {
            const double d = distance(v[a], v[b]);
            if (d > best) {
                best = d;
                axis = (v[b] - v[a]) * (1.0 / d);
            }
        }
    }
    return axis;
}

// Slides `id` by `delta`; neighbors in the way are shoved along first,
// chaining up to `depth` objects deep.
double shove_object(Scene& scene, int id, Point2 delta, double keep_out, int depth) {
    const double t = slide_object(scene, id, delta, keep_out);
    if (t >= 1.0 - 1e-9 || depth == 0) return t;
    const Point2 rest = delta * (1.0 - t);
    const Polygon mover = scene.at(id).shape;
    const Point2 from = mover.centroid();
    std::vector<int> blockers;
    for (const SceneObject& o : scene.objects) {
        if (o.id == id || dot(o.shape.centroid() - from, rest) <= 0.0) continue;
        if (polygon_distance(mover, o.shape) <= keep_out + 1e-6) blockers.push_back(o.id);
    }
    if (blockers.empty()) return t;
    for (int b : blockers) shove_object(scene, b, rest, keep_out, depth - 1);
    return t + (1.0 - t) * slide_object(scene, id, rest, keep_out);
}

// Moves a and b apart by `total` in all. Each takes half; when one is pinned
// by a neighbor or the barrier, the other takes up the shortfall.
void separate_pair(Scene& scene, int a, Point2 dir_a, int b, Point2 dir_b, double total, double keep_out) {
    constexpr int kShoveDepth = 3;
    const double moved_a = 0.5 * total * shove_object(scene, a, dir_a * (0.5 * total), keep_out, kShoveDepth);
    const double want_b = total - moved_a;
    const double moved_b = want_b * shove_object(scene, b, dir_b * want_b, keep_out, kShoveDepth);
    const double left = total - moved_a - moved_b;
    if (left > 1e-9) shove_object(scene, a, dir_a * left, keep_out, kShoveDepth);
}

double point_distance(const Polygon& shape, Point2 p) {
    if (shape.contains(p)) return 0.0;
    const auto& v = shape.vertices();
    double best = distance_to_segment(p, v.back(), v.front());
    for (std::size_t k = 0; k + 1 < v.size(); ++k) best = std::min(best, distance_to_segment(p, v[k], v[k + 1]));
    return best;
}

bool clears(const Scene& scene, int id, const OrientedRect& grown, double resolution) {
    return !blade_overlap(grown, rasterize(scene.at(id).shape, resolution));
}

}  // namespace

CutResult execute_cut(const Scene& scene, int target_id, const CutPose& pose, CutStyle style,
                      const ExecConfig& config, Rng& rng) {
    config.validate();
    const SceneObject& target = scene.at(target_id);
    if (!std::isfinite(pose.com.x) || !std::isfinite(pose.com.y)) {
        throw std::invalid_argument("cut pose is not finite");
    }
    const bool chopped = bernoulli(rng, config.cut_probability(target.food_class, style));
    const bool stuck = bernoulli(rng, config.p_stuck_given_cut[index_of(target.food_class)]);
    const double roll = uniform(rng, config.roll_min_mm, config.roll_max_mm);
    const double roll_turn = uniform(rng, 0.0, 2.0 * kPi);

    const std::vector<Polygon> pieces = split_polygon(target.shape, {pose.com, pose.angle});
    if (pieces.size() < 2) return {scene, CutOutcome::Missed, {}};

    if (!chopped) {
        Point2 dir{std::cos(roll_turn), std::sin(roll_turn)};
        if (shape_template(target.food_class).rollable_axis) {
            const Point2 axis = long_axis(target.shape);
            const double sign = roll_turn < kPi ? 1.0 : -1.0;
            dir = Point2{-axis.y, axis.x} * sign;
        }
        Scene out = scene;
        slide_object(out, target_id, dir * roll, config.keep_out_mm);
        return {clamp_to_board(out), CutOutcome::Rolled, {}};
    }

    Scene out = replace_object(scene, target_id, pieces);
    std::vector<int> ids;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        ids.push_back(out.objects[out.objects.size() - pieces.size() + k].id);
    }
    if (stuck) return {clamp_to_board(out), CutOutcome::Stuck, ids};

    const Point2 normal = unit_normal(pose.angle);
    if (ids.size() == 2) {
        const double s = side_of(pieces[0].centroid(), pose);
        separate_pair(out, ids[0], normal * s, ids[1], normal * -s, config.separation_mm, config.keep_out_mm);
    } else {
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const double s = side_of(pieces[k].centroid(), pose);
            slide_object(out, ids[k], normal * (s * 0.5 * config.separation_mm), config.keep_out_mm);
        }
    }
    return {clamp_to_board(out), CutOutcome::Clean, ids};
}

std::vector<std::pair<int, int>> stuck_pairs_near(const Scene& scene, Point2 point,
                                                  double stuck_gap_mm) {
    std::vector<const SceneObject*> near;
    for (const SceneObject& o : scene.objects) {
        if (point_distance(o.shape, point) <= 2.0 * stuck_gap_mm) near.push_back(&o);
    }
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t a = 0; a < near.size(); ++a) {
        for (std::size_t b = a + 1; b < near.size(); ++b) {
            if (polygon_distance(near[a]->shape, near[b]->shape) <= stuck_gap_mm) {
                pairs.emplace_back(std::min(near[a]->id, near[b]->id), std::max(near[a]->id, near[b]->id));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

DisturbResult execute_disturb(const Scene& scene, const std::optional<CutPose>& last_pose,
                              const ExecConfig& config, Rng& rng) {
    if (!last_pose) throw std::invalid_argument("disturb needs a prior cut pose");
    config.validate();
    const CutPose& pose = *last_pose;
    DisturbResult result{scene, bernoulli(rng, config.p_disturb), {}};
    result.pairs = stuck_pairs_near(scene, pose.com, config.stuck_gap_mm);

    // Each piece leaves along a direction within 60 degrees of the cut-line
    // normal on its own side, so the pair separates by at least separation_mm.
    constexpr double cone = kPi / 3.0;
    const Point2 normal = unit_normal(pose.angle);
    for (const auto& [a, b] : result.pairs) {
        const double spread_a = uniform(rng, -cone, cone);
        const double spread_b = uniform(rng, -cone, cone);
        if (!result.applied) continue;
        const double side_a = side_of(result.scene.at(a).shape.centroid(), pose);
        const double base_a = std::atan2(normal.y * side_a, normal.x * side_a);
        const double base_b = base_a + kPi;
        const Point2 da{std::cos(base_a + spread_a), std::sin(base_a + spread_a)};
        const Point2 db{std::cos(base_b + spread_b), std::sin(base_b + spread_b)};
        separate_pair(result.scene, a, da, b, db, 2.0 * config.separation_mm, config.keep_out_mm);
    }
    result.scene = clamp_to_board(result.scene);
    return result;
}

PushResult execute_push(const Scene& scene, int interferer_id, int target_id,
                        const OrientedRect& footprint, const ExecConfig& config, Rng& rng) {
    if (interferer_id == target_id) throw std::invalid_argument("push needs two distinct objects");
    config.validate();
    const Point2 from = scene.at(target_id).shape.centroid();
    const Point2 start = scene.at(interferer_id).shape.centroid();
    Point2 dir = start - from;
    const double len = norm(dir);
    dir = len > 0.0 ? dir * (1.0 / len) : Point2{1.0, 0.0};

    const OrientedRect grown(footprint.center(), footprint.length() + 2.0 * config.push_clearance_mm,
                             footprint.width() + 2.0 * config.push_clearance_mm, footprint.angle());
    PushResult result{scene, bernoulli(rng, config.p_push), false, {}};
    const int steps = result.drew_success ? config.push_max_steps : 1;
    for (int k = 0; k < steps; ++k) {
        if (result.drew_success && clears(result.scene, interferer_id, grown, config.resolution)) break;
        const double t = shove_object(result.scene, interferer_id, dir * config.push_step_mm, config.keep_out_mm, 3);
        if (t <= 0.0) break;
    }
    result.scene = clamp_to_board(result.scene);
    result.cleared = clears(result.scene, interferer_id, grown, config.resolution);
    result.displacement = result.scene.at(interferer_id).shape.centroid() - start;
    return result;
}

}  // namespace chopsim
