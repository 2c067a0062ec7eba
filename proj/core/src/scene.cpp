#include "chopsim/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace chopsim {

std::string_view to_string(FoodClass c) {
    switch (c) {
        case FoodClass::Apple: return "apple";
        case FoodClass::Cucumber: return "cucumber";
        case FoodClass::Carrot: return "carrot";
    }
    return "unknown";
}

std::optional<FoodClass> parse_food_class(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    for (FoodClass c : kAllClasses) {
        if (to_string(c) == lower) return c;
    }
    return std::nullopt;
}

namespace {

std::vector<Point2> arc(Point2 center, double radius, double from, double to, int samples) {
    std::vector<Point2> pts;
    for (int k = 0; k <= samples; ++k) {
        const double t = from + (to - from) * k / samples;
        pts.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    return pts;
}

Polygon centered(const Polygon& p) {
    const Point2 c = p.centroid();
    return p.translated({-c.x, -c.y});
}

// Hull of two end caps: a capsule when the radii match, a tapered capsule otherwise.
Polygon capsule(double length, double big_radius, double small_radius, int samples) {
    const Point2 big{-0.5 * length + big_radius, 0.0};
    const Point2 small{0.5 * length - small_radius, 0.0};
    std::vector<Point2> pts = arc(big, big_radius, 0.5 * kPi, 1.5 * kPi, samples);
    const auto tail = arc(small, small_radius, -0.5 * kPi, 0.5 * kPi, samples);
    pts.insert(pts.end(), tail.begin(), tail.end());
    return centered(Polygon(convex_hull(std::move(pts))));
}

std::array<ShapeTemplate, 3> make_templates() {
    return {ShapeTemplate{FoodClass::Apple, regular_polygon({0.0, 0.0}, 40.0, 64), std::nullopt},
            ShapeTemplate{FoodClass::Cucumber, capsule(160.0, 17.5, 17.5, 16), Point2{1.0, 0.0}},
            ShapeTemplate{FoodClass::Carrot, capsule(150.0, 12.5, 4.0, 16), Point2{1.0, 0.0}}};
}

double box_gap(const Box2& a, const Box2& b) {
    const double dx = std::max({0.0, a.min.x - b.max.x, b.min.x - a.max.x});
    const double dy = std::max({0.0, a.min.y - b.max.y, b.min.y - a.max.y});
    return std::hypot(dx, dy);
}

bool inside_board(const Box2& b, const Board& board) {
    constexpr double tol = 1e-9;
    return b.min.x >= -tol && b.min.y >= -tol && b.max.x <= board.width + tol &&
           b.max.y <= board.height + tol;
}

}  // namespace

const ShapeTemplate& shape_template(FoodClass c) {
    static const std::array<ShapeTemplate, 3> templates = make_templates();
    return templates[index_of(c)];
}

const SceneObject* Scene::find(int id) const {
    for (const SceneObject& o : objects) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

const SceneObject& Scene::at(int id) const {
    const SceneObject* o = find(id);
    if (o == nullptr) throw std::invalid_argument("unknown object id " + std::to_string(id));
    return *o;
}

std::size_t Scene::count(FoodClass c) const {
    return static_cast<std::size_t>(std::count_if(
        objects.begin(), objects.end(), [c](const SceneObject& o) { return o.food_class == c; }));
}

double Scene::total_area() const {
    double a = 0.0;
    for (const SceneObject& o : objects) a += o.shape.area();
    return a;
}

void SceneGenConfig::validate() const {
    if (n_objects_min < 1 || n_objects_max < n_objects_min) {
        throw std::invalid_argument("n_objects range must satisfy 1 <= min <= max");
    }
    if (classes.empty()) throw std::invalid_argument("scene config needs at least one class");
    if (size_fractions.empty()) throw std::invalid_argument("scene config needs size fractions");
    for (SizeFraction f : size_fractions) {
        if (f.denominator == 0 || (f.denominator & (f.denominator - 1)) != 0 || f.denominator > 8) {
            throw std::invalid_argument("size fractions must be one of 1, 1/2, 1/4, 1/8");
        }
    }
    if (!(min_gap >= 0.0)) throw std::invalid_argument("min_gap must be >= 0");
    if (max_placement_attempts < 1) throw std::invalid_argument("max_placement_attempts must be >= 1");
    if (!(board.width > 0.0) || !(board.height > 0.0)) {
        throw std::invalid_argument("board dimensions must be positive");
    }
}

Polygon slice_shape(const ShapeTemplate& tmpl, SizeFraction fraction, Rng& rng,
                    std::vector<double>* area_trace) {
    int splits = 0;
    switch (fraction.denominator) {
        case 1: splits = 0; break;
        case 2: splits = 1; break;
        case 4: splits = 2; break;
        case 8: splits = 3; break;
        default: throw std::invalid_argument("unsupported size fraction");
    }
    Polygon piece = tmpl.base_polygon;
    for (int s = 0; s < splits; ++s) {
        const double angle = uniform(rng, 0.0, kPi);
        const auto pieces = split_polygon(piece, {piece.centroid(), angle});
        const int keep = uniform_int(rng, 0, static_cast<int>(pieces.size()) - 1);
        piece = pieces[static_cast<std::size_t>(keep)];
        if (area_trace != nullptr) area_trace->push_back(piece.area());
    }
    return piece;
}

Scene generate_scene_with(const std::vector<FoodClass>& classes, const SceneGenConfig& config,
                          std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    Scene scene;
    scene.board = config.board;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const FoodClass cls = classes[k];
        const auto fi = uniform_int(rng, 0, static_cast<int>(config.size_fractions.size()) - 1);
        const SizeFraction fraction = config.size_fractions[static_cast<std::size_t>(fi)];
        const Polygon canonical = centered(slice_shape(shape_template(cls), fraction, rng));

        bool placed = false;
        for (int attempt = 0; attempt < config.max_placement_attempts && !placed; ++attempt) {
            const Polygon turned = canonical.rotated(uniform(rng, 0.0, 2.0 * kPi), {0.0, 0.0});
            const Box2 b = turned.bounds();
            const double lo_x = -b.min.x, hi_x = config.board.width - b.max.x;
            const double lo_y = -b.min.y, hi_y = config.board.height - b.max.y;
            const double ux = uniform(rng, 0.0, 1.0);
            const double uy = uniform(rng, 0.0, 1.0);
            if (hi_x < lo_x || hi_y < lo_y) continue;
            const Polygon shape = turned.translated({lo_x + ux * (hi_x - lo_x), lo_y + uy * (hi_y - lo_y)});
            const Box2 sb = shape.bounds();
            const bool clear = std::all_of(
                scene.objects.begin(), scene.objects.end(), [&](const SceneObject& other) {
                    if (box_gap(sb, other.shape.bounds()) >= config.min_gap) return true;
                    return polygon_distance(shape, other.shape) >= config.min_gap;
                });
            if (!clear) continue;
            scene.objects.push_back({scene.next_id++, cls, fraction, shape, std::nullopt});
            placed = true;
        }
        if (!placed) {
            throw PlacementError(k, "could not place object " + std::to_string(k) + " after " +
                                        std::to_string(config.max_placement_attempts) +
                                        " attempts");
        }
    }
    return scene;
}

Scene generate_scene(const SceneGenConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const int n = uniform_int(rng, config.n_objects_min, config.n_objects_max);
    std::vector<FoodClass> classes;
    for (int k = 0; k < n; ++k) {
        const int ci = uniform_int(rng, 0, static_cast<int>(config.classes.size()) - 1);
        classes.push_back(config.classes[static_cast<std::size_t>(ci)]);
    }
    return generate_scene_with(classes, config, rng());
}

Scene clamp_to_board(const Scene& scene) {
    Scene out = scene;
    for (SceneObject& o : out.objects) {
        const Box2 b = o.shape.bounds();
        if (b.width() > scene.board.width || b.height() > scene.board.height) {
            throw std::invalid_argument("object " + std::to_string(o.id) + " is larger than the board");
        }
        Point2 d{0.0, 0.0};
        if (b.min.x < 0.0) d.x = -b.min.x;
        else if (b.max.x > scene.board.width) d.x = scene.board.width - b.max.x;
        if (b.min.y < 0.0) d.y = -b.min.y;
        else if (b.max.y > scene.board.height) d.y = scene.board.height - b.max.y;
        if (d.x != 0.0 || d.y != 0.0) o.shape = o.shape.translated(d);
    }
    return out;
}

Scene replace_object(const Scene& scene, int id, const std::vector<Polygon>& pieces) {
    const SceneObject& parent = scene.at(id);
    Scene out;
    out.board = scene.board;
    out.next_id = scene.next_id;
    for (const SceneObject& o : scene.objects) {
        if (o.id != id) out.objects.push_back(o);
    }
    for (const Polygon& piece : pieces) {
        out.objects.push_back(
            {out.next_id++, parent.food_class, parent.size_fraction.halved(), piece, parent.id});
    }
    return out;
}

std::optional<int> object_at(const Scene& scene, Point2 p) {
    std::optional<int> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const SceneObject& o : scene.objects) {
        if (o.shape.contains(p)) return o.id;
        const auto& v = o.shape.vertices();
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double d = distance_to_segment(p, v[k], v[(k + 1) % v.size()]);
            if (d < best_d) {
                best_d = d;
                best = o.id;
            }
        }
    }
    return best;
}

double slide_object(Scene& scene, int id, Point2 delta, double keep_out_mm) {
    auto it = std::find_if(scene.objects.begin(), scene.objects.end(),
                           [id](const SceneObject& o) { return o.id == id; });
    if (it == scene.objects.end()) throw std::invalid_argument("unknown object id " + std::to_string(id));
    const Polygon start = it->shape;
    const double reach = norm(delta) + keep_out_mm;

    struct Neighbor {
        const Polygon* shape;
        double floor;
    };
    std::vector<Neighbor> near;
    const Box2 sb = start.bounds();
    for (const SceneObject& o : scene.objects) {
        if (o.id == id || box_gap(sb, o.shape.bounds()) > reach) continue;
        near.push_back({&o.shape, std::min(polygon_distance(start, o.shape), keep_out_mm)});
    }

    auto feasible = [&](double t) {
        const Polygon moved = start.translated(delta * t);
        const Box2 mb = moved.bounds();
        if (!inside_board(mb, scene.board) && inside_board(sb, scene.board)) return false;
        for (const Neighbor& n : near) {
            if (box_gap(mb, n.shape->bounds()) >= n.floor) continue;
            if (polygon_distance(moved, *n.shape) < n.floor - 1e-9) return false;
        }
        return true;
    };

    double t = 1.0;
    if (!feasible(1.0)) {
        double lo = 0.0, hi = 1.0;
        for (int k = 0; k < 24; ++k) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        t = lo;
    }
    if (t > 0.0) it->shape = start.translated(delta * t);
    return t;
}

}  // namespace chopsim
