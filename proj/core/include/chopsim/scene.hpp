#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chopsim/geometry.hpp"
#include "chopsim/rng.hpp"

namespace chopsim {

enum class FoodClass { Apple, Cucumber, Carrot };

inline constexpr std::array<FoodClass, 3> kAllClasses{FoodClass::Apple, FoodClass::Cucumber,
                                                      FoodClass::Carrot};

std::string_view to_string(FoodClass c);
/// Case-insensitive; nullopt for unknown names.
std::optional<FoodClass> parse_food_class(std::string_view name);
inline std::size_t index_of(FoodClass c) { return static_cast<std::size_t>(c); }

/// Piece size relative to a whole object, always 1 / denominator with a
/// power-of-two denominator.
struct SizeFraction {
    std::uint32_t denominator = 1;

    double value() const { return 1.0 / static_cast<double>(denominator); }
    SizeFraction halved() const { return {denominator * 2}; }
    friend bool operator==(SizeFraction, SizeFraction) = default;
};

struct ShapeTemplate {
    FoodClass food_class = FoodClass::Apple;
    Polygon base_polygon;
    /// Unit direction along which a cylindrical object rolls; absent for round objects.
    std::optional<Point2> rollable_axis;
};

/// Built-in outline for a class, centered on its centroid at the origin.
const ShapeTemplate& shape_template(FoodClass c);

struct SceneObject {
    int id = 0;
    FoodClass food_class = FoodClass::Apple;
    SizeFraction size_fraction;
    Polygon shape;
    std::optional<int> parent_id;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Board {
    double width = 400.0;
    double height = 300.0;

    Box2 bounds() const { return {{0.0, 0.0}, {width, height}}; }
    friend bool operator==(const Board&, const Board&) = default;
};

struct Scene {
    Board board;
    std::vector<SceneObject> objects;
    int next_id = 1;

    const SceneObject* find(int id) const;
    const SceneObject& at(int id) const;
    std::size_t count(FoodClass c) const;
    double total_area() const;

    friend bool operator==(const Scene&, const Scene&) = default;
};

struct SceneGenConfig {
    int n_objects_min = 1;
    int n_objects_max = 10;
    std::vector<FoodClass> classes{FoodClass::Apple, FoodClass::Cucumber};
    std::vector<SizeFraction> size_fractions{{1}, {2}, {4}, {8}};
    double min_gap = 10.0;
    int max_placement_attempts = 2000;
    Board board;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

class PlacementError : public std::runtime_error {
public:
    PlacementError(std::size_t object_index, const std::string& what)
        : std::runtime_error(what), object_index_(object_index) {}
    std::size_t object_index() const { return object_index_; }

private:
    std::size_t object_index_;
};

/// Random cluttered scene. Pure function of (config, seed).
Scene generate_scene(const SceneGenConfig& config, std::uint64_t seed);

/// Scene with exactly the listed objects (class per entry). Size fractions,
/// poses and rotations are drawn as in generate_scene.
Scene generate_scene_with(const std::vector<FoodClass>& classes, const SceneGenConfig& config,
                          std::uint64_t seed);

/// Recursive centroid splits of the template outline: denominator 2^k takes
/// k splits at random angles, keeping one random piece each time. When
/// `area_trace` is given it receives the kept area after every split.
Polygon slice_shape(const ShapeTemplate& tmpl, SizeFraction fraction, Rng& rng,
                    std::vector<double>* area_trace = nullptr);

/// Minimal translation of every out-of-bounds object back onto the board.
Scene clamp_to_board(const Scene& scene);

/// Removes `id` and appends one child object per piece.
Scene replace_object(const Scene& scene, int id, const std::vector<Polygon>& pieces);

/// Object under `p`: the one containing it, else the nearest. nullopt on an empty scene.
std::optional<int> object_at(const Scene& scene, Point2 p);

/// Translates object `id` by up to `delta` in place. The move stops early
/// where it would leave the board or bring the object closer than
/// `keep_out_mm` to another object it was not already that close to.
/// Returns the fraction of `delta` applied.
double slide_object(Scene& scene, int id, Point2 delta, double keep_out_mm);

/// Canonical JSON: sorted keys, coordinates rounded to 6 decimals.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(std::string_view text);

}  // namespace chopsim
