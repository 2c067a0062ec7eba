#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace chopsim {

inline constexpr double kPi = 3.14159265358979323846;

/// Board-frame point in millimeters. Origin is the lower-left board corner.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
    friend Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
    friend bool operator==(Point2, Point2) = default;
};

double dot(Point2 a, Point2 b);
double cross(Point2 a, Point2 b);
double norm(Point2 a);
double distance(Point2 a, Point2 b);
double distance_to_segment(Point2 p, Point2 a, Point2 b);

/// Wraps an angle into [0, pi). Lines and blades are symmetric under a half turn.
double normalize_half_turn(double angle);

struct Box2 {
    Point2 min;
    Point2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    Box2 inflated(double margin) const;
    bool contains(Point2 p) const;
};

/// Simple counter-clockwise polygon with positive area.
///
/// Construction validates the invariants: at least three vertices, no
/// self-intersection, non-zero area. Clockwise input is reversed.
class Polygon {
public:
    explicit Polygon(std::vector<Point2> vertices);

    const std::vector<Point2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }

    double area() const;
    Point2 centroid() const;
    Box2 bounds() const;

    /// Even-odd containment; points on the boundary may go either way.
    bool contains(Point2 p) const;

    Polygon translated(Point2 delta) const;
    Polygon rotated(double angle, Point2 pivot) const;

    friend bool operator==(const Polygon&, const Polygon&) = default;

private:
    struct Unchecked {};
    Polygon(std::vector<Point2> vertices, Unchecked) : vertices_(std::move(vertices)) {}

    std::vector<Point2> vertices_;
};

/// Signed shoelace area of a vertex loop (positive when counter-clockwise).
double signed_area(std::span<const Point2> loop);

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

/// Minimum Euclidean distance between two polygons; zero when they overlap or touch.
double polygon_distance(const Polygon& a, const Polygon& b);

/// Convex hull (monotone chain), counter-clockwise, collinear points dropped.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Regular n-gon inscribed in a circle.
Polygon regular_polygon(Point2 center, double radius, int sides, double phase = 0.0);

/// Axis-aligned rectangle centered at `center`.
Polygon rectangle(Point2 center, double width, double height);

/// Infinite cut line: passes through `point` with direction angle `angle`.
struct CutLine {
    Point2 point;
    double angle = 0.0;
};

/// Connected pieces of `shape` on each side of the line.
///
/// A line that misses the interior yields the original polygon as the only
/// piece. Non-convex inputs can produce more than two pieces.
std::vector<Polygon> split_polygon(const Polygon& shape, const CutLine& line);

/// Blade footprint. The angle is kept in [0, pi).
class OrientedRect {
public:
    OrientedRect(Point2 center, double length, double width, double angle);

    Point2 center() const { return center_; }
    double length() const { return length_; }
    double width() const { return width_; }
    double angle() const { return angle_; }

    /// Inclusive of the boundary.
    bool contains(Point2 p) const;
    Polygon polygon() const;

private:
    Point2 center_;
    double length_;
    double width_;
    double angle_;
    double cos_;
    double sin_;
};

struct Chord {
    Point2 a;
    Point2 b;
    double length = 0.0;

    double angle() const;
};

/// Grid anchored on the board lattice: cell (i, j) spans
/// [(x0 + i) * res, (x0 + i + 1) * res) x [(y0 + j) * res, (y0 + j + 1) * res).
struct GridSpec {
    double resolution = 1.0;
    std::int64_t x0 = 0;
    std::int64_t y0 = 0;
    int width = 0;
    int height = 0;

    Point2 origin() const;
    Point2 cell_center(int i, int j) const;
    std::size_t cell_count() const;
    Box2 bounds() const;

    /// Smallest lattice-aligned grid covering `box` at `resolution`.
    static GridSpec covering(const Box2& box, double resolution);

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Cell {
    int i = 0;
    int j = 0;
    friend bool operator==(Cell, Cell) = default;
};

/// Binary occupancy grid.
class RasterMask {
public:
    RasterMask() = default;
    explicit RasterMask(GridSpec grid);

    const GridSpec& grid() const { return grid_; }
    double resolution() const { return grid_.resolution; }
    Point2 origin() const { return grid_.origin(); }
    int width() const { return grid_.width; }
    int height() const { return grid_.height; }

    bool at(int i, int j) const { return cells_[index(i, j)] != 0; }
    void set(int i, int j, bool value = true) { cells_[index(i, j)] = value ? 1 : 0; }
    bool in_bounds(int i, int j) const;

    Point2 cell_center(int i, int j) const { return grid_.cell_center(i, j); }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    double area() const;

    /// Set cells in row-major order (j outer, i inner).
    std::vector<Cell> set_cells() const;

    /// Bounding box of set cell extents; nullopt when empty.
    std::optional<Box2> set_bounds() const;

    /// Same cells placed on another grid of the same lattice and resolution.
    /// Cells falling outside `target` are dropped.
    RasterMask regridded(const GridSpec& target) const;

    std::span<const std::uint8_t> data() const { return cells_; }

    friend bool operator==(const RasterMask&, const RasterMask&) = default;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.width) +
               static_cast<std::size_t>(i);
    }

    GridSpec grid_;
    std::vector<std::uint8_t> cells_;
};

/// A cell is set iff its center lies inside the polygon.
RasterMask rasterize(const Polygon& shape, double resolution);
RasterMask rasterize(const Polygon& shape, const GridSpec& grid);

Point2 mask_centroid(const RasterMask& mask);

/// Maximal-distance pair of set-cell centers. Ties go to the
/// lexicographically smallest (a.x, a.y, b.x, b.y) with a < b.
Chord longest_diameter(const RasterMask& mask);

/// True iff any set-cell center lies inside the blade rectangle.
bool blade_overlap(const OrientedRect& blade, const RasterMask& mask);

/// Number of set cells whose centers lie inside the blade rectangle.
std::size_t blade_overlap_cells(const OrientedRect& blade, const RasterMask& mask);

RasterMask mask_union(std::span<const RasterMask> parts);

std::size_t intersection_count(const RasterMask& a, const RasterMask& b);
double iou(const RasterMask& a, const RasterMask& b);

/// 8-connected components, largest first; equal areas ordered by their
/// smallest (row, column) cell.
std::vector<RasterMask> connected_components(const RasterMask& mask);

}  // namespace chopsim
