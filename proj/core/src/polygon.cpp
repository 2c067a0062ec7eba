#include "chopsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chopsim {

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 a) { return std::hypot(a.x, a.y); }
double distance(Point2 a, Point2 b) { return norm(a - b); }

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

double normalize_half_turn(double angle) {
    double a = std::fmod(angle, kPi);
    if (a < 0.0) a += kPi;
    if (a >= kPi) a -= kPi;
    return a;
}

Box2 Box2::inflated(double margin) const {
    return {{min.x - margin, min.y - margin}, {max.x + margin, max.y + margin}};
}

bool Box2::contains(Point2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
}

double signed_area(std::span<const Point2> loop) {
    double twice = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        twice += cross(loop[i], loop[(i + 1) % n]);
    }
    return 0.5 * twice;
}

namespace {

int orientation(Point2 a, Point2 b, Point2 c) {
    const double v = cross(b - a, c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(Point2 p, Point2 a, Point2 b) {
    return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
           p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(c, a, b)) return true;
    if (o2 == 0 && on_segment(d, a, b)) return true;
    if (o3 == 0 && on_segment(a, c, d)) return true;
    if (o4 == 0 && on_segment(b, c, d)) return true;
    return false;
}

Polygon::Polygon(std::vector<Point2> vertices) {
    for (const Point2& v : vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw std::invalid_argument("polygon vertex is not finite");
        }
        if (vertices_.empty() || !(vertices_.back() == v)) vertices_.push_back(v);
    }
    while (vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
    if (vertices_.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");

    const double a = signed_area(vertices_);
    if (!(std::abs(a) > 0.0)) throw std::invalid_argument("degenerate polygon (zero area)");
    if (a < 0.0) std::reverse(vertices_.begin(), vertices_.end());

    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                                   vertices_[(j + 1) % n])) {
                throw std::invalid_argument("polygon is self-intersecting");
            }
        }
    }
}

double Polygon::area() const { return signed_area(vertices_); }

Point2 Polygon::centroid() const {
    // Shift to the first vertex for numerical stability far from the origin.
    const Point2 ref = vertices_.front();
    double cx = 0.0, cy = 0.0, twice = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = vertices_[i] - ref;
        const Point2 q = vertices_[(i + 1) % n] - ref;
        const double c = cross(p, q);
        twice += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    return {ref.x + cx / (3.0 * twice), ref.y + cy / (3.0 * twice)};
}

Box2 Polygon::bounds() const {
    Box2 b{vertices_.front(), vertices_.front()};
    for (const Point2& v : vertices_) {
        b.min.x = std::min(b.min.x, v.x);
        b.min.y = std::min(b.min.y, v.y);
        b.max.x = std::max(b.max.x, v.x);
        b.max.y = std::max(b.max.y, v.y);
    }
    return b;
}

bool Polygon::contains(Point2 p) const {
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = vertices_[i];
        const Point2 b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

Polygon Polygon::translated(Point2 delta) const {
    std::vector<Point2> out = vertices_;
    for (Point2& v : out) v = v + delta;
    return Polygon(std::move(out), Unchecked{});
}

Polygon Polygon::rotated(double angle, Point2 pivot) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    std::vector<Point2> out = vertices_;
    for (Point2& v : out) {
        const Point2 d = v - pivot;
        v = pivot + Point2{c * d.x - s * d.y, s * d.x + c * d.y};
    }
    return Polygon(std::move(out), Unchecked{});
}

double polygon_distance(const Polygon& a, const Polygon& b) {
    const auto& va = a.vertices();
    const auto& vb = b.vertices();
    const std::size_t na = va.size();
    const std::size_t nb = vb.size();
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            if (segments_intersect(va[i], va[(i + 1) % na], vb[j], vb[(j + 1) % nb])) return 0.0;
        }
    }
    if (b.contains(va.front()) || a.contains(vb.front())) return 0.0;

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            best = std::min(best, distance_to_segment(va[i], vb[j], vb[(j + 1) % nb]));
            best = std::min(best, distance_to_segment(vb[j], va[i], va[(i + 1) % na]));
        }
    }
    return best;
}

std::vector<Point2> convex_hull(std::vector<Point2> points) {
    std::sort(points.begin(), points.end(), [](Point2 l, Point2 r) {
        return l.x < r.x || (l.x == r.x && l.y < r.y);
    });
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 3) return points;

    std::vector<Point2> hull(2 * points.size());
    std::size_t k = 0;
    for (const Point2& p : points) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = points.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

Polygon regular_polygon(Point2 center, double radius, int sides, double phase) {
    if (sides < 3 || !(radius > 0.0)) throw std::invalid_argument("bad regular polygon");
    std::vector<Point2> v;
    v.reserve(static_cast<std::size_t>(sides));
    for (int k = 0; k < sides; ++k) {
        const double t = phase + 2.0 * kPi * k / sides;
        v.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    return Polygon(std::move(v));
}

Polygon rectangle(Point2 center, double width, double height) {
    const double hw = 0.5 * width;
    const double hh = 0.5 * height;
    return Polygon({{center.x - hw, center.y - hh},
                    {center.x + hw, center.y - hh},
                    {center.x + hw, center.y + hh},
                    {center.x - hw, center.y + hh}});
}

namespace {

struct SplitNode {
    Point2 pt;
    int side = 0;          // +1 / -1 for vertices, 0 for crossings
    double along = 0.0;    // position along the line, crossings only
    std::size_t partner = 0;
};

}  // namespace

std::vector<Polygon> split_polygon(const Polygon& shape, const CutLine& line) {
    const auto& verts = shape.vertices();
    const std::size_t n = verts.size();
    const Point2 dir{std::cos(line.angle), std::sin(line.angle)};
    const Point2 normal{-dir.y, dir.x};

    const Box2 box = shape.bounds();
    const double scale = std::max({box.width(), box.height(), 1.0});
    const double eps = 1e-9 * scale;

    std::vector<double> side(n);
    for (std::size_t i = 0; i < n; ++i) side[i] = dot(verts[i] - line.point, normal);

    // A vertex exactly on the line is nudged off it. The pieces still
    // partition the polygon, so area is conserved regardless.
    double offset = 0.0;
    for (int guard = 0; guard < 64; ++guard) {
        const bool touching = std::any_of(side.begin(), side.end(), [&](double s) {
            return std::abs(s - offset) < eps;
        });
        if (!touching) break;
        offset += 2.5 * eps;
    }
    for (double& s : side) s -= offset;

    std::vector<SplitNode> nodes;
    std::vector<std::size_t> crossings;
    nodes.reserve(n + 8);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        nodes.push_back({verts[i], side[i] > 0.0 ? 1 : -1, 0.0, 0});
        if ((side[i] > 0.0) != (side[j] > 0.0)) {
            const double t = side[i] / (side[i] - side[j]);
            const Point2 p = verts[i] + (verts[j] - verts[i]) * t;
            crossings.push_back(nodes.size());
            nodes.push_back({p, 0, dot(p - line.point, dir), 0});
        }
    }
    if (crossings.empty()) return {shape};

    std::sort(crossings.begin(), crossings.end(), [&](std::size_t l, std::size_t r) {
        return nodes[l].along < nodes[r].along;
    });
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        nodes[crossings[k]].partner = crossings[k + 1];
        nodes[crossings[k + 1]].partner = crossings[k];
    }

    const double total = shape.area();
    std::vector<Polygon> pieces;
    std::vector<bool> visited(nodes.size(), false);
    const std::size_t m = nodes.size();
    for (int want : {1, -1}) {
        for (std::size_t start = 0; start < m; ++start) {
            if (nodes[start].side != want || visited[start]) continue;
            std::vector<Point2> loop;
            std::size_t cur = start;
            for (std::size_t steps = 0; steps <= 2 * m; ++steps) {
                loop.push_back(nodes[cur].pt);
                visited[cur] = true;
                if (nodes[cur].side == 0) {
                    cur = nodes[cur].partner;
                    loop.push_back(nodes[cur].pt);
                }
                cur = (cur + 1) % m;
                if (cur == start) break;
            }
            if (signed_area(loop) > 1e-12 * total) pieces.emplace_back(std::move(loop));
        }
    }
    return pieces;
}

OrientedRect::OrientedRect(Point2 center, double length, double width, double angle)
    : center_(center),
      length_(length),
      width_(width),
      angle_(normalize_half_turn(angle)),
      cos_(std::cos(angle_)),
      sin_(std::sin(angle_)) {
    if (!(length > 0.0) || !(width > 0.0)) {
        throw std::invalid_argument("oriented rect needs positive length and width");
    }
}

bool OrientedRect::contains(Point2 p) const {
    const Point2 d = p - center_;
    const double along = d.x * cos_ + d.y * sin_;
    const double across = -d.x * sin_ + d.y * cos_;
    const double tol = 1e-9 * std::max(1.0, length_);
    return std::abs(along) <= 0.5 * length_ + tol && std::abs(across) <= 0.5 * width_ + tol;
}

Polygon OrientedRect::polygon() const {
    const Point2 u{cos_ * 0.5 * length_, sin_ * 0.5 * length_};
    const Point2 v{-sin_ * 0.5 * width_, cos_ * 0.5 * width_};
    return Polygon({center_ - u - v, center_ + u - v, center_ + u + v, center_ - u + v});
}

double Chord::angle() const { return normalize_half_turn(std::atan2(b.y - a.y, b.x - a.x)); }

}  // namespace chopsim
