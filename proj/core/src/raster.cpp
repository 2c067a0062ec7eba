#include "chopsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace chopsim {

Point2 GridSpec::origin() const {
    return {static_cast<double>(x0) * resolution, static_cast<double>(y0) * resolution};
}

Point2 GridSpec::cell_center(int i, int j) const {
    return {(static_cast<double>(x0 + i) + 0.5) * resolution,
            (static_cast<double>(y0 + j) + 0.5) * resolution};
}

std::size_t GridSpec::cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

Box2 GridSpec::bounds() const {
    const Point2 o = origin();
    return {o, {o.x + width * resolution, o.y + height * resolution}};
}

GridSpec GridSpec::covering(const Box2& box, double resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    GridSpec g;
    g.resolution = resolution;
    g.x0 = static_cast<std::int64_t>(std::floor(box.min.x / resolution));
    g.y0 = static_cast<std::int64_t>(std::floor(box.min.y / resolution));
    const auto x1 = static_cast<std::int64_t>(std::ceil(box.max.x / resolution));
    const auto y1 = static_cast<std::int64_t>(std::ceil(box.max.y / resolution));
    g.width = static_cast<int>(std::max<std::int64_t>(1, x1 - g.x0));
    g.height = static_cast<int>(std::max<std::int64_t>(1, y1 - g.y0));
    return g;
}

RasterMask::RasterMask(GridSpec grid) : grid_(grid), cells_(grid.cell_count(), 0) {
    if (!(grid.resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    if (grid.width < 0 || grid.height < 0) throw std::invalid_argument("negative grid size");
}

bool RasterMask::in_bounds(int i, int j) const {
    return i >= 0 && j >= 0 && i < grid_.width && j < grid_.height;
}

std::size_t RasterMask::count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

double RasterMask::area() const {
    return static_cast<double>(count()) * grid_.resolution * grid_.resolution;
}

std::vector<Cell> RasterMask::set_cells() const {
    std::vector<Cell> out;
    for (int j = 0; j < grid_.height; ++j) {
        for (int i = 0; i < grid_.width; ++i) {
            if (at(i, j)) out.push_back({i, j});
        }
    }
    return out;
}

std::optional<Box2> RasterMask::set_bounds() const {
    int imin = grid_.width, jmin = grid_.height, imax = -1, jmax = -1;
    for (int j = 0; j < grid_.height; ++j) {
        for (int i = 0; i < grid_.width; ++i) {
            if (!at(i, j)) continue;
            imin = std::min(imin, i);
            imax = std::max(imax, i);
            jmin = std::min(jmin, j);
            jmax = std::max(jmax, j);
        }
    }
    if (imax < 0) return std::nullopt;
    const double r = grid_.resolution;
    const Point2 o = grid_.origin();
    return Box2{{o.x + imin * r, o.y + jmin * r}, {o.x + (imax + 1) * r, o.y + (jmax + 1) * r}};
}

RasterMask RasterMask::regridded(const GridSpec& target) const {
    if (target.resolution != grid_.resolution) {
        throw std::invalid_argument("regrid requires equal resolution");
    }
    RasterMask out(target);
    const auto di = grid_.x0 - target.x0;
    const auto dj = grid_.y0 - target.y0;
    for (int j = 0; j < grid_.height; ++j) {
        const auto tj = j + dj;
        if (tj < 0 || tj >= target.height) continue;
        for (int i = 0; i < grid_.width; ++i) {
            const auto ti = i + di;
            if (ti < 0 || ti >= target.width || !at(i, j)) continue;
            out.set(static_cast<int>(ti), static_cast<int>(tj));
        }
    }
    return out;
}

RasterMask rasterize(const Polygon& shape, double resolution) {
    return rasterize(shape, GridSpec::covering(shape.bounds(), resolution));
}

RasterMask rasterize(const Polygon& shape, const GridSpec& grid) {
    if (!(shape.area() > 0.0)) throw std::invalid_argument("degenerate polygon");
    RasterMask mask(grid);
    const auto& v = shape.vertices();
    const std::size_t n = v.size();
    const double r = grid.resolution;
    std::vector<double> xs;
    for (int j = 0; j < grid.height; ++j) {
        const double yc = (static_cast<double>(grid.y0 + j) + 0.5) * r;
        xs.clear();
        for (std::size_t k = 0; k < n; ++k) {
            const Point2 a = v[k];
            const Point2 b = v[(k + 1) % n];
            if ((a.y <= yc) != (b.y <= yc)) {
                xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // Cells whose center x lies in [xs[k], xs[k+1]).
            const double lo = xs[k] / r - static_cast<double>(grid.x0) - 0.5;
            const double hi = xs[k + 1] / r - static_cast<double>(grid.x0) - 0.5;
            const int i0 = std::max(0, static_cast<int>(std::ceil(lo)));
            const int i1 = std::min(grid.width, static_cast<int>(std::ceil(hi)));
            for (int i = i0; i < i1; ++i) mask.set(i, j);
        }
    }
    return mask;
}

Point2 mask_centroid(const RasterMask& mask) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int j = 0; j < mask.height(); ++j) {
        for (int i = 0; i < mask.width(); ++i) {
            if (!mask.at(i, j)) continue;
            sx += i;
            sy += j;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("centroid of empty mask");
    const double r = mask.resolution();
    const Point2 o = mask.origin();
    return {o.x + (sx / static_cast<double>(n) + 0.5) * r,
            o.y + (sy / static_cast<double>(n) + 0.5) * r};
}

namespace {

struct LatticePoint {
    std::int64_t x;
    std::int64_t y;
    auto operator<=>(const LatticePoint&) const = default;
};

std::int64_t cross3(LatticePoint o, LatticePoint a, LatticePoint b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

Chord longest_diameter(const RasterMask& mask) {
    // Only the extreme cells of each row can be hull vertices.
    std::vector<LatticePoint> pts;
    for (int j = 0; j < mask.height(); ++j) {
        int first = -1, last = -1;
        for (int i = 0; i < mask.width(); ++i) {
            if (!mask.at(i, j)) continue;
            if (first < 0) first = i;
            last = i;
        }
        if (first < 0) continue;
        pts.push_back({first, j});
        if (last != first) pts.push_back({last, j});
    }
    std::sort(pts.begin(), pts.end());
    if (pts.size() < 2) throw std::invalid_argument("longest diameter needs at least 2 cells");

    std::vector<LatticePoint> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);

    // Hull sizes on board-scale masks are small; exhaustive search keeps the
    // tie rule exact.
    std::int64_t best = -1;
    LatticePoint ba{}, bb{};
    for (std::size_t a = 0; a < hull.size(); ++a) {
        for (std::size_t b = a + 1; b < hull.size(); ++b) {
            LatticePoint p = hull[a], q = hull[b];
            if (q < p) std::swap(p, q);
            const std::int64_t dx = q.x - p.x, dy = q.y - p.y;
            const std::int64_t d2 = dx * dx + dy * dy;
            if (d2 > best || (d2 == best && std::tie(p, q) < std::tie(ba, bb))) {
                best = d2;
                ba = p;
                bb = q;
            }
        }
    }
    Chord c;
    c.a = mask.cell_center(static_cast<int>(ba.x), static_cast<int>(ba.y));
    c.b = mask.cell_center(static_cast<int>(bb.x), static_cast<int>(bb.y));
    c.length = std::sqrt(static_cast<double>(best)) * mask.resolution();
    return c;
}

std::size_t blade_overlap_cells(const OrientedRect& blade, const RasterMask& mask) {
    const Box2 reach = blade.polygon().bounds().inflated(mask.resolution());
    const GridSpec& g = mask.grid();
    const double r = g.resolution;
    const int i0 = std::max(0, static_cast<int>(std::floor(reach.min.x / r - g.x0)));
    const int i1 = std::min(g.width, static_cast<int>(std::ceil(reach.max.x / r - g.x0)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor(reach.min.y / r - g.y0)));
    const int j1 = std::min(g.height, static_cast<int>(std::ceil(reach.max.y / r - g.y0)) + 1);
    std::size_t hits = 0;
    for (int j = j0; j < j1; ++j) {
        for (int i = i0; i < i1; ++i) {
            if (mask.at(i, j) && blade.contains(mask.cell_center(i, j))) ++hits;
        }
    }
    return hits;
}

bool blade_overlap(const OrientedRect& blade, const RasterMask& mask) {
    return blade_overlap_cells(blade, mask) > 0;
}

RasterMask mask_union(std::span<const RasterMask> parts) {
    if (parts.empty()) throw std::invalid_argument("mask_union of no parts");
    RasterMask out(parts.front().grid());
    for (const RasterMask& p : parts) {
        if (!(p.grid() == out.grid())) throw std::invalid_argument("mask_union grid mismatch");
        for (int j = 0; j < p.height(); ++j) {
            for (int i = 0; i < p.width(); ++i) {
                if (p.at(i, j)) out.set(i, j);
            }
        }
    }
    return out;
}

namespace {

GridSpec common_grid(const GridSpec& a, const GridSpec& b) {
    if (a.resolution != b.resolution) throw std::invalid_argument("masks differ in resolution");
    GridSpec g;
    g.resolution = a.resolution;
    g.x0 = std::min(a.x0, b.x0);
    g.y0 = std::min(a.y0, b.y0);
    g.width = static_cast<int>(std::max(a.x0 + a.width, b.x0 + b.width) - g.x0);
    g.height = static_cast<int>(std::max(a.y0 + a.height, b.y0 + b.height) - g.y0);
    return g;
}

}  // namespace

std::size_t intersection_count(const RasterMask& a, const RasterMask& b) {
    const GridSpec g = common_grid(a.grid(), b.grid());
    const RasterMask ra = a.regridded(g);
    const RasterMask rb = b.regridded(g);
    std::size_t n = 0;
    for (std::size_t k = 0; k < g.cell_count(); ++k) n += ra.data()[k] & rb.data()[k];
    return n;
}

double iou(const RasterMask& a, const RasterMask& b) {
    const std::size_t inter = intersection_count(a, b);
    const std::size_t uni = a.count() + b.count() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<RasterMask> connected_components(const RasterMask& mask) {
    std::vector<int> label(mask.grid().cell_count(), -1);
    std::vector<RasterMask> comps;
    std::vector<std::size_t> sizes;
    const int w = mask.width();
    const int h = mask.height();
    std::queue<Cell> frontier;
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const auto idx = static_cast<std::size_t>(j) * w + i;
            if (!mask.at(i, j) || label[idx] >= 0) continue;
            const int id = static_cast<int>(comps.size());
            RasterMask comp(mask.grid());
            std::size_t size = 0;
            label[idx] = id;
            frontier.push({i, j});
            while (!frontier.empty()) {
                const Cell c = frontier.front();
                frontier.pop();
                comp.set(c.i, c.j);
                ++size;
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int di = -1; di <= 1; ++di) {
                        const int ni = c.i + di, nj = c.j + dj;
                        if (!mask.in_bounds(ni, nj) || !mask.at(ni, nj)) continue;
                        const auto nidx = static_cast<std::size_t>(nj) * w + ni;
                        if (label[nidx] >= 0) continue;
                        label[nidx] = id;
                        frontier.push({ni, nj});
                    }
                }
            }
            comps.push_back(std::move(comp));
            sizes.push_back(size);
        }
    }
    // Discovery order is already by smallest (row, column) cell.
    std::vector<std::size_t> order(comps.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return sizes[l] > sizes[r]; });
    std::vector<RasterMask> out;
    out.reserve(comps.size());
    for (std::size_t k : order) out.push_back(std::move(comps[k]));
    return out;
}

}  // namespace chopsim
