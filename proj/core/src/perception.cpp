#include "chopsim/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace chopsim {

void PerceptionConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
    };
    prob(p_detect, "p_detect");
    prob(p_label, "p_label");
    if (partials_min < 1 || partials_max > 8 || partials_max < partials_min) {
        throw std::invalid_argument("partials range must lie within [1, 8]");
    }
    if (!(stuck_gap_mm >= 0.0)) throw std::invalid_argument("stuck_gap_mm must be >= 0");
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    if (!(bbox_margin_mm >= 0.0)) throw std::invalid_argument("bbox_margin_mm must be >= 0");
}

PerceptionConfig two_class_perception() { return {}; }

PerceptionConfig three_class_perception() {
    PerceptionConfig c;
    c.p_detect = 0.929;
    c.p_label = 0.90;
    return c;
}

int Observation::count(FoodClass c) const {
    const auto it = count_by_class.find(c);
    return it == count_by_class.end() ? 0 : it->second;
}

namespace {

struct ObjectRaster {
    int id;
    FoodClass food_class;
    RasterMask mask;
    std::size_t cells;
    Box2 bounds;
};

std::vector<ObjectRaster> rasterize_objects(const Scene& scene, double resolution) {
    std::vector<ObjectRaster> out;
    out.reserve(scene.objects.size());
    for (const SceneObject& o : scene.objects) {
        RasterMask m = rasterize(o.shape, resolution);
        const std::size_t n = m.count();
        if (n == 0) continue;
        const Box2 b = *m.set_bounds();
        out.push_back({o.id, o.food_class, std::move(m), n, b});
    }
    return out;
}

double box_gap(const Box2& a, const Box2& b) {
    const double dx = std::max({0.0, a.min.x - b.max.x, b.min.x - a.max.x});
    const double dy = std::max({0.0, a.min.y - b.max.y, b.min.y - a.max.y});
    return std::hypot(dx, dy);
}

bool masks_close(const ObjectRaster& a, const ObjectRaster& b, double reach) {
    if (box_gap(a.bounds, b.bounds) > reach) return false;
    const GridSpec& ga = a.mask.grid();
    const GridSpec& gb = b.mask.grid();
    const double rc = reach / ga.resolution;
    const int span = static_cast<int>(std::floor(rc + 1e-9));
    std::vector<Cell> offsets;
    for (int dj = -span; dj <= span; ++dj) {
        for (int di = -span; di <= span; ++di) {
            if (di * di + dj * dj <= rc * rc + 1e-9) offsets.push_back({di, dj});
        }
    }
    const Box2 window = b.bounds.inflated(reach);
    for (int j = 0; j < ga.height; ++j) {
        for (int i = 0; i < ga.width; ++i) {
            if (!a.mask.at(i, j) || !window.contains(a.mask.cell_center(i, j))) continue;
            const auto gi = ga.x0 + i, gj = ga.y0 + j;
            for (const Cell& off : offsets) {
                const auto bi = gi + off.i - gb.x0;
                const auto bj = gj + off.j - gb.y0;
                if (bi < 0 || bj < 0 || bi >= gb.width || bj >= gb.height) continue;
                if (b.mask.at(static_cast<int>(bi), static_cast<int>(bj))) return true;
            }
        }
    }
    return false;
}

struct Blob {
    std::vector<std::size_t> members;  // indices into the raster list
    std::size_t cells = 0;
    int min_id = 0;
};

std::vector<Blob> group_blobs(const std::vector<ObjectRaster>& rasters, double stuck_gap_mm,
                              double resolution) {
    const std::size_t n = rasters.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const double reach = stuck_gap_mm + resolution;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (root(a) == root(b)) continue;
            if (masks_close(rasters[a], rasters[b], reach)) parent[root(a)] = root(b);
        }
    }
    std::vector<Blob> blobs;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r = root(k);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::ptrdiff_t>(blobs.size());
            blobs.push_back({{}, 0, rasters[k].id});
        }
        Blob& blob = blobs[static_cast<std::size_t>(slot[r])];
        blob.members.push_back(k);
        blob.cells += rasters[k].cells;
        blob.min_id = std::min(blob.min_id, rasters[k].id);
    }
    std::stable_sort(blobs.begin(), blobs.end(), [](const Blob& l, const Blob& r) {
        return l.cells != r.cells ? l.cells > r.cells : l.min_id < r.min_id;
    });
    return blobs;
}

std::vector<int> blob_ids(const Blob& blob, const std::vector<ObjectRaster>& rasters) {
    std::vector<int> ids;
    for (std::size_t m : blob.members) ids.push_back(rasters[m].id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

Box2 blob_bounds(const Blob& blob, const std::vector<ObjectRaster>& rasters) {
    Box2 b = rasters[blob.members.front()].bounds;
    for (std::size_t m : blob.members) {
        const Box2& o = rasters[m].bounds;
        b.min.x = std::min(b.min.x, o.min.x);
        b.min.y = std::min(b.min.y, o.min.y);
        b.max.x = std::max(b.max.x, o.max.x);
        b.max.y = std::max(b.max.y, o.max.y);
    }
    return b;
}

const ObjectRaster& dominant_member(const Blob& blob, const std::vector<ObjectRaster>& rasters) {
    const ObjectRaster* best = &rasters[blob.members.front()];
    for (std::size_t m : blob.members) {
        const ObjectRaster& r = rasters[m];
        if (r.cells > best->cells || (r.cells == best->cells && r.id < best->id)) best = &r;
    }
    return *best;
}

// Splits `cells` into up to `k` nonempty groups by nearest random site.
std::vector<RasterMask> nearest_site_partition(const GridSpec& grid, const std::vector<Cell>& cells,
                                               int k, Rng& rng) {
    const auto n = static_cast<int>(cells.size());
    k = std::min(k, n);
    std::vector<Cell> pool = cells;
    for (int s = 0; s < k; ++s) {
        const int r = uniform_int(rng, s, n - 1);
        std::swap(pool[static_cast<std::size_t>(s)], pool[static_cast<std::size_t>(r)]);
    }
    std::vector<RasterMask> parts(static_cast<std::size_t>(k), RasterMask(grid));
    for (const Cell& c : cells) {
        std::size_t best = 0;
        long best_d = -1;
        for (int s = 0; s < k; ++s) {
            const Cell site = pool[static_cast<std::size_t>(s)];
            const long di = c.i - site.i, dj = c.j - site.j;
            const long d = di * di + dj * dj;
            if (best_d < 0 || d < best_d) {
                best_d = d;
                best = static_cast<std::size_t>(s);
            }
        }
        parts[best].set(c.i, c.j);
    }
    return parts;
}

FusedObject make_fused(FoodClass label, RasterMask mask, std::vector<int> true_ids) {
    FusedObject f;
    f.label = label;
    f.centroid = mask_centroid(mask);
    f.area = mask.area();
    f.bbox = *mask.set_bounds();
    f.mask = std::move(mask);
    f.true_ids = std::move(true_ids);
    return f;
}

Observation observe_impl(const Scene& scene, FoodClass target_class, const PerceptionConfig& config,
                         Rng& rng) {
    config.validate();
    Observation obs;
    obs.target_class = target_class;
    const auto rasters = rasterize_objects(scene, config.resolution);
    const auto blobs = group_blobs(rasters, config.stuck_gap_mm, config.resolution);

    for (const Blob& blob : blobs) {
        const bool kept = bernoulli(rng, config.p_detect);
        if (!kept) continue;
        const ObjectRaster& lead = dominant_member(blob, rasters);
        Detection det{lead.food_class, blob_bounds(blob, rasters).inflated(config.bbox_margin_mm),
                      blob_ids(blob, rasters)};

        const GridSpec grid = GridSpec::covering(det.bbox, config.resolution);
        std::vector<RasterMask> members;
        for (std::size_t m : blob.members) members.push_back(rasters[m].mask.regridded(grid));
        const RasterMask blob_mask = mask_union(members);

        auto partials = oversegment(blob_mask, config, rng);
        std::vector<std::optional<FoodClass>> labels;
        labels.reserve(partials.size());
        for (PartialMask& p : partials) {
            FoodClass truth = det.label;
            if (!p.background) {
                std::size_t best_overlap = 0;
                for (std::size_t k = 0; k < members.size(); ++k) {
                    const std::size_t overlap = intersection_count(p.mask, members[k]);
                    const ObjectRaster& r = rasters[blob.members[k]];
                    if (overlap > best_overlap ||
                        (overlap == best_overlap && overlap > 0 && r.id < *p.origin_object)) {
                        best_overlap = overlap;
                        p.origin_object = r.id;
                        truth = r.food_class;
                    }
                }
            }
            labels.push_back(classify_partial(p, truth, config, rng));
        }
        auto fused = fuse_masks(partials, labels, det.label);
        const std::vector<int> ids = det.true_ids;
        obs.detections.push_back(std::move(det));
        if (!fused) continue;
        obs.objects.push_back(make_fused(obs.detections.back().label, std::move(*fused), ids));
    }
    for (const FusedObject& f : obs.objects) ++obs.count_by_class[f.label];
    return obs;
}

void write_pgm(const RasterMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
    for (int j = mask.height() - 1; j >= 0; --j) {
        for (int i = 0; i < mask.width(); ++i) out.put(mask.at(i, j) ? char(255) : char(0));
    }
}

}  // namespace

std::vector<std::vector<int>> merge_close_objects(const Scene& scene, double stuck_gap_mm,
                                                  double resolution) {
    const auto rasters = rasterize_objects(scene, resolution);
    std::vector<std::vector<int>> out;
    for (const Blob& b : group_blobs(rasters, stuck_gap_mm, resolution)) out.push_back(blob_ids(b, rasters));
    return out;
}

std::vector<Detection> detect(const Scene& scene, const PerceptionConfig& config, Rng& rng) {
    config.validate();
    const auto rasters = rasterize_objects(scene, config.resolution);
    std::vector<Detection> out;
    for (const Blob& blob : group_blobs(rasters, config.stuck_gap_mm, config.resolution)) {
        if (!bernoulli(rng, config.p_detect)) continue;
        out.push_back({dominant_member(blob, rasters).food_class,
                       blob_bounds(blob, rasters).inflated(config.bbox_margin_mm),
                       blob_ids(blob, rasters)});
    }
    return out;
}

std::vector<PartialMask> oversegment(const RasterMask& blob_mask, const PerceptionConfig& config,
                                     Rng& rng) {
    const std::vector<Cell> cells = blob_mask.set_cells();
    if (cells.empty()) throw std::invalid_argument("oversegment of an empty blob");
    const int k = uniform_int(rng, config.partials_min, config.partials_max);
    std::vector<PartialMask> out;
    for (RasterMask& m : nearest_site_partition(blob_mask.grid(), cells, k, rng)) {
        out.push_back({std::move(m), std::nullopt, false});
    }

    std::vector<Cell> rest;
    for (int j = 0; j < blob_mask.height(); ++j) {
        for (int i = 0; i < blob_mask.width(); ++i) {
            if (!blob_mask.at(i, j)) rest.push_back({i, j});
        }
    }
    const int b = uniform_int(rng, 1, 3);
    if (!rest.empty()) {
        for (RasterMask& m : nearest_site_partition(blob_mask.grid(), rest, b, rng)) {
            out.push_back({std::move(m), std::nullopt, true});
        }
    }
    return out;
}

std::optional<FoodClass> classify_partial(const PartialMask& partial, FoodClass true_label,
                                          const PerceptionConfig& config, Rng& rng) {
    const bool correct = bernoulli(rng, config.p_label);
    const int wrong_pick = uniform_int(rng, 0, static_cast<int>(kAllClasses.size()) - 2);
    if (!partial.background) {
        if (correct) return true_label;
        return std::nullopt;
    }
    if (correct) return std::nullopt;
    // Any class other than the detection's own label.
    int seen = 0;
    for (FoodClass c : kAllClasses) {
        if (c == true_label) continue;
        if (seen++ == wrong_pick) return c;
    }
    return std::nullopt;
}

std::optional<RasterMask> fuse_masks(const std::vector<PartialMask>& partials,
                                     const std::vector<std::optional<FoodClass>>& labels,
                                     FoodClass target) {
    if (partials.size() != labels.size()) throw std::invalid_argument("one label per partial required");
    std::vector<RasterMask> chosen;
    for (std::size_t k = 0; k < partials.size(); ++k) {
        if (labels[k] && *labels[k] == target) chosen.push_back(partials[k].mask);
    }
    if (chosen.empty()) return std::nullopt;
    return mask_union(chosen);
}

Observation observe(const Scene& scene, FoodClass target_class, const PerceptionConfig& config,
                    Rng& rng) {
    return observe_impl(scene, target_class, config, rng);
}

Observation observe_perfect(const Scene& scene, FoodClass target_class,
                            const PerceptionConfig& config) {
    PerceptionConfig perfect = config;
    perfect.p_detect = 1.0;
    perfect.p_label = 1.0;
    Rng rng(0);
    return observe_impl(scene, target_class, perfect, rng);
}

void dump_observation(const Observation& obs, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json index = nlohmann::json::array();
    for (std::size_t k = 0; k < obs.objects.size(); ++k) {
        const FusedObject& f = obs.objects[k];
        const std::string file = "object_" + std::to_string(k) + ".pgm";
        write_pgm(f.mask, dir / file);
        index.push_back({{"file", file},
                         {"label", std::string(to_string(f.label))},
                         {"centroid_mm", {f.centroid.x, f.centroid.y}},
                         {"area_mm2", f.area},
                         {"origin_mm", {f.mask.origin().x, f.mask.origin().y}},
                         {"resolution_mm", f.mask.resolution()},
                         {"true_ids", f.true_ids}});
    }
    std::ofstream out(dir / "index.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "index.json").string());
    out << index.dump(2) << "\n";
}

}  // namespace chopsim
