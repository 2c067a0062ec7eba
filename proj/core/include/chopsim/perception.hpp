#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "chopsim/geometry.hpp"
#include "chopsim/rng.hpp"
#include "chopsim/scene.hpp"

namespace chopsim {

/// Stand-in for the detector and segmenter. Every stochastic decision is a
/// Bernoulli draw against one of these rates.
struct PerceptionConfig {
    double p_detect = 0.934;
    double p_label = 0.975;
    int partials_min = 1;
    int partials_max = 1;
    double stuck_gap_mm = 2.0;
    double resolution = 1.0;
    double bbox_margin_mm = 5.0;

    void validate() const;
};

/// Two-class defaults (apple, cucumber).
PerceptionConfig two_class_perception();
/// Three-class defaults (apple, cucumber, carrot).
PerceptionConfig three_class_perception();

struct Detection {
    FoodClass label = FoodClass::Apple;
    Box2 bbox;
    /// Ground-truth linkage, used only for scoring.
    std::vector<int> true_ids;
};

struct PartialMask {
    RasterMask mask;
    /// Scene object the partial came from; nullopt for background.
    std::optional<int> origin_object;
    bool background = false;
};

struct FusedObject {
    FoodClass label = FoodClass::Apple;
    RasterMask mask;
    Point2 centroid;
    double area = 0.0;
    Box2 bbox;
    std::vector<int> true_ids;
};

struct Observation {
    std::vector<FusedObject> objects;
    std::map<FoodClass, int> count_by_class;
    std::vector<Detection> detections;
    FoodClass target_class = FoodClass::Apple;

    int count(FoodClass c) const;
    /// Observed count of the target class.
    int n_target() const { return count(target_class); }
};

/// Groups objects whose masks come within `stuck_gap_mm`: two masks are close
/// when some pair of set cells lies within stuck_gap_mm + resolution center to
/// center, i.e. they touch after dilating one by stuck_gap_mm. Blobs are the
/// transitive closure, ordered by blob area (largest first, ties by smallest id).
std::vector<std::vector<int>> merge_close_objects(const Scene& scene, double stuck_gap_mm,
                                                  double resolution = 1.0);

std::vector<Detection> detect(const Scene& scene, const PerceptionConfig& config, Rng& rng);

/// Partitions the blob into k nearest-site partials and emits 1-3 background
/// partials from the rest of the blob grid. Object partials come first.
std::vector<PartialMask> oversegment(const RasterMask& blob_mask, const PerceptionConfig& config,
                                     Rng& rng);

/// Consumes exactly two draws per call.
std::optional<FoodClass> classify_partial(const PartialMask& partial, FoodClass true_label,
                                          const PerceptionConfig& config, Rng& rng);

std::optional<RasterMask> fuse_masks(const std::vector<PartialMask>& partials,
                                     const std::vector<std::optional<FoodClass>>& labels,
                                     FoodClass target);

/// Full pipeline: merge -> detect -> oversegment -> classify -> fuse.
/// Every class is observed, since collision checks need the whole board;
/// `target_class` selects the count reported by n_target().
Observation observe(const Scene& scene, FoodClass target_class, const PerceptionConfig& config,
                    Rng& rng);

/// Noiseless observation (every detection kept, every partial labeled).
Observation observe_perfect(const Scene& scene, FoodClass target_class,
                            const PerceptionConfig& config);

/// Writes one PGM per fused object plus index.json into `dir`.
void dump_observation(const Observation& obs, const std::filesystem::path& dir);

}  // namespace chopsim
