#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "chopsim/geometry.hpp"
#include "chopsim/rng.hpp"
#include "chopsim/scene.hpp"

namespace chopsim {

enum class CutStyle { Even, Long };

inline constexpr std::array<CutStyle, 2> kAllStyles{CutStyle::Even, CutStyle::Long};

std::string_view to_string(CutStyle s);
std::optional<CutStyle> parse_cut_style(std::string_view name);

struct BladeSpec {
    double length = 200.0;
    double width = 5.0;

    void validate() const;
};

struct CutPose {
    Point2 com;
    double angle = 0.0;  // [0, pi)
};

OrientedRect blade_footprint(const CutPose& pose, const BladeSpec& blade);

enum class CutOutcome { Clean, Stuck, Rolled, Missed };

std::string_view to_string(CutOutcome o);

/// Stochastic executor parameters. The cut table is indexed [class][style].
struct ExecConfig {
    std::array<std::array<double, 2>, 3> p_cut{{{1.0, 1.0}, {1.0, 0.8}, {0.8, 0.4}}};
    std::array<double, 3> p_stuck_given_cut{0.1, 0.0, 0.0};
    double p_push = 0.692;
    double p_disturb = 0.667;
    double separation_mm = 6.0;
    double roll_min_mm = 20.0;
    double roll_max_mm = 60.0;
    double push_clearance_mm = 5.0;
    double push_step_mm = 5.0;
    int push_max_steps = 40;
    /// Gap at or below which two pieces count as stuck together.
    double stuck_gap_mm = 2.0;
    /// Translations never bring objects closer than this unless they already were.
    double keep_out_mm = 4.0;
    double resolution = 1.0;

    double cut_probability(FoodClass c, CutStyle s) const {
        return p_cut[index_of(c)][static_cast<std::size_t>(s)];
    }
    void validate() const;
};

/// Every success probability at 1, stuck probability at 0.
ExecConfig perfect_exec(ExecConfig base = {});

struct CutResult {
    Scene scene;
    CutOutcome outcome = CutOutcome::Missed;
    std::vector<int> piece_ids;
};

/// Chops `target_id` along the line through pose.com at pose.angle.
CutResult execute_cut(const Scene& scene, int target_id, const CutPose& pose, CutStyle style,
                      const ExecConfig& config, Rng& rng);

struct DisturbResult {
    Scene scene;
    /// Whether the perturbation fired (the Bernoulli draw succeeded).
    bool applied = false;
    /// Stuck pairs found next to the pose, as (id, id).
    std::vector<std::pair<int, int>> pairs;
};

/// Returns to the last cut pose and shoves apart pieces stuck there.
DisturbResult execute_disturb(const Scene& scene, const std::optional<CutPose>& last_pose,
                              const ExecConfig& config, Rng& rng);

/// Pairs of pieces within stuck_gap_mm of each other, both within
/// 2 * stuck_gap_mm of `point`.
std::vector<std::pair<int, int>> stuck_pairs_near(const Scene& scene, Point2 point,
                                                  double stuck_gap_mm);

struct PushResult {
    Scene scene;
    bool drew_success = false;
    /// Interferer mask no longer meets the blade footprint grown by the clearance.
    bool cleared = false;
    Point2 displacement;
};

/// Pushes `interferer_id` away from `target_id` until it clears `footprint`.
PushResult execute_push(const Scene& scene, int interferer_id, int target_id,
                        const OrientedRect& footprint, const ExecConfig& config, Rng& rng);

}  // namespace chopsim
