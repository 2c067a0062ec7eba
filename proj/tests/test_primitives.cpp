#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "chopsim/perception.hpp"
#include "chopsim/primitives.hpp"
#include "oracles.hpp"

using namespace chopsim;

namespace {

Scene scene_of(std::vector<std::pair<FoodClass, Polygon>> shapes) {
    Scene s;
    for (auto& [c, p] : shapes) s.objects.push_back({s.next_id++, c, {1}, std::move(p), std::nullopt});
    return s;
}

Scene single(FoodClass c, Point2 at = {200, 150}) {
    return scene_of({{c, shape_template(c).base_polygon.translated(at)}});
}

bool all_inside(const Scene& s) {
    for (const SceneObject& o : s.objects) {
        for (Point2 p : o.shape.vertices()) {
            if (p.x < -1e-9 || p.y < -1e-9 || p.x > s.board.width + 1e-9 || p.y > s.board.height + 1e-9) {
                return false;
            }
        }
    }
    return true;
}

double gap(const Scene& s, int a, int b) {
    return oracle::vertex_edge_distance(s.at(a).shape.vertices(), s.at(b).shape.vertices());
}

// Two halves of a 40 mm square touching along x = 200.
Scene stuck_pair() {
    return scene_of({{FoodClass::Apple, Polygon({{180, 130}, {200, 130}, {200, 170}, {180, 170}})},
                     {FoodClass::Apple, Polygon({{200, 130}, {220, 130}, {220, 170}, {200, 170}})}});
}

// Binomial 99% half-width.
double ci99(double p, int n) { return 2.5758 * std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST(ExecuteCut, ForcedSuccessSplitsAndSeparates) {
    const Scene s = single(FoodClass::Apple);
    const ExecConfig c = perfect_exec();
    Rng rng(1);
    const CutResult r = execute_cut(s, 1, {{200, 150}, kPi / 2}, CutStyle::Even, c, rng);
    EXPECT_EQ(r.outcome, CutOutcome::Clean);
    ASSERT_EQ(r.piece_ids.size(), 2u);
    EXPECT_EQ(r.scene.objects.size(), 2u);
    EXPECT_NEAR(gap(r.scene, r.piece_ids[0], r.piece_ids[1]), c.separation_mm, 1e-3);
    EXPECT_NEAR(r.scene.total_area(), s.total_area(), 1e-6 * s.total_area());
    for (int id : r.piece_ids) EXPECT_EQ(r.scene.at(id).parent_id, 1);
}

TEST(ExecuteCut, StuckPiecesMergeInPerception) {
    ExecConfig c = perfect_exec();
    c.p_stuck_given_cut = {1.0, 1.0, 1.0};
    Rng rng(1);
    const CutResult r = execute_cut(single(FoodClass::Apple), 1, {{200, 150}, 0.3}, CutStyle::Even, c, rng);
    EXPECT_EQ(r.outcome, CutOutcome::Stuck);
    ASSERT_EQ(r.piece_ids.size(), 2u);
    EXPECT_LT(gap(r.scene, r.piece_ids[0], r.piece_ids[1]), 1e-9);
    const auto blobs = merge_close_objects(r.scene, PerceptionConfig{}.stuck_gap_mm);
    ASSERT_EQ(blobs.size(), 1u);
    EXPECT_EQ(blobs[0].size(), 2u);
}

TEST(ExecuteCut, MissLeavesSceneUnchanged) {
    const Scene s = single(FoodClass::Apple);
    Rng rng(1);
    const CutResult r = execute_cut(s, 1, {{20, 20}, 0.0}, CutStyle::Even, perfect_exec(), rng);
    EXPECT_EQ(r.outcome, CutOutcome::Missed);
    EXPECT_EQ(r.scene, s);
    EXPECT_TRUE(r.piece_ids.empty());
}

TEST(ExecuteCut, RollMovesCylinderAcrossItsAxis) {
    ExecConfig c;
    c.p_cut = {{{0, 0}, {0, 0}, {0, 0}}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Scene s = single(FoodClass::Cucumber);
        Rng rng(seed);
        const CutResult r = execute_cut(s, 1, {{200, 150}, 0.0}, CutStyle::Long, c, rng);
        ASSERT_EQ(r.outcome, CutOutcome::Rolled);
        const Point2 d = r.scene.at(1).shape.centroid() - s.at(1).shape.centroid();
        // The template's long axis is x, so the roll is along y.
        EXPECT_NEAR(d.x, 0.0, 1e-6);
        EXPECT_GT(std::fabs(d.y), 0.0);
        EXPECT_LE(std::fabs(d.y), c.roll_max_mm + 1e-9);
        EXPECT_NEAR(r.scene.at(1).shape.area(), s.at(1).shape.area(), 1e-9);
    }
}

TEST(ExecuteCut, UnknownTargetRejected) {
    Rng rng(0);
    EXPECT_THROW(execute_cut(single(FoodClass::Apple), 7, {{0, 0}, 0}, CutStyle::Even, ExecConfig{}, rng),
                 std::invalid_argument);
}

TEST(ExecuteCut, ConservationCountAndBarrierLaws) {
    const ExecConfig c;
    Rng rng(5);
    int outcomes[4] = {};
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        Scene s;
        try {
            s = generate_scene(SceneGenConfig{}, seed);
        } catch (const PlacementError&) {
            continue;
        }
        const SceneObject& t = s.objects[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(s.objects.size()) - 1))];
        const Box2 b = t.shape.bounds();
        // Some poses land off the object so every outcome shows up.
        const Point2 com{uniform(rng, b.min.x - 10, b.max.x + 10), uniform(rng, b.min.y - 10, b.max.y + 10)};
        const CutStyle style = kAllStyles[static_cast<std::size_t>(seed % 2)];
        const CutResult r = execute_cut(s, t.id, {com, uniform(rng, 0, kPi)}, style, c, rng);
        ++outcomes[static_cast<int>(r.outcome)];
        EXPECT_NEAR(r.scene.total_area(), s.total_area(), 1e-6 * s.total_area());
        EXPECT_TRUE(all_inside(r.scene));
        switch (r.outcome) {
            case CutOutcome::Clean:
            case CutOutcome::Stuck:
                EXPECT_GE(r.scene.objects.size(), s.objects.size() + 1);
                break;
            case CutOutcome::Rolled:
            case CutOutcome::Missed:
                EXPECT_EQ(r.scene.objects.size(), s.objects.size());
                break;
        }
    }
    EXPECT_GT(outcomes[static_cast<int>(CutOutcome::Clean)], 0);
    EXPECT_GT(outcomes[static_cast<int>(CutOutcome::Rolled)], 0);
    EXPECT_GT(outcomes[static_cast<int>(CutOutcome::Missed)], 0);
}

TEST(ExecuteCut, LineageIsSound) {
    const ExecConfig c;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Scene s;
        try {
            s = generate_scene(SceneGenConfig{}, seed);
        } catch (const PlacementError&) {
            continue;
        }
        std::map<int, std::optional<int>> parent;
        std::map<int, double> original_area;
        for (const SceneObject& o : s.objects) {
            parent[o.id] = o.parent_id;
            original_area[o.id] = o.shape.area();
        }
        Rng rng(seed);
        for (int step = 0; step < 12; ++step) {
            const SceneObject& t = s.objects[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(s.objects.size()) - 1))];
            s = execute_cut(s, t.id, {t.shape.centroid(), uniform(rng, 0, kPi)}, CutStyle::Even, c, rng).scene;
            for (const SceneObject& o : s.objects) parent.emplace(o.id, o.parent_id);
        }
        std::map<int, double> descendant_area;
        for (const SceneObject& o : s.objects) {
            int root = o.id;
            for (int hops = 0; parent.at(root); ++hops) {
                ASSERT_LT(hops, 64);
                root = *parent.at(root);
            }
            ASSERT_TRUE(original_area.count(root));
            descendant_area[root] += o.shape.area();
        }
        for (const auto& [root, area] : descendant_area) {
            EXPECT_LE(area, original_area[root] * (1 + 1e-6));
        }
    }
}

TEST(ExecuteCut, SuccessRatesMatchTable) {
    const ExecConfig c;
    const std::array<std::array<double, 2>, 3> expected{{{1.0, 1.0}, {1.0, 0.8}, {0.8, 0.4}}};
    for (FoodClass cls : kAllClasses) {
        for (CutStyle style : kAllStyles) {
            const double p = expected[index_of(cls)][static_cast<std::size_t>(style)];
            const Scene s = single(cls);
            Rng rng(derive_seed(31, index_of(cls) * 2 + static_cast<std::size_t>(style)));
            int ok = 0;
            for (int k = 0; k < 1000; ++k) {
                const auto r = execute_cut(s, 1, {s.at(1).shape.centroid(), kPi / 2}, style, c, rng);
                ok += r.outcome == CutOutcome::Clean || r.outcome == CutOutcome::Stuck;
            }
            EXPECT_NEAR(ok / 1000.0, p, std::max(0.03, ci99(p, 1000))) << to_string(cls) << ' ' << to_string(style);
        }
    }
}

TEST(ExecuteDisturb, SeparatesStuckPair) {
    ExecConfig c;
    c.p_disturb = 1.0;
    Rng rng(4);
    const DisturbResult r = execute_disturb(stuck_pair(), CutPose{{200, 150}, kPi / 2}, c, rng);
    EXPECT_TRUE(r.applied);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_GT(gap(r.scene, 1, 2), c.stuck_gap_mm);
    PerceptionConfig pc;
    pc.p_detect = pc.p_label = 1.0;
    Rng obs_rng(0);
    EXPECT_EQ(observe(r.scene, FoodClass::Apple, pc, obs_rng).n_target(), 2);
    EXPECT_TRUE(all_inside(r.scene));
}

TEST(ExecuteDisturb, ZeroRateLeavesSceneUnchanged) {
    ExecConfig c;
    c.p_disturb = 0.0;
    Rng rng(4);
    const Scene s = stuck_pair();
    const DisturbResult r = execute_disturb(s, CutPose{{200, 150}, kPi / 2}, c, rng);
    EXPECT_FALSE(r.applied);
    EXPECT_EQ(r.scene, s);
}

TEST(ExecuteDisturb, RequiresPriorPose) {
    Rng rng(0);
    EXPECT_THROW(execute_disturb(stuck_pair(), std::nullopt, ExecConfig{}, rng), std::invalid_argument);
}

TEST(ExecuteDisturb, SuccessRateMatchesConfig) {
    const ExecConfig c;
    Rng rng(123);
    int separated = 0;
    for (int k = 0; k < 1000; ++k) {
        const DisturbResult r = execute_disturb(stuck_pair(), CutPose{{200, 150}, kPi / 2}, c, rng);
        separated += gap(r.scene, 1, 2) > c.stuck_gap_mm;
    }
    EXPECT_NEAR(separated / 1000.0, 0.667, ci99(0.667, 1000));
}

TEST(StuckPairsNear, FindsOnlyPairsAtThePoint) {
    Scene s = stuck_pair();
    s.objects.push_back({3, FoodClass::Apple, {1}, rectangle({350, 50}, 20, 20), std::nullopt});
    s.objects.push_back({4, FoodClass::Apple, {1}, rectangle({371, 50}, 20, 20), std::nullopt});
    s.next_id = 5;
    EXPECT_EQ(stuck_pairs_near(s, {200, 150}, 2.0), (std::vector<std::pair<int, int>>{{1, 2}}));
    EXPECT_EQ(stuck_pairs_near(s, {360, 50}, 2.0), (std::vector<std::pair<int, int>>{{3, 4}}));
}

namespace {

// Target apple at (150,150); cucumber interferer due east across the blade.
struct PushSetup {
    Scene scene;
    OrientedRect footprint{{150, 150}, 200, 5, 0.0};
};

PushSetup push_setup() {
    PushSetup p;
    p.scene = scene_of({{FoodClass::Apple, regular_polygon({150, 150}, 30, 48)},
                        {FoodClass::Cucumber, rectangle({215, 150}, 30, 30)}});
    return p;
}

}  // namespace

TEST(ExecutePush, SuccessMovesEastAndClears) {
    ExecConfig c;
    c.p_push = 1.0;
    const PushSetup p = push_setup();
    Rng rng(0);
    const PushResult r = execute_push(p.scene, 2, 1, p.footprint, c, rng);
    EXPECT_TRUE(r.drew_success);
    EXPECT_TRUE(r.cleared);
    EXPECT_GT(r.displacement.x, 0.0);
    EXPECT_NEAR(r.displacement.y, 0.0, 1e-9);
    EXPECT_FALSE(blade_overlap(p.footprint, rasterize(r.scene.at(2).shape, 1.0)));
}

TEST(ExecutePush, FailureMovesOneStep) {
    ExecConfig c;
    c.p_push = 0.0;
    const PushSetup p = push_setup();
    Rng rng(0);
    const PushResult r = execute_push(p.scene, 2, 1, p.footprint, c, rng);
    EXPECT_FALSE(r.drew_success);
    EXPECT_NEAR(r.displacement.x, c.push_step_mm, 1e-9);
    EXPECT_NEAR(r.displacement.y, 0.0, 1e-9);
}

TEST(ExecutePush, DisplacementIsCollinearWithCentroids) {
    ExecConfig c;
    c.p_push = 1.0;
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        const double a = uniform(rng, 0, 2 * kPi);
        const Point2 t{200, 150};
        const Point2 i{t.x + 45 * std::cos(a), t.y + 45 * std::sin(a)};
        const Scene s = scene_of({{FoodClass::Apple, regular_polygon(t, 20, 32)},
                                  {FoodClass::Apple, regular_polygon(i, 15, 32)}});
        const OrientedRect blade(t, 200, 5, uniform(rng, 0, kPi));
        const PushResult r = execute_push(s, 2, 1, blade, c, rng);
        const Point2 u = i - t;
        EXPECT_NEAR(cross(u, r.displacement) / norm(u), 0.0, 1e-6);
        EXPECT_GE(dot(u, r.displacement), 0.0);
        EXPECT_TRUE(all_inside(r.scene));
    }
}

TEST(ExecutePush, IdenticalIdsRejected) {
    const PushSetup p = push_setup();
    Rng rng(0);
    EXPECT_THROW(execute_push(p.scene, 1, 1, p.footprint, ExecConfig{}, rng), std::invalid_argument);
}

TEST(ExecutePush, SuccessRateMatchesConfig) {
    const ExecConfig c;
    const PushSetup p = push_setup();
    Rng rng(77);
    int cleared = 0;
    for (int k = 0; k < 1000; ++k) cleared += execute_push(p.scene, 2, 1, p.footprint, c, rng).cleared;
    EXPECT_NEAR(cleared / 1000.0, 0.692, ci99(0.692, 1000));
}

TEST(ExecConfig, ValidateRejectsBadValues) {
    ExecConfig c;
    c.p_push = -0.1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.separation_mm = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.roll_min_mm = 70.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    BladeSpec b;
    b.width = 0.0;
    EXPECT_THROW(b.validate(), std::invalid_argument);
}

TEST(PerfectExec, ForcesEverySuccess) {
    const ExecConfig c = perfect_exec();
    for (const auto& row : c.p_cut) {
        for (double p : row) EXPECT_EQ(p, 1.0);
    }
    for (double p : c.p_stuck_given_cut) EXPECT_EQ(p, 0.0);
    EXPECT_EQ(c.p_push, 1.0);
    EXPECT_EQ(c.p_disturb, 1.0);
}

TEST(CutNames, RoundTrip) {
    for (CutStyle s : kAllStyles) EXPECT_EQ(parse_cut_style(to_string(s)), s);
    EXPECT_EQ(parse_cut_style("EVEN"), CutStyle::Even);
    EXPECT_FALSE(parse_cut_style("diagonal"));
    EXPECT_EQ(to_string(CutOutcome::Stuck), "stuck");
}
