#include <doctest.h>

#include <cmath>
#include <numbers>

#include "imagimap/errors.hpp"
#include "imagimap/scene_io.hpp"
#include "imagimap/scene_sim.hpp"
#include "oracles.hpp"

using namespace imagimap;

TEST_CASE("scene generation is deterministic in the seed")
{
    const SceneParams params;
    CHECK(SceneToJson(GenerateScene(42, params)) == SceneToJson(GenerateScene(42, params)));
    CHECK(SceneToJson(GenerateScene(42, params)) != SceneToJson(GenerateScene(43, params)));
}

TEST_CASE("generated scenes respect extent, counts and clearance")
{
    const SceneParams params;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const SceneSpec scene = GenerateScene(seed, params);
        CHECK(scene.mExtentX >= params.mExtentMin - 0.05);
        CHECK(scene.mExtentX <= params.mExtentMax + 0.05);
        CHECK(scene.mExtentY >= params.mExtentMin - 0.05);
        CHECK(scene.mWalls.size() >= 4);

        int counts[kNumClasses] = { 0, 0, 0 };
        for (const auto& o : scene.mObjects)
            ++counts[static_cast<int>(o.mClass)];
        for (int c = 0; c < kNumClasses; ++c) {
            CHECK(counts[c] <= params.mCountMax[c]);
            if (!scene.mPlacementWarning)
                CHECK(counts[c] >= params.mCountMin[c]);
        }

        for (std::size_t i = 0; i < scene.mObjects.size(); ++i) {
            const Rect box = scene.mObjects[i].BoundingBox();
            CHECK(box.mX0 > 0.0);
            CHECK(box.mY0 > 0.0);
            CHECK(box.mX1 < scene.mExtentX);
            CHECK(box.mY1 < scene.mExtentY);
            for (std::size_t j = i + 1; j < scene.mObjects.size(); ++j)
                CHECK(box.Distance(scene.mObjects[j].BoundingBox()) >= params.mClearance - 1e-9);
        }
    }
}

TEST_CASE("footprints sit strictly inside their bounding boxes")
{
    for (int c = 0; c < kNumClasses; ++c) {
        for (const double rot : { 0.0, std::numbers::pi / 2, std::numbers::pi,
                                  3 * std::numbers::pi / 2 }) {
            ObjectInstance obj { static_cast<ObjectClass>(c), 3.0, 3.0, rot, 1.0, 0.6 };
            const Rect box = obj.BoundingBox();
            double area = 0.0;
            for (const auto& p : obj.Parts()) {
                CHECK(p.mX0 >= box.mX0 - 1e-12);
                CHECK(p.mX1 <= box.mX1 + 1e-12);
                CHECK(p.mY0 >= box.mY0 - 1e-12);
                CHECK(p.mY1 <= box.mY1 + 1e-12);
                area += p.Width() * p.Height();
            }
            if (c == static_cast<int>(ObjectClass::Table))
                CHECK(area == doctest::Approx(box.Width() * box.Height()));
            else
                CHECK(area < box.Width() * box.Height() - 1e-6);
        }
    }
}

TEST_CASE("rasterized scenes keep a free cell and consistent layers")
{
    const SceneParams params;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const SceneRaster r = Rasterize(GenerateScene(seed, params), 0.1);
        CHECK(r.FreeMask().Any());
        for (int c = 0; c < kNumClasses; ++c) {
            const auto layer = r.mLayers.ClassLayer(c).Threshold(0.5);
            CHECK(layer.IsSubsetOf(r.mLayers.Occupancy().Threshold(0.5)));
            CHECK(layer.IsSubsetOf(r.mBoxLayers[c].Threshold(0.5)));
        }
        CHECK(r.mWalls.Threshold(0.5).IsSubsetOf(r.FreeMask().Not()));
    }
}

TEST_CASE("oversized maps are rejected")
{
    SceneSpec scene;
    scene.mExtentX = 50.0;
    scene.mExtentY = 5.0;
    CHECK_THROWS_AS(Rasterize(scene, 0.02), SizeError);
    CHECK_NOTHROW(Rasterize(scene, 0.1));
}

TEST_CASE("invalid scene and sensor parameters are rejected")
{
    SceneParams p;
    p.mExtentMin = 3.0;
    CHECK_THROWS_AS(GenerateScene(1, p), ParameterError);
    p = SceneParams {};
    p.mCountMin[0] = 5;
    CHECK_THROWS_AS(GenerateScene(1, p), ParameterError);

    SensorSpec s;
    s.mEgoSize = 64;
    CHECK_THROWS_AS(ValidateSensorSpec(s), ParameterError);
    s = SensorSpec {};
    s.mMaxRange = 0.0;
    CHECK_THROWS_AS(ValidateSensorSpec(s), ParameterError);
}

namespace {

/* A room with one table straight ahead of the agent */
SceneSpec TableRoom()
{
    SceneSpec scene;
    scene.mSeed = 7;
    scene.mExtentX = 6.0;
    scene.mExtentY = 6.0;
    scene.mWalls = { { 0.05, 0.05, 5.95, 0.05 }, { 5.95, 0.05, 5.95, 5.95 },
                     { 5.95, 5.95, 0.05, 5.95 }, { 0.05, 5.95, 0.05, 0.05 } };
    scene.mObjects.push_back({ ObjectClass::Table, 3.0, 3.0, 0.0, 1.0, 0.6 });
    return scene;
}

} // namespace

TEST_CASE("observation sees the front of an object but not its back")
{
    const SceneRaster r = Rasterize(TableRoom(), 0.1);
    const Pose pose = CellCenterPose(10, 30, 0.1, 0.0);
    const auto world = ObserveWorld(r, pose, SensorSpec {});
    const auto table = world.mClassVisible[static_cast<int>(ObjectClass::Table)].Threshold(0.5);
    CHECK(table.Any());
    const auto footprint = r.mLayers.ClassLayer(static_cast<int>(ObjectClass::Table)).Threshold(0.5);
    CHECK(table.IsSubsetOf(footprint));
    CHECK(table.Count() < footprint.Count());
    /* Only the near face (smallest x) of the table is hit */
    int minX = 1000;
    for (int y = 0; y < r.Height(); ++y)
        for (int x = 0; x < r.Width(); ++x)
            if (footprint.Get(x, y))
                minX = std::min(minX, x);
    for (int y = 0; y < r.Height(); ++y)
        for (int x = 0; x < r.Width(); ++x)
            if (table.Get(x, y))
                CHECK(x == minX);
}

TEST_CASE("observation invariants")
{
    const SceneParams params;
    const SensorSpec sensor;
    Rng rng(17);
    for (std::uint64_t seed = 200; seed < 206; ++seed) {
        const SceneRaster r = Rasterize(GenerateScene(seed, params), 0.1);
        const auto free = r.FreeMask();
        for (int k = 0; k < 5; ++k) {
            int x, y;
            do {
                x = static_cast<int>(rng.Index(r.Width()));
                y = static_cast<int>(rng.Index(r.Height()));
            } while (!free.Get(x, y));
            const Pose pose = CellCenterPose(x, y, 0.1, rng.Uniform(-3.1, 3.1));
            const auto world = ObserveWorld(r, pose, sensor);
            const auto seen = world.mSeen.Threshold(0.5);
            const auto hits = world.mOccVisible.Threshold(0.5);
            CHECK(hits.IsSubsetOf(seen));
            CHECK(hits.IsSubsetOf(free.Not()));
            /* Cells passed through are free */
            CHECK(seen.And(hits.Not()).IsSubsetOf(free));
            for (int c = 0; c < kNumClasses; ++c) {
                const auto cls = world.mClassVisible[c].Threshold(0.5);
                CHECK(cls.IsSubsetOf(hits));
                CHECK(cls.IsSubsetOf(r.mLayers.ClassLayer(c).Threshold(0.5)));
            }
            /* Range and field of view */
            for (int cy = 0; cy < r.Height(); ++cy) {
                for (int cx = 0; cx < r.Width(); ++cx) {
                    if (!seen.Get(cx, cy))
                        continue;
                    const double dx = (cx + 0.5) * 0.1 - pose.mX;
                    const double dy = (cy + 0.5) * 0.1 - pose.mY;
                    CHECK(std::hypot(dx, dy) <= sensor.mMaxRange + 0.1);
                }
            }

            const auto obs = Observe(r, pose, sensor);
            CHECK(obs.mSeen.Width() == sensor.mEgoSize);
            CHECK(obs.mSeen == CropEgo(world.mSeen, pose, sensor.mEgoSize));
            CHECK(obs.mOccVisible == CropEgo(world.mOccVisible, pose, sensor.mEgoSize));
        }
    }
}

TEST_CASE("seen area agrees with a Bresenham line-of-sight oracle")
{
    const SceneParams params;
    const SensorSpec sensor;
    Rng rng(5);
    std::size_t agree = 0;
    std::size_t total = 0;
    for (std::uint64_t seed = 300; seed < 306; ++seed) {
        const SceneRaster r = Rasterize(GenerateScene(seed, params), 0.1);
        const auto free = r.FreeMask();
        int ax, ay;
        do {
            ax = static_cast<int>(rng.Index(r.Width()));
            ay = static_cast<int>(rng.Index(r.Height()));
        } while (!free.Get(ax, ay));
        const Pose pose = CellCenterPose(ax, ay, 0.1, rng.Uniform(-3.1, 3.1));
        const auto seen = ObserveWorld(r, pose, sensor).mSeen.Threshold(0.5);

        for (int cy = 0; cy < r.Height(); ++cy) {
            for (int cx = 0; cx < r.Width(); ++cx) {
                const double dx = (cx + 0.5) * 0.1 - pose.mX;
                const double dy = (cy + 0.5) * 0.1 - pose.mY;
                const double d = std::hypot(dx, dy);
                const double off = std::abs(NormalizeAngle(std::atan2(dy, dx) - pose.mTheta));
                if (d < 0.3 || d > sensor.mMaxRange - 0.3 || off > sensor.mFov / 2 - 0.05)
                    continue;
                bool clear = true;
                const auto line = oracle::Line(ax, ay, cx, cy);
                for (std::size_t i = 1; i + 1 < line.size() && clear; ++i)
                    clear = free.Get(line[i].first, line[i].second);
                ++total;
                agree += clear == seen.Get(cx, cy);
            }
        }
    }
    REQUIRE(total > 1000);
    CHECK(static_cast<double>(agree) / static_cast<double>(total) > 0.97);
}

TEST_CASE("observing from an obstacle or outside the map fails")
{
    const SceneRaster r = Rasterize(TableRoom(), 0.1);
    CHECK_THROWS_AS(Observe(r, Pose(3.0, 3.0, 0.0), SensorSpec {}), PreconditionError);
    CHECK_THROWS_AS(Observe(r, Pose(-1.0, 3.0, 0.0), SensorSpec {}), PreconditionError);
}

TEST_CASE("scene json round trip")
{
    const SceneSpec scene = GenerateScene(77, SceneParams {});
    const std::string text = SceneToJson(scene);
    CHECK(SceneToJson(SceneFromJson(text)) == text);
    CHECK_THROWS_AS(SceneFromJson("{\"seed\": 1}"), FormatError);
    CHECK_THROWS_AS(SceneFromJson("not json"), FormatError);
}
