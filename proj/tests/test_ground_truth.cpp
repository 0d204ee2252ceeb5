#include <doctest.h>

#include "imagimap/errors.hpp"
#include "imagimap/ground_truth.hpp"
#include "imagimap/scene_sim.hpp"
#include "oracles.hpp"

using namespace imagimap;

TEST_CASE("object ground truth equals the three-way intersection oracle")
{
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 20 + static_cast<int>(rng.Index(30));
        const int h = 20 + static_cast<int>(rng.Index(30));
        GtConfig cfg;
        cfg.mSegKernel = 1 + 2 * static_cast<int>(rng.Index(6));
        const GridMap occ = oracle::RandomBlobs(rng, w, h, 6, 8).ToGrid(0.1);
        const GridMap label = oracle::RandomBlobs(rng, w, h, 6, 8).ToGrid(0.1);
        const GridMap seg = oracle::RandomMask(rng, w, h, 0.02).ToGrid(0.1);
        CHECK(BuildObjectGt(occ, label, seg, cfg) ==
              oracle::GroundTruth(occ, label, seg, cfg.mSegKernel, cfg.mThreshold));
    }
}

TEST_CASE("imaginable filter and seen-object mask match their oracles")
{
    Rng rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        GtConfig cfg;
        cfg.mDelta = 1 + 2 * static_cast<int>(rng.Index(8));
        cfg.mEpsilon = 1 + 2 * static_cast<int>(rng.Index(8));
        const auto object = oracle::RandomBlobs(rng, 33, 33, 4, 6);
        const auto seen = oracle::RandomMask(rng, 33, 33, 0.5);
        CHECK(ImaginableFilter(object, seen, cfg) ==
              oracle::DilatedProduct(object, seen, cfg.mDelta));
        CHECK(SeenStar(object.ToGrid(0.1), seen, cfg) ==
              oracle::DilatedProduct(object, seen, cfg.mEpsilon));
    }
}

TEST_CASE("kernel sizes must be odd")
{
    GtConfig cfg;
    CHECK_NOTHROW(cfg.Validate());
    CHECK(cfg.mSegKernel == 31);
    CHECK(cfg.mDelta == 51);
    CHECK(cfg.mEpsilon == 31);
    cfg.mDelta = 50;
    CHECK_THROWS_AS(cfg.Validate(), ParameterError);
}

TEST_CASE("object hidden from view produces an empty target")
{
    SceneSpec scene;
    scene.mExtentX = 6.0;
    scene.mExtentY = 6.0;
    scene.mObjects.push_back({ ObjectClass::Bed, 4.5, 3.0, 0.0, 2.0, 0.6 });
    const SceneRaster r = Rasterize(scene, 0.1);
    const GtConfig cfg;
    const BinaryMask gt = BuildSceneGt(r, static_cast<int>(ObjectClass::Bed), cfg);
    CHECK(gt == r.mLayers.ClassLayer(static_cast<int>(ObjectClass::Bed)).Threshold(0.5));

    /* Facing away from the bed */
    const Pose away = CellCenterPose(20, 30, 0.1, 3.14159);
    const auto obsAway = Observe(r, away, SensorSpec {});
    const auto none = MakeTarget(gt, away, obsAway, static_cast<int>(ObjectClass::Bed), cfg);
    CHECK(none.mTargetCrop.Threshold(0.5).Count() == 0);
    CHECK(none.mFilter.Count() == 0);
    CHECK(none.mSeenStar.Count() == 0);

    /* Facing it */
    const Pose toward = CellCenterPose(20, 30, 0.1, 0.0);
    const auto obs = Observe(r, toward, SensorSpec {});
    const auto t = MakeTarget(gt, toward, obs, static_cast<int>(ObjectClass::Bed), cfg);
    const auto target = t.mTargetCrop.Threshold(0.5);
    CHECK(target.Any());
    CHECK(target.IsSubsetOf(t.mFilter));
    CHECK(target.IsSubsetOf(CropEgo(gt.ToGrid(0.1), toward, 65).Threshold(0.5)));
    /* The unseen back half of the bed is part of the target */
    CHECK(target.Count() > obs.mClassVisible[2].Threshold(0.5).Count());
    CHECK(t.mSeenStar.IsSubsetOf(t.mFilter));
}
