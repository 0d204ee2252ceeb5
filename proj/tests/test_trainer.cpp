#include <doctest.h>

#include <set>

#include "imagimap/checkpoint.hpp"
#include "imagimap/errors.hpp"
#include "imagimap/trainer.hpp"
#include "oracles.hpp"

using namespace imagimap;

namespace {

TrainingSample Tagged(int scene, float marker)
{
    TrainingSample s;
    s.mSceneId = scene;
    s.mObs.mSeen = GridMap(1, 1, 0.1, marker);
    return s;
}

struct SmallSetup
{
    std::vector<SceneSpec> mScenes;
    SensorSpec             mSensor;
    GtConfig               mGt;
    TrainConfig            mCfg;

    SmallSetup()
    {
        for (std::uint64_t s = 500; s < 503; ++s)
            mScenes.push_back(GenerateScene(s, SceneParams {}));
        mSensor.mEgoSize = 31;
        mSensor.mMaxRange = 1.5;
        mSensor.mRayCount = 61;
        mGt.mDelta = 11;
        mGt.mEpsilon = 9;
        mGt.mSegKernel = 5;
        mCfg.mArch = { 2, 4, 4, 2 };
        mCfg.mBatchSize = 4;
        mCfg.mReplayCapacity = 10;
        mCfg.mScenesPerBatch = 2;
        mCfg.mUpdateInterval = 2;
        mCfg.mUpdateBatches = 3;
        mCfg.mEpsilon = 9;
        mCfg.mSteps = 12;
        mCfg.mSeed = 3;
        mCfg.mLearningRate = 0.01;
    }
};

} // namespace

TEST_CASE("replay buffer evicts the oldest samples")
{
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i)
        buf.Push(Tagged(0, static_cast<float>(i) / 10.0f));
    CHECK(buf.Size() == 3);
    CHECK(buf.At(0).mObs.mSeen.At(0, 0) == doctest::Approx(0.2));
    CHECK(buf.At(2).mObs.mSeen.At(0, 0) == doctest::Approx(0.4));
    CHECK_THROWS_AS(buf.At(3), ParameterError);
    CHECK_THROWS_AS(ReplayBuffer(0), ParameterError);
}

TEST_CASE("replay batches are unique and spread over scenes")
{
    ReplayBuffer buf(200);
    for (int i = 0; i < 200; ++i)
        buf.Push(Tagged(i % 20, 0.0f));
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto batch = buf.SampleBatch(rng, 16, 8);
        CHECK(batch.size() == 16);
        CHECK(std::set<std::size_t>(batch.begin(), batch.end()).size() == 16);
        std::set<int> scenes;
        for (const auto i : batch)
            scenes.insert(buf.At(i).mSceneId);
        CHECK(scenes.size() == 8);
    }

    /* Fewer distinct scenes than requested: use them all, fill from the rest */
    ReplayBuffer few(10);
    for (int i = 0; i < 10; ++i)
        few.Push(Tagged(i < 8 ? 0 : 1, 0.0f));
    const auto batch = few.SampleBatch(rng, 6, 4);
    CHECK(batch.size() == 6);
    CHECK(std::set<std::size_t>(batch.begin(), batch.end()).size() == 6);

    /* Small buffer: batch shrinks to its size */
    CHECK(few.SampleBatch(rng, 50, 4).size() == 10);

    Rng a(9), b(9);
    CHECK(buf.SampleBatch(a, 16, 8) == buf.SampleBatch(b, 16, 8));
}

TEST_CASE("samples are a pure function of seed, class and index")
{
    SmallSetup s;
    const auto world = TrainingWorld::Build(s.mScenes, 0.1, s.mGt);
    const auto a = CollectSample(world, 1, s.mSensor, s.mGt, s.mCfg, 17);
    const auto b = CollectSample(world, 1, s.mSensor, s.mGt, s.mCfg, 17);
    CHECK(a.mObs.mSeen == b.mObs.mSeen);
    CHECK(a.mTarget.mTargetCrop == b.mTarget.mTargetCrop);
    CHECK(a.mSceneId == b.mSceneId);

    TrainConfig allPositive = s.mCfg;
    allPositive.mPositiveFraction = 1.0;
    int visible = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto smp = CollectSample(world, 0, s.mSensor, s.mGt, allPositive, i);
        visible += smp.mObs.mClassVisible[0].Threshold(0.5).Any();
    }
    CHECK(visible >= 18);
}

TEST_CASE("sample weights follow the weight formulas")
{
    SmallSetup s;
    const auto world = TrainingWorld::Build(s.mScenes, 0.1, s.mGt);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto smp = CollectSample(world, 2, s.mSensor, s.mGt, s.mCfg, i);
        const auto w = ComputeSampleWeights(smp.mTarget, s.mCfg);
        const GridMap label = smp.mTarget.mTargetCrop.Threshold(0.5).ToGrid(0.1);
        const auto ref = oracle::WeightMatrices(label, smp.mTarget.mSeenStar, 30.0, 10.0, true);
        CHECK(w.mWeights.mValues == ref.mCombined);
        CHECK(w.mAlpha == ref.mAlpha);
        CHECK(w.mGamma == ref.mGamma);
    }
}

TEST_CASE("collection schedule")
{
    SmallSetup s;
    const auto world = TrainingWorld::Build(s.mScenes, 0.1, s.mGt);
    UnitTrainer t(world, 0, s.mSensor, s.mGt, s.mCfg);
    CHECK(t.RequiredSamples(0) == 4 + 2);
    CHECK(t.RequiredSamples(2) == 4 + 2);
    CHECK(t.RequiredSamples(3) == 4 + 4);
    CHECK(t.RequiredSamples(7) == 4 + 6);
}

TEST_CASE("resumed training continues bit-exactly")
{
    SmallSetup s;
    const auto world = TrainingWorld::Build(s.mScenes, 0.1, s.mGt);

    UnitTrainer straight(world, 1, s.mSensor, s.mGt, s.mCfg);
    straight.Run(12);

    UnitTrainer first(world, 1, s.mSensor, s.mGt, s.mCfg);
    first.Run(7);
    /* Round trip through the on-disk state format */
    const TrainingState saved = DecodeTrainingState(EncodeTrainingState(first.State()));
    CHECK(saved == first.State());
    UnitTrainer second(world, 1, s.mSensor, s.mGt, s.mCfg, saved);
    second.Run(12);

    CHECK(second.State() == straight.State());
    REQUIRE(second.Curve().size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(second.Curve()[i].mStep == straight.Curve()[7 + i].mStep);
        CHECK(second.Curve()[i].mLoss == straight.Curve()[7 + i].mLoss);
    }
    CHECK(EncodeUnit(second.State().mUnit) == EncodeUnit(straight.State().mUnit));
}

TEST_CASE("parallel class training matches sequential training")
{
    SmallSetup s;
    s.mCfg.mSteps = 4;
    const auto seq = TrainUnits(s.mScenes, { 0, 1, 2 }, 0.1, s.mSensor, s.mGt, s.mCfg, 1);
    const auto par = TrainUnits(s.mScenes, { 0, 1, 2 }, 0.1, s.mSensor, s.mGt, s.mCfg, 3);
    CHECK(seq.mStates == par.mStates);
    CHECK(seq.mCurves.size() == 3);
    CHECK(seq.mCurves[0].size() == 4);
}

TEST_CASE("repeated steps on a fixed batch reduce the loss")
{
    SmallSetup s;
    const auto world = TrainingWorld::Build(s.mScenes, 0.1, s.mGt);
    TrainConfig cfg = s.mCfg;
    cfg.mPositiveFraction = 1.0;
    std::vector<TrainingSample> samples;
    for (std::uint64_t i = 0; i < 4; ++i)
        samples.push_back(CollectSample(world, 2, s.mSensor, s.mGt, cfg, i));
    std::vector<const TrainingSample*> batch;
    for (const auto& smp : samples)
        batch.push_back(&smp);

    ImaginationUnit unit(2, cfg.mArch, 1);
    AdamState adam = AdamState::ZerosLike(unit);
    const double initial = TrainStep(unit, adam, 1, batch, cfg);
    double last = initial;
    for (std::uint64_t step = 2; step <= 60; ++step)
        last = TrainStep(unit, adam, step, batch, cfg);
    CHECK(last < 0.7 * initial);
}

TEST_CASE("training configuration is validated")
{
    SmallSetup s;
    CHECK_THROWS_AS(TrainUnits({}, { 0 }, 0.1, s.mSensor, s.mGt, s.mCfg), ConfigError);
    TrainConfig bad = s.mCfg;
    bad.mReplayCapacity = 2;
    CHECK_THROWS_AS(bad.Validate(), ConfigError);
    bad = s.mCfg;
    bad.mEpsilon = 10;
    CHECK_THROWS_AS(bad.Validate(), ConfigError);
    bad = s.mCfg;
    bad.mLearningRate = 0.0;
    CHECK_THROWS_AS(bad.Validate(), ConfigError);

    const TrainConfig full = TrainConfig::FullScalePreset();
    CHECK(full.mBatchSize == 108);
    CHECK(full.mReplayCapacity == 12288);
    CHECK(full.mScenesPerBatch == 16);
    CHECK(full.mAlphaMax == 30.0);
    CHECK(full.mGammaMax == 10.0);
    CHECK(full.mEpsilon == 31);
    CHECK(full.mLearningRate == 0.001);
}
