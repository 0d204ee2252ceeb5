/* trainer.hpp */

#ifndef IMAGIMAP_TRAINER_HPP
#define IMAGIMAP_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "imagimap/ground_truth.hpp"
#include "imagimap/loss.hpp"
#include "imagimap/network.hpp"
#include "imagimap/optimizer.hpp"
#include "imagimap/rng.hpp"
#include "imagimap/scene_sim.hpp"

namespace imagimap {

/*
 * Training hyperparameters. Defaults are sized for a desktop CPU;
 * FullScalePreset() returns the reference-scale values (batch 108,
 * replay buffer 12288).
 */
struct TrainConfig
{
    double           mLearningRate = 0.001;
    int              mBatchSize = 16;
    int              mReplayCapacity = 2048;
    int              mScenesPerBatch = 16;
    /* Collected samples between update rounds */
    int              mUpdateInterval = 5;
    /* Batches per update round */
    int              mUpdateBatches = 20;
    double           mAlphaMax = 30.0;
    double           mGammaMax = 10.0;
    int              mEpsilon = 31;
    double           mBeta1 = 0.9;
    double           mBeta2 = 0.999;
    double           mAdamEps = 1e-8;
    std::uint64_t    mSeed = 0;
    /* Total optimizer updates per unit */
    int              mSteps = 600;
    GammaCountMode   mGammaMode = GammaCountMode::SeenStarSupport;
    /* Share of samples redrawn until the class is visible */
    double           mPositiveFraction = 0.8;
    UnitArchitecture mArch;

    static TrainConfig FullScalePreset();
    void Validate() const;
    AdamConfig Adam() const { return { mLearningRate, mBeta1, mBeta2, mAdamEps }; }
};

struct TrainingSample
{
    ObservationStack  mObs;
    GroundTruthBundle mTarget;
    int               mSceneId = 0;
};

/*
 * Fixed-capacity FIFO of training samples. Batches are drawn without
 * replacement and spread over as many scenes as allowed.
 */
class ReplayBuffer
{
public:
    explicit ReplayBuffer(std::size_t capacity);

    std::size_t Size() const noexcept { return mItems.size(); }
    std::size_t Capacity() const noexcept { return mCapacity; }

    void Push(TrainingSample sample);
    const TrainingSample& At(std::size_t i) const;

    /*
     * Indices of a batch: min(scenesPerBatch, distinct scenes, batch) scenes
     * are drawn first, then slots are dealt round-robin among them.
     */
    std::vector<std::size_t> SampleBatch(Rng& rng, std::size_t batchSize,
                                         std::size_t scenesPerBatch) const;

private:
    std::size_t                 mCapacity;
    /* Logical order: oldest first */
    std::vector<TrainingSample> mItems;
    std::size_t                 mHead = 0;
};

/* Scenes prepared for sampling: rasters, per-class ground truth, free cells */
struct TrainingWorld
{
    std::vector<SceneRaster>             mRasters;
    std::vector<std::vector<BinaryMask>> mGroundTruth;
    std::vector<std::vector<int>>        mFreeCells;
    std::vector<int>                     mSceneIds;

    static TrainingWorld Build(const std::vector<SceneSpec>& scenes, double resolution,
                               const GtConfig& gt);
};

/* Deterministic sample for (seed, class, index) */
TrainingSample CollectSample(const TrainingWorld& world, int classId,
                             const SensorSpec& sensor, const GtConfig& gt,
                             const TrainConfig& cfg, std::uint64_t sampleIndex);

/* Binary label and combined weights of one sample */
struct SampleWeights
{
    std::vector<double> mLabel;
    WeightMap           mWeights;
    double              mAlpha = 0.0;
    double              mGamma = 0.0;
};

SampleWeights ComputeSampleWeights(const GroundTruthBundle& target, const TrainConfig& cfg);

struct LossRecord
{
    std::uint64_t mStep = 0;
    double        mLoss = 0.0;
    double        mAlphaMean = 0.0;
    double        mGammaMean = 0.0;
};

/* Mean batch loss and gradient */
struct BatchResult
{
    double    mLoss = 0.0;
    double    mAlphaMean = 0.0;
    double    mGammaMean = 0.0;
    Gradients mGrads;
};

BatchResult ComputeBatch(const ImaginationUnit& unit,
                         std::span<const TrainingSample* const> batch,
                         const TrainConfig& cfg);

/* Everything needed to continue training bit-exactly */
struct TrainingState
{
    ImaginationUnit mUnit;
    AdamState       mAdam;
    std::uint64_t   mStep = 0;

    bool operator==(const TrainingState&) const = default;
};

/*
 * Trains one unit. Sample i is a pure function of (seed, class, i) and the
 * batch of update s a pure function of (seed, class, s) and the buffer, so
 * a run resumed from a saved state replays the same trajectory.
 */
class UnitTrainer
{
public:
    UnitTrainer(const TrainingWorld& world, int classId, const SensorSpec& sensor,
                const GtConfig& gt, const TrainConfig& cfg,
                std::optional<TrainingState> resume = std::nullopt);

    /* Run updates until the step counter reaches lastStep */
    void Run(std::uint64_t lastStep,
             const std::function<void(const LossRecord&)>& onStep = {});

    const TrainingState& State() const noexcept { return mState; }
    const std::vector<LossRecord>& Curve() const noexcept { return mCurve; }

    /* Samples that must exist before update `step` (0-based) runs */
    std::uint64_t RequiredSamples(std::uint64_t step) const noexcept;

private:
    const TrainingWorld& mWorld;
    int                  mClassId;
    SensorSpec           mSensor;
    GtConfig             mGt;
    TrainConfig          mCfg;
    TrainingState        mState;
    ReplayBuffer         mBuffer;
    std::uint64_t        mCollected = 0;
    std::vector<LossRecord> mCurve;
};

struct TrainResult
{
    std::vector<TrainingState>           mStates;
    std::vector<std::vector<LossRecord>> mCurves;
};

/* Train one unit per class; jobs > 1 trains classes concurrently */
TrainResult TrainUnits(const std::vector<SceneSpec>& scenes, const std::vector<int>& classIds,
                       double resolution, const SensorSpec& sensor, const GtConfig& gt,
                       const TrainConfig& cfg, int jobs = 1,
                       const std::map<int, TrainingState>& resume = {});

/* One optimizer step on a fixed batch; returns the batch loss before the step */
double TrainStep(ImaginationUnit& unit, AdamState& adam, std::uint64_t step,
                 std::span<const TrainingSample* const> batch, const TrainConfig& cfg);

} // namespace imagimap

#endif // IMAGIMAP_TRAINER_HPP
