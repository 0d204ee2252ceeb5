/* trainer.cpp */

#include "imagimap/trainer.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <thread>

#include "imagimap/errors.hpp"

namespace imagimap {

namespace {

constexpr std::uint64_t kSampleStream = 0x53414d50ULL;
constexpr std::uint64_t kBatchStream = 0x42415443ULL;
constexpr int kPositiveTries = 30;

} // namespace

TrainConfig TrainConfig::FullScalePreset()
{
    TrainConfig cfg;
    cfg.mBatchSize = 108;
    cfg.mReplayCapacity = 12288;
    cfg.mScenesPerBatch = 16;
    cfg.mUpdateInterval = 5;
    cfg.mUpdateBatches = 20;
    return cfg;
}

void TrainConfig::Validate() const
{
    if (!(mLearningRate > 0.0))
        throw ConfigError("train: learning_rate must be positive");
    if (mBatchSize < 1 || mReplayCapacity < 1 || mScenesPerBatch < 1 ||
        mUpdateInterval < 1 || mUpdateBatches < 1 || mSteps < 0)
        throw ConfigError("train: sizes and counts must be positive");
    if (mReplayCapacity < mBatchSize)
        throw ConfigError("train: replay_capacity must be at least batch_size");
    if (!(mAlphaMax > 0.0) || !(mGammaMax > 0.0))
        throw ConfigError("train: weight caps must be positive");
    if (mEpsilon < 1 || mEpsilon % 2 == 0)
        throw ConfigError("train: epsilon must be odd and positive");
    if (!(mBeta1 >= 0.0 && mBeta1 < 1.0) || !(mBeta2 >= 0.0 && mBeta2 < 1.0) ||
        !(mAdamEps > 0.0))
        throw ConfigError("train: invalid Adam parameters");
    if (mPositiveFraction < 0.0 || mPositiveFraction > 1.0)
        throw ConfigError("train: positive_fraction must be in [0, 1]");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) :
    mCapacity(capacity)
{
    if (capacity == 0)
        throw ParameterError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::Push(TrainingSample sample)
{
    if (mItems.size() < mCapacity) {
        mItems.push_back(std::move(sample));
        return;
    }
    mItems[mHead] = std::move(sample);
    mHead = (mHead + 1) % mCapacity;
}

const TrainingSample& ReplayBuffer::At(std::size_t i) const
{
    if (i >= mItems.size())
        throw ParameterError("ReplayBuffer::At: index out of range");
    return mItems[(mHead + i) % mItems.size()];
}

std::vector<std::size_t> ReplayBuffer::SampleBatch(Rng& rng, std::size_t batchSize,
                                                   std::size_t scenesPerBatch) const
{
    const std::size_t n = std::min(batchSize, mItems.size());
    std::map<int, std::vector<std::size_t>> byScene;
    for (std::size_t i = 0; i < mItems.size(); ++i)
        byScene[this->At(i).mSceneId].push_back(i);

    std::vector<std::vector<std::size_t>*> groups;
    for (auto& [id, idx] : byScene)
        groups.push_back(&idx);

    /* Partial Fisher-Yates over scenes */
    const std::size_t numScenes = std::min({ scenesPerBatch, groups.size(), n });
    for (std::size_t i = 0; i < numScenes; ++i)
        std::swap(groups[i], groups[i + rng.Index(groups.size() - i)]);

    /* Shuffle each chosen scene lazily while dealing slots round-robin */
    std::vector<std::size_t> used(numScenes, 0);
    std::vector<std::size_t> batch;
    batch.reserve(n);
    std::size_t exhausted = 0;
    for (std::size_t slot = 0; batch.size() < n && exhausted < numScenes; ++slot) {
        const std::size_t g = slot % numScenes;
        auto& idx = *groups[g];
        if (used[g] >= idx.size()) {
            if (used[g] == idx.size()) {
                ++exhausted;
                ++used[g];
            }
            continue;
        }
        const std::size_t pick = used[g] + rng.Index(idx.size() - used[g]);
        std::swap(idx[used[g]], idx[pick]);
        batch.push_back(idx[used[g]]);
        ++used[g];
    }

    /* Chosen scenes ran dry: top up from everything not yet taken */
    if (batch.size() < n) {
        std::vector<std::uint8_t> taken(mItems.size(), 0);
        for (const auto i : batch)
            taken[i] = 1;
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < mItems.size(); ++i)
            if (!taken[i])
                rest.push_back(i);
        for (std::size_t k = 0; batch.size() < n; ++k) {
            std::swap(rest[k], rest[k + rng.Index(rest.size() - k)]);
            batch.push_back(rest[k]);
        }
    }
    return batch;
}

TrainingWorld TrainingWorld::Build(const std::vector<SceneSpec>& scenes, double resolution,
                                   const GtConfig& gt)
{
    if (scenes.empty())
        throw ConfigError("training needs at least one scene");

    TrainingWorld world;
    for (const auto& scene : scenes) {
        SceneRaster raster = Rasterize(scene, resolution);
        std::vector<BinaryMask> gts;
        for (int c = 0; c < kNumClasses; ++c)
            gts.push_back(BuildSceneGt(raster, c, gt));
        std::vector<int> freeCells;
        const auto free = raster.FreeMask();
        for (std::size_t i = 0; i < free.NumCells(); ++i)
            if (free.Bits()[i])
                freeCells.push_back(static_cast<int>(i));
        if (freeCells.empty())
            throw ConfigError("training scene without free cells");

        world.mRasters.push_back(std::move(raster));
        world.mGroundTruth.push_back(std::move(gts));
        world.mFreeCells.push_back(std::move(freeCells));
        world.mSceneIds.push_back(static_cast<int>(scene.mSeed));
    }
    return world;
}

TrainingSample CollectSample(const TrainingWorld& world, int classId,
                             const SensorSpec& sensor, const GtConfig& gt,
                             const TrainConfig& cfg, std::uint64_t sampleIndex)
{
    Rng rng(deriveSeed({ cfg.mSeed, static_cast<std::uint64_t>(classId),
                         sampleIndex, kSampleStream }));
    const bool wantPositive = rng.Uniform01() < cfg.mPositiveFraction;

    TrainingSample sample;
    for (int attempt = 0; attempt < kPositiveTries; ++attempt) {
        const std::size_t s = rng.Index(world.mRasters.size());
        const auto& raster = world.mRasters[s];
        const auto& cells = world.mFreeCells[s];
        const int cell = cells[rng.Index(cells.size())];
        const double theta = rng.Uniform(-std::numbers::pi, std::numbers::pi);
        const Pose pose = CellCenterPose(cell % raster.Width(), cell / raster.Width(),
                                         raster.Resolution(), theta);

        sample.mObs = Observe(raster, pose, sensor);
        sample.mSceneId = world.mSceneIds[s];
        const bool visible = sample.mObs.mClassVisible[classId].Threshold(0.5).Any();
        if (!wantPositive || visible || attempt + 1 == kPositiveTries) {
            sample.mTarget = MakeTarget(world.mGroundTruth[s][classId], pose,
                                        sample.mObs, classId, gt);
            break;
        }
    }
    return sample;
}

SampleWeights ComputeSampleWeights(const GroundTruthBundle& target, const TrainConfig& cfg)
{
    const GridMap label = target.mTargetCrop.Threshold(0.5)
        .ToGrid(target.mTargetCrop.Resolution());
    const auto alpha = ComputeWeightAlpha(label, cfg.mAlphaMax);
    const auto gamma = ComputeWeightGamma(label, target.mSeenStar, cfg.mGammaMax,
                                          cfg.mGammaMode);

    SampleWeights w;
    w.mWeights = CombineWeights(alpha.mMap, gamma.mMap);
    w.mAlpha = alpha.mScalar;
    w.mGamma = gamma.mScalar;
    const auto lv = label.Values();
    w.mLabel.assign(lv.begin(), lv.end());
    return w;
}

BatchResult ComputeBatch(const ImaginationUnit& unit,
                         std::span<const TrainingSample* const> batch,
                         const TrainConfig& cfg)
{
    if (batch.empty())
        throw ParameterError("ComputeBatch: empty batch");

    BatchResult result;
    result.mGrads = unit.ZeroGradients();
    const double inv = 1.0 / static_cast<double>(batch.size());

    Activations act;
    std::vector<double> gradLogit;
    for (const TrainingSample* sample : batch) {
        const SampleWeights w = ComputeSampleWeights(sample->mTarget, cfg);
        const Tensor input = MakeInput(sample->mObs, unit.ClassId());
        const auto prob = unit.Forward(input, &act);
        const double loss = WeightedBceWithGrad(prob, w.mLabel, w.mWeights.mValues, &gradLogit);
        const Gradients g = unit.Backward(act, gradLogit);

        result.mLoss += inv * loss;
        result.mAlphaMean += inv * w.mAlpha;
        result.mGammaMean += inv * w.mGamma;
        for (std::size_t l = 0; l < g.size(); ++l)
            for (std::size_t i = 0; i < g[l].size(); ++i)
                result.mGrads[l][i] += inv * g[l][i];
    }
    return result;
}

double TrainStep(ImaginationUnit& unit, AdamState& adam, std::uint64_t step,
                 std::span<const TrainingSample* const> batch, const TrainConfig& cfg)
{
    const BatchResult r = ComputeBatch(unit, batch, cfg);
    AdamStep(unit, r.mGrads, adam, cfg.Adam(), step);
    return r.mLoss;
}

UnitTrainer::UnitTrainer(const TrainingWorld& world, int classId, const SensorSpec& sensor,
                         const GtConfig& gt, const TrainConfig& cfg,
                         std::optional<TrainingState> resume) :
    mWorld(world),
    mClassId(classId),
    mSensor(sensor),
    mGt(gt),
    mCfg(cfg),
    mBuffer(static_cast<std::size_t>(cfg.mReplayCapacity))
{
    mCfg.Validate();
    mGt.mEpsilon = cfg.mEpsilon;
    mGt.Validate();
    ValidateSensorSpec(sensor);

    if (resume.has_value()) {
        if (resume->mUnit.ClassId() != classId)
            throw ConfigError("resume state belongs to another class");
        if (resume->mUnit.Architecture() != cfg.mArch)
            throw ConfigError("resume state architecture differs from config");
        mState = std::move(*resume);
    } else {
        mState.mUnit = ImaginationUnit(classId, cfg.mArch, cfg.mSeed);
        mState.mAdam = AdamState::ZerosLike(mState.mUnit);
        mState.mStep = 0;
    }

    /* Rebuild the buffer tail that the uninterrupted run would hold */
    const std::uint64_t required = this->RequiredSamples(mState.mStep);
    const std::uint64_t capacity = static_cast<std::uint64_t>(cfg.mReplayCapacity);
    mCollected = required > capacity ? required - capacity : 0;
    if (mState.mStep == 0)
        mCollected = 0;
}

std::uint64_t UnitTrainer::RequiredSamples(std::uint64_t step) const noexcept
{
    const auto prefill = static_cast<std::uint64_t>(mCfg.mBatchSize);
    const auto interval = static_cast<std::uint64_t>(mCfg.mUpdateInterval);
    const auto rounds = step / static_cast<std::uint64_t>(mCfg.mUpdateBatches) + 1;
    return prefill + interval * rounds;
}

void UnitTrainer::Run(std::uint64_t lastStep,
                      const std::function<void(const LossRecord&)>& onStep)
{
    std::vector<const TrainingSample*> batch;
    while (mState.mStep < lastStep) {
        const std::uint64_t s = mState.mStep;
        const std::uint64_t required = this->RequiredSamples(s);
        while (mCollected < required) {
            mBuffer.Push(CollectSample(mWorld, mClassId, mSensor, mGt, mCfg, mCollected));
            ++mCollected;
        }

        Rng rng(deriveSeed({ mCfg.mSeed, static_cast<std::uint64_t>(mClassId), s,
                             kBatchStream }));
        const auto indices = mBuffer.SampleBatch(
            rng, static_cast<std::size_t>(mCfg.mBatchSize),
            static_cast<std::size_t>(mCfg.mScenesPerBatch));
        batch.clear();
        for (const auto i : indices)
            batch.push_back(&mBuffer.At(i));

        const BatchResult r = ComputeBatch(mState.mUnit, batch, mCfg);
        AdamStep(mState.mUnit, r.mGrads, mState.mAdam, mCfg.Adam(), s + 1);
        mState.mStep = s + 1;

        const LossRecord record { mState.mStep, r.mLoss, r.mAlphaMean, r.mGammaMean };
        mCurve.push_back(record);
        if (onStep)
            onStep(record);
    }
}

TrainResult TrainUnits(const std::vector<SceneSpec>& scenes, const std::vector<int>& classIds,
                       double resolution, const SensorSpec& sensor, const GtConfig& gt,
                       const TrainConfig& cfg, int jobs,
                       const std::map<int, TrainingState>& resume)
{
    cfg.Validate();
    const TrainingWorld world = TrainingWorld::Build(scenes, resolution, gt);

    TrainResult result;
    result.mStates.resize(classIds.size());
    result.mCurves.resize(classIds.size());

    auto trainOne = [&](std::size_t k) {
        std::optional<TrainingState> start;
        if (const auto it = resume.find(classIds[k]); it != resume.end())
            start = it->second;
        UnitTrainer trainer(world, classIds[k], sensor, gt, cfg, start);
        trainer.Run(static_cast<std::uint64_t>(cfg.mSteps));
        result.mStates[k] = trainer.State();
        result.mCurves[k] = trainer.Curve();
    };

    if (jobs <= 1 || classIds.size() <= 1) {
        for (std::size_t k = 0; k < classIds.size(); ++k)
            trainOne(k);
        return result;
    }

    /* Units are independent, so per-class threads keep results identical */
    std::vector<std::exception_ptr> errors(classIds.size());
    for (std::size_t first = 0; first < classIds.size(); first += static_cast<std::size_t>(jobs)) {
        std::vector<std::thread> workers;
        const std::size_t last = std::min(classIds.size(), first + static_cast<std::size_t>(jobs));
        for (std::size_t k = first; k < last; ++k) {
            workers.emplace_back([&, k] {
                try {
                    trainOne(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
        for (auto& w : workers)
            w.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return result;
}

} // namespace imagimap
