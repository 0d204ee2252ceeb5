/* run_config.cpp */

#include "imagimap/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "imagimap/errors.hpp"
#include "imagimap/grid_io.hpp"

namespace imagimap {

namespace {

using Json = nlohmann::json;

/* Reads keys from one object and rejects any key it was not asked about */
class Section
{
public:
    Section(const Json& j, std::string name) :
        mJson(j), mName(std::move(name))
    {
        if (!j.is_object())
            throw ConfigError("config: '" + mName + "' must be an object");
    }

    ~Section() = default;

    template <typename T>
    void Get(const char* key, T& out)
    {
        mKnown.insert(key);
        const auto it = mJson.find(key);
        if (it == mJson.end())
            return;
        try {
            out = it->template get<T>();
        } catch (const Json::exception&) {
            throw ConfigError("config: bad value for '" + mName + "." + key + "'");
        }
    }

    const Json* Child(const char* key)
    {
        mKnown.insert(key);
        const auto it = mJson.find(key);
        return it == mJson.end() ? nullptr : &*it;
    }

    void Finish() const
    {
        for (const auto& [key, value] : mJson.items())
            if (!mKnown.count(key))
                throw ConfigError("config: unknown key '" + mName + "." + key + "'");
    }

private:
    const Json&           mJson;
    std::string           mName;
    std::set<std::string> mKnown;
};

void ReadCounts(const Json* j, const std::string& name, std::array<int, kNumClasses>& out)
{
    if (!j)
        return;
    Section s(*j, name);
    for (int c = 0; c < kNumClasses; ++c)
        s.Get(ClassName(static_cast<ObjectClass>(c)), out[c]);
    s.Finish();
}

void ReadRange(const Json* j, const std::string& name, SeedRange& out)
{
    if (!j)
        return;
    Section s(*j, name);
    s.Get("seed_base", out.mBase);
    s.Get("count", out.mCount);
    s.Finish();
    if (out.mCount < 0)
        throw ConfigError("config: '" + name + ".count' must be non-negative");
}

const char* GammaModeName(GammaCountMode mode)
{
    return mode == GammaCountMode::SeenStarSupport ? "seen_star_support" : "object_cells";
}

nlohmann::ordered_json Counts(const std::array<int, kNumClasses>& counts)
{
    nlohmann::ordered_json j;
    for (int c = 0; c < kNumClasses; ++c)
        j[ClassName(static_cast<ObjectClass>(c))] = counts[c];
    return j;
}

template <typename F>
void AsConfigError(F&& f)
{
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

} // namespace

std::vector<std::uint64_t> SeedRange::Seeds() const
{
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < mCount; ++i)
        seeds.push_back(mBase + static_cast<std::uint64_t>(i));
    return seeds;
}

RunConfig RunConfig::FromJson(const nlohmann::json& j)
{
    RunConfig cfg;
    Section root(j, "root");
    root.Get("seed", cfg.mSeed);
    root.Get("out", cfg.mOut);
    root.Get("jobs", cfg.mJobs);
    root.Get("scene_dir", cfg.mSceneDir);
    root.Get("checkpoint_dir", cfg.mCheckpointDir);

    if (const Json* s = root.Child("scene")) {
        Section sec(*s, "scene");
        sec.Get("extent_min", cfg.mScene.mExtentMin);
        sec.Get("extent_max", cfg.mScene.mExtentMax);
        sec.Get("max_partitions", cfg.mScene.mMaxPartitions);
        sec.Get("door_width", cfg.mScene.mDoorWidth);
        sec.Get("clearance", cfg.mScene.mClearance);
        ReadCounts(sec.Child("count_min"), "scene.count_min", cfg.mScene.mCountMin);
        ReadCounts(sec.Child("count_max"), "scene.count_max", cfg.mScene.mCountMax);
        sec.Get("placement_tries", cfg.mScene.mPlacementTries);
        sec.Get("agent_radius", cfg.mScene.mAgentRadius);
        sec.Get("resolution", cfg.mScene.mResolution);
        sec.Finish();
    }

    if (const Json* s = root.Child("sensor")) {
        Section sec(*s, "sensor");
        sec.Get("fov", cfg.mSensor.mFov);
        sec.Get("max_range", cfg.mSensor.mMaxRange);
        sec.Get("ray_count", cfg.mSensor.mRayCount);
        sec.Get("ego_size", cfg.mSensor.mEgoSize);
        sec.Get("dropout", cfg.mSensor.mDropout);
        sec.Get("dropout_seed", cfg.mSensor.mDropoutSeed);
        sec.Finish();
    }

    if (const Json* s = root.Child("ground_truth")) {
        Section sec(*s, "ground_truth");
        sec.Get("seg_kernel", cfg.mGt.mSegKernel);
        sec.Get("delta", cfg.mGt.mDelta);
        sec.Get("epsilon", cfg.mGt.mEpsilon);
        sec.Get("threshold", cfg.mGt.mThreshold);
        sec.Finish();
    }

    if (const Json* s = root.Child("train")) {
        Section sec(*s, "train");
        std::string preset = "desk";
        sec.Get("preset", preset);
        if (preset == "full")
            cfg.mTrain = TrainConfig::FullScalePreset();
        else if (preset != "desk")
            throw ConfigError("config: train.preset must be 'desk' or 'full'");
        auto& t = cfg.mTrain;
        sec.Get("learning_rate", t.mLearningRate);
        sec.Get("batch_size", t.mBatchSize);
        sec.Get("replay_capacity", t.mReplayCapacity);
        sec.Get("scenes_per_batch", t.mScenesPerBatch);
        sec.Get("update_interval", t.mUpdateInterval);
        sec.Get("update_batches", t.mUpdateBatches);
        sec.Get("w_alpha_max", t.mAlphaMax);
        sec.Get("w_gamma_max", t.mGammaMax);
        sec.Get("epsilon", t.mEpsilon);
        sec.Get("beta1", t.mBeta1);
        sec.Get("beta2", t.mBeta2);
        sec.Get("adam_eps", t.mAdamEps);
        sec.Get("steps", t.mSteps);
        sec.Get("positive_fraction", t.mPositiveFraction);
        std::string mode = GammaModeName(t.mGammaMode);
        sec.Get("gamma_mode", mode);
        if (mode == "seen_star_support")
            t.mGammaMode = GammaCountMode::SeenStarSupport;
        else if (mode == "object_cells")
            t.mGammaMode = GammaCountMode::ObjectCells;
        else
            throw ConfigError("config: unknown train.gamma_mode '" + mode + "'");
        std::vector<int> arch { t.mArch.mConv1, t.mArch.mConv2, t.mArch.mConv3, t.mArch.mConv4 };
        sec.Get("architecture", arch);
        if (arch.size() != 4)
            throw ConfigError("config: train.architecture needs four widths");
        for (const int a : arch)
            if (a < 1 || a > 256)
                throw ConfigError("config: train.architecture widths must be in [1, 256]");
        t.mArch = { arch[0], arch[1], arch[2], arch[3] };
        std::vector<std::string> classes;
        sec.Get("classes", classes);
        if (sec.Child("classes")) {
            cfg.mClasses.clear();
            for (const auto& name : classes) {
                try {
                    cfg.mClasses.push_back(static_cast<int>(ClassFromName(name)));
                } catch (const std::exception&) {
                    throw ConfigError("config: unknown class '" + name + "'");
                }
            }
        }
        sec.Finish();
    }

    if (const Json* s = root.Child("mapper")) {
        Section sec(*s, "mapper");
        sec.Get("prediction_threshold", cfg.mMapper.mPredictionThreshold);
        sec.Get("aggregation", cfg.mMapper.mAggregation);
        sec.Get("epsilon", cfg.mMapper.mEpsilon);
        sec.Get("prediction_seeded", cfg.mMapper.mPredictionSeeded);
        sec.Get("informed_decay", cfg.mMapper.mInformedDecay);
        sec.Finish();
    }

    if (const Json* s = root.Child("bench")) {
        Section sec(*s, "bench");
        sec.Get("cell_widths", cfg.mBench.mCellWidths);
        sec.Get("sets_per_scene", cfg.mBench.mSetsPerScene);
        sec.Get("threshold", cfg.mBench.mThreshold);
        sec.Finish();
    }

    if (const Json* s = root.Child("datasets")) {
        Section sec(*s, "datasets");
        ReadRange(sec.Child("generate"), "datasets.generate", cfg.mGenerate);
        ReadRange(sec.Child("train"), "datasets.train", cfg.mTrainScenes);
        ReadRange(sec.Child("eval"), "datasets.eval", cfg.mEvalScenes);
        sec.Finish();
    }

    if (const Json* s = root.Child("map")) {
        Section sec(*s, "map");
        sec.Get("scene_seed", cfg.mMap.mSceneSeed);
        sec.Get("cell_width", cfg.mMap.mCellWidth);
        sec.Get("set", cfg.mMap.mSet);
        sec.Finish();
    }

    root.Finish();
    return cfg;
}

RunConfig RunConfig::Load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw MissingInputError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return FromJson(j);
}

nlohmann::ordered_json RunConfig::ToJson() const
{
    nlohmann::ordered_json j;
    j["seed"] = mSeed;
    j["out"] = mOut;
    j["jobs"] = mJobs;
    j["scene_dir"] = mSceneDir;
    j["checkpoint_dir"] = this->CheckpointDir().string();

    auto& s = j["scene"];
    s["extent_min"] = mScene.mExtentMin;
    s["extent_max"] = mScene.mExtentMax;
    s["max_partitions"] = mScene.mMaxPartitions;
    s["door_width"] = mScene.mDoorWidth;
    s["clearance"] = mScene.mClearance;
    s["count_min"] = Counts(mScene.mCountMin);
    s["count_max"] = Counts(mScene.mCountMax);
    s["placement_tries"] = mScene.mPlacementTries;
    s["agent_radius"] = mScene.mAgentRadius;
    s["resolution"] = mScene.mResolution;

    auto& se = j["sensor"];
    se["fov"] = mSensor.mFov;
    se["max_range"] = mSensor.mMaxRange;
    se["ray_count"] = mSensor.mRayCount;
    se["ego_size"] = mSensor.mEgoSize;
    se["dropout"] = mSensor.mDropout;
    se["dropout_seed"] = mSensor.mDropoutSeed;

    auto& g = j["ground_truth"];
    g["seg_kernel"] = mGt.mSegKernel;
    g["delta"] = mGt.mDelta;
    g["epsilon"] = mGt.mEpsilon;
    g["threshold"] = mGt.mThreshold;

    const auto& t = mTrain;
    auto& tr = j["train"];
    tr["learning_rate"] = t.mLearningRate;
    tr["batch_size"] = t.mBatchSize;
    tr["replay_capacity"] = t.mReplayCapacity;
    tr["scenes_per_batch"] = t.mScenesPerBatch;
    tr["update_interval"] = t.mUpdateInterval;
    tr["update_batches"] = t.mUpdateBatches;
    tr["w_alpha_max"] = t.mAlphaMax;
    tr["w_gamma_max"] = t.mGammaMax;
    tr["epsilon"] = t.mEpsilon;
    tr["beta1"] = t.mBeta1;
    tr["beta2"] = t.mBeta2;
    tr["adam_eps"] = t.mAdamEps;
    tr["steps"] = t.mSteps;
    tr["positive_fraction"] = t.mPositiveFraction;
    tr["gamma_mode"] = GammaModeName(t.mGammaMode);
    tr["architecture"] = { t.mArch.mConv1, t.mArch.mConv2, t.mArch.mConv3, t.mArch.mConv4 };
    std::vector<std::string> names;
    for (const int c : mClasses)
        names.emplace_back(ClassName(static_cast<ObjectClass>(c)));
    tr["classes"] = names;

    auto& m = j["mapper"];
    m["prediction_threshold"] = mMapper.mPredictionThreshold;
    m["aggregation"] = mMapper.mAggregation;
    m["epsilon"] = mMapper.mEpsilon;
    m["prediction_seeded"] = mMapper.mPredictionSeeded;
    m["informed_decay"] = mMapper.mInformedDecay;

    auto& b = j["bench"];
    b["cell_widths"] = mBench.mCellWidths;
    b["sets_per_scene"] = mBench.mSetsPerScene;
    b["threshold"] = mBench.mThreshold;

    auto& d = j["datasets"];
    d["generate"] = { { "seed_base", mGenerate.mBase }, { "count", mGenerate.mCount } };
    d["train"] = { { "seed_base", mTrainScenes.mBase }, { "count", mTrainScenes.mCount } };
    d["eval"] = { { "seed_base", mEvalScenes.mBase }, { "count", mEvalScenes.mCount } };

    auto& mp = j["map"];
    mp["scene_seed"] = mMap.mSceneSeed;
    mp["cell_width"] = mMap.mCellWidth;
    mp["set"] = mMap.mSet;
    return j;
}

void RunConfig::Resolve()
{
    if (mJobs < 1)
        throw ConfigError("config: jobs must be at least 1");
    if (mClasses.empty())
        throw ConfigError("config: train.classes must not be empty");
    if (std::set<int>(mClasses.begin(), mClasses.end()).size() != mClasses.size())
        throw ConfigError("config: duplicate class in train.classes");

    mTrain.mSeed = mSeed;
    mBench.mSeed = mSeed;
    mBench.mResolution = mScene.mResolution;
    mBench.mSensor = mSensor;
    mBench.mMapper = mMapper;
    mBench.mGt = mGt;
    mBench.mJobs = mJobs;

    AsConfigError([&] {
        ValidateSceneParams(mScene);
        ValidateSensorSpec(mSensor);
        mGt.Validate();
    });
    mTrain.Validate();
    mBench.Validate();
}

std::filesystem::path RunConfig::CheckpointDir() const
{
    return mCheckpointDir.empty() ? std::filesystem::path(mOut)
                                  : std::filesystem::path(mCheckpointDir);
}

std::string CheckpointName(int classId)
{
    return std::string("unit_") + ClassName(static_cast<ObjectClass>(classId)) + ".imun";
}

std::string TrainingStateName(int classId)
{
    return std::string("state_") + ClassName(static_cast<ObjectClass>(classId)) + ".imst";
}

std::string LossCurveName(int classId)
{
    return std::string("loss_") + ClassName(static_cast<ObjectClass>(classId)) + ".csv";
}

std::string SceneFileName(std::uint64_t seed)
{
    return "scene_" + std::to_string(seed) + ".json";
}

} // namespace imagimap
