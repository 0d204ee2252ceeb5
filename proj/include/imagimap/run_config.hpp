/* run_config.hpp */

#ifndef IMAGIMAP_RUN_CONFIG_HPP
#define IMAGIMAP_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "imagimap/eval_bench.hpp"
#include "imagimap/ground_truth.hpp"
#include "imagimap/mapper.hpp"
#include "imagimap/scene_sim.hpp"
#include "imagimap/trainer.hpp"

namespace imagimap {

/* A contiguous block of scene seeds */
struct SeedRange
{
    std::uint64_t mBase = 0;
    int           mCount = 0;

    std::vector<std::uint64_t> Seeds() const;
};

struct MapRequest
{
    std::uint64_t mSceneSeed = 2000;
    double        mCellWidth = 3.0;
    int           mSet = 0;
};

/*
 * Everything a command needs. Sections mirror the JSON file; unknown keys
 * anywhere raise ConfigError.
 */
struct RunConfig
{
    std::uint64_t mSeed = 0;
    std::string   mOut = "out";
    int           mJobs = 1;

    SceneParams  mScene;
    SensorSpec   mSensor;
    GtConfig     mGt;
    TrainConfig  mTrain;
    std::vector<int> mClasses { 0, 1, 2 };
    MapperConfig mMapper;
    BenchConfig  mBench;

    std::string mSceneDir = "scenes";
    std::string mCheckpointDir;
    SeedRange   mGenerate { 1000, 24 };
    SeedRange   mTrainScenes { 1000, 24 };
    SeedRange   mEvalScenes { 2000, 12 };
    MapRequest  mMap;

    static RunConfig FromJson(const nlohmann::json& j);
    static RunConfig Load(const std::filesystem::path& path);
    nlohmann::ordered_json ToJson() const;

    /* Propagate shared sections into the benchmark config and validate */
    void Resolve();

    std::filesystem::path CheckpointDir() const;
};

std::string CheckpointName(int classId);
std::string TrainingStateName(int classId);
std::string LossCurveName(int classId);
std::string SceneFileName(std::uint64_t seed);

} // namespace imagimap

#endif // IMAGIMAP_RUN_CONFIG_HPP
