/* imagimap_cli.cpp */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "imagimap/checkpoint.hpp"
#include "imagimap/errors.hpp"
#include "imagimap/eval_bench.hpp"
#include "imagimap/grid_io.hpp"
#include "imagimap/mapper.hpp"
#include "imagimap/run_config.hpp"
#include "imagimap/scene_io.hpp"
#include "imagimap/trainer.hpp"

namespace fs = std::filesystem;
using namespace imagimap;

namespace {

struct CommonFlags
{
    std::string                  mConfig;
    std::optional<std::uint64_t> mSeed;
    std::string                  mOut;
    std::optional<int>           mJobs;
};

void AddCommon(CLI::App* app, CommonFlags& flags)
{
    app->add_option("--config", flags.mConfig, "JSON run configuration");
    app->add_option("--seed", flags.mSeed, "Global RNG seed");
    app->add_option("--out", flags.mOut, "Output directory");
    app->add_option("--jobs", flags.mJobs, "Parallel workers (1 = bit-reproducible)");
}

RunConfig LoadConfig(const CommonFlags& flags)
{
    RunConfig cfg = flags.mConfig.empty() ? RunConfig {} : RunConfig::Load(flags.mConfig);
    if (flags.mSeed)
        cfg.mSeed = *flags.mSeed;
    if (!flags.mOut.empty())
        cfg.mOut = flags.mOut;
    if (flags.mJobs)
        cfg.mJobs = *flags.mJobs;
    cfg.Resolve();
    return cfg;
}

void MakeDir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string());
}

void WriteResolved(const fs::path& dir, const RunConfig& cfg)
{
    WriteFileText(dir / "resolved_config.json", cfg.ToJson().dump(2) + "\n");
}

std::vector<SceneSpec> LoadScenes(const RunConfig& cfg, const SeedRange& range)
{
    std::vector<SceneSpec> scenes;
    for (const auto seed : range.Seeds()) {
        const fs::path path = fs::path(cfg.mSceneDir) / SceneFileName(seed);
        if (!fs::exists(path))
            throw MissingInputError("missing scene file " + path.string());
        scenes.push_back(ReadScene(path));
    }
    return scenes;
}

std::vector<ImaginationUnit> LoadUnits(const RunConfig& cfg)
{
    std::vector<ImaginationUnit> units;
    for (const int c : cfg.mClasses) {
        const fs::path path = cfg.CheckpointDir() / CheckpointName(c);
        if (!fs::exists(path))
            throw MissingInputError("missing checkpoint " + path.string());
        ImaginationUnit unit = LoadUnit(path);
        if (unit.ClassId() != c)
            throw FormatError("checkpoint " + path.string() + " holds another class");
        units.push_back(std::move(unit));
    }
    return units;
}

/* Keep the rows of an earlier curve up to the resumed step */
std::vector<LossRecord> ReadCurvePrefix(const fs::path& path, std::uint64_t upTo)
{
    std::vector<LossRecord> rows;
    std::ifstream in(path);
    if (!in)
        return rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        LossRecord r;
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream ls(line);
        if (!(ls >> r.mStep >> c1 >> r.mLoss >> c2 >> r.mAlphaMean >> c3 >> r.mGammaMean))
            throw FormatError("malformed loss curve " + path.string());
        if (r.mStep <= upTo)
            rows.push_back(r);
    }
    return rows;
}

int CmdGenScenes(const CommonFlags& flags, std::optional<int> count,
                 std::optional<std::uint64_t> seedBase)
{
    RunConfig cfg = LoadConfig(flags);
    if (count)
        cfg.mGenerate.mCount = *count;
    if (seedBase)
        cfg.mGenerate.mBase = *seedBase;
    if (cfg.mGenerate.mCount < 0)
        throw ConfigError("count must be non-negative");

    const fs::path dir = flags.mOut.empty() ? fs::path(cfg.mSceneDir) : fs::path(cfg.mOut);
    MakeDir(dir);
    for (const auto seed : cfg.mGenerate.Seeds()) {
        const SceneSpec scene = GenerateScene(seed, cfg.mScene);
        if (scene.mPlacementWarning)
            std::fprintf(stderr, "scene %llu: not every object could be placed\n",
                         static_cast<unsigned long long>(seed));
        WriteScene(dir / SceneFileName(seed), scene);
    }
    WriteResolved(dir, cfg);
    std::printf("wrote %d scenes to %s\n", cfg.mGenerate.mCount, dir.string().c_str());
    return kExitOk;
}

int CmdTrain(const CommonFlags& flags, bool resume)
{
    const RunConfig cfg = LoadConfig(flags);
    const auto scenes = LoadScenes(cfg, cfg.mTrainScenes);
    if (scenes.empty())
        throw ConfigError("train: no training scenes configured");
    const fs::path out(cfg.mOut);
    MakeDir(out);

    std::map<int, TrainingState> start;
    std::map<int, std::vector<LossRecord>> prefix;
    if (resume) {
        for (const int c : cfg.mClasses) {
            const fs::path path = cfg.CheckpointDir() / TrainingStateName(c);
            if (!fs::exists(path))
                throw MissingInputError("missing training state " + path.string());
            TrainingState state = LoadTrainingState(path);
            prefix[c] = ReadCurvePrefix(cfg.CheckpointDir() / LossCurveName(c), state.mStep);
            start.emplace(c, std::move(state));
        }
    }

    const TrainResult result = TrainUnits(scenes, cfg.mClasses, cfg.mScene.mResolution,
                                          cfg.mSensor, cfg.mGt, cfg.mTrain, cfg.mJobs, start);
    for (std::size_t k = 0; k < cfg.mClasses.size(); ++k) {
        const int c = cfg.mClasses[k];
        const auto& state = result.mStates[k];
        SaveUnit(out / CheckpointName(c), state.mUnit);
        SaveTrainingState(out / TrainingStateName(c), state);

        std::vector<LossRecord> curve = prefix[c];
        curve.insert(curve.end(), result.mCurves[k].begin(), result.mCurves[k].end());
        WriteFileText(out / LossCurveName(c), LossCurveCsv(curve));
        if (!curve.empty())
            std::printf("%s: steps %llu, loss %.4g -> %.4g\n",
                        ClassName(static_cast<ObjectClass>(c)),
                        static_cast<unsigned long long>(state.mStep), curve.front().mLoss,
                        curve.back().mLoss);
    }
    WriteResolved(out, cfg);
    return kExitOk;
}

int CmdMap(const CommonFlags& flags)
{
    const RunConfig cfg = LoadConfig(flags);
    const auto units = LoadUnits(cfg);
    const fs::path scenePath = fs::path(cfg.mSceneDir) / SceneFileName(cfg.mMap.mSceneSeed);
    if (!fs::exists(scenePath))
        throw MissingInputError("missing scene file " + scenePath.string());
    const SceneSpec scene = ReadScene(scenePath);
    const SceneRaster raster = Rasterize(scene, cfg.mScene.mResolution);

    const auto vp = SparseViewpoints(raster.FreeMask(), raster.Resolution(), cfg.mMap.mCellWidth,
                                     ViewpointSeed(cfg.mSeed, scene.mSeed, cfg.mMap.mSet,
                                                   cfg.mMap.mCellWidth));
    const auto maps = RunEpisode(raster, vp, units, cfg.mSensor, cfg.mMapper,
                                 EpisodeSeed(cfg.mSeed, scene.mSeed, cfg.mMap.mSet,
                                             cfg.mMap.mCellWidth));

    const fs::path out(cfg.mOut);
    MakeDir(out);
    ExportGlobalMap(out / "imagination", maps.mImagination, maps.mPoses);
    ExportGlobalMap(out / "seg_gt", maps.mSegGt, maps.mPoses);
    ExportGlobalMap(out / "imagination_seen_only", maps.mSeenOnly, maps.mPoses);

    std::vector<int> ids;
    for (const auto& u : units)
        ids.push_back(u.ClassId());
    MultiLayerMap truth(raster.Width(), raster.Height(), raster.Resolution(), ids);
    truth.Occupancy() = raster.mLayers.Occupancy();
    truth.Seen().Fill(1.0f);
    for (const int c : ids)
        truth.ClassLayer(c) = BuildSceneGt(raster, c, cfg.mGt).ToGrid(raster.Resolution());
    ExportGlobalMap(out / "ground_truth", truth, {});
    WriteResolved(out, cfg);

    std::printf("%zu viewpoints, %zu observations\n", vp.mPoints.size(), maps.mPoses.size());
    for (const int c : ids) {
        const BinaryMask gt = truth.ClassLayer(c).Threshold(0.5);
        std::printf("%s: iou seg_gt %.3f imagination %.3f seen_only %.3f\n",
                    ClassName(static_cast<ObjectClass>(c)),
                    Iou(maps.mSegGt.ClassLayer(c), gt), Iou(maps.mImagination.ClassLayer(c), gt),
                    Iou(maps.mSeenOnly.ClassLayer(c), gt));
    }
    return kExitOk;
}

int CmdBench(const CommonFlags& flags)
{
    const RunConfig cfg = LoadConfig(flags);
    const auto units = LoadUnits(cfg);
    const auto scenes = LoadScenes(cfg, cfg.mEvalScenes);
    const BenchmarkReport report = RunBenchmark(scenes, units, cfg.mBench,
                                                cfg.mTrainScenes.Seeds());
    const fs::path out(cfg.mOut);
    MakeDir(out);
    WriteFileText(out / "report.csv", report.ToCsv());
    WriteFileText(out / "aggregate.json", report.AggregateJson());
    WriteResolved(out, cfg);

    std::printf("%-6s %-5s %-22s %8s %10s\n", "class", "cw", "method", "iou", "pixels");
    for (const auto& g : report.Aggregate())
        std::printf("%-6s %-5.2f %-22s %8.4f %10.2f\n",
                    ClassName(static_cast<ObjectClass>(g.mClass)), g.mCellWidth,
                    MethodName(g.mMethod), g.mIouMean, g.mPixelsMean);
    return kExitOk;
}

int CmdRender(const CommonFlags& flags, const std::vector<std::string>& inputs)
{
    const RunConfig cfg = LoadConfig(flags);
    if (inputs.empty())
        throw ConfigError("render: at least one --input map directory is required");
    const fs::path out(cfg.mOut);
    MakeDir(out);
    for (const auto& input : inputs) {
        const fs::path dir(input);
        const LoadedMap loaded = ImportGlobalMap(dir);
        const std::string stem = dir.filename().empty() ? dir.parent_path().filename().string()
                                                        : dir.filename().string();
        const std::string text = RenderComposite(loaded.mMap, cfg.mMapper.mPredictionThreshold);
        WriteFileBytes(out / (stem + ".ppm"), std::vector<std::uint8_t>(text.begin(), text.end()));
        for (const auto& [classId, layer] : loaded.mMap.ClassLayers())
            WritePgm(out / (stem + "_" + ClassName(static_cast<ObjectClass>(classId)) + ".pgm"),
                     layer);
    }
    WriteResolved(out, cfg);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Semantic mapping with per-class imagination units" };
    app.require_subcommand(1);

    CommonFlags gen, train, map, bench, render;
    std::optional<int> genCount;
    std::optional<std::uint64_t> genSeedBase;
    bool resume = false;
    std::vector<std::string> renderInputs;

    auto* cGen = app.add_subcommand("gen-scenes", "Generate scene_<seed>.json files");
    AddCommon(cGen, gen);
    cGen->add_option("--count", genCount, "Number of scenes");
    cGen->add_option("--seed-base", genSeedBase, "First scene seed");

    auto* cTrain = app.add_subcommand("train", "Train one imagination unit per class");
    AddCommon(cTrain, train);
    cTrain->add_flag("--resume", resume, "Continue from training states in checkpoint_dir");

    auto* cMap = app.add_subcommand("map", "Map one scene with all three pipelines");
    AddCommon(cMap, map);

    auto* cBench = app.add_subcommand("bench", "Sparse-viewpoint benchmark");
    AddCommon(cBench, bench);

    auto* cRender = app.add_subcommand("render", "Render exported global maps");
    AddCommon(cRender, render);
    cRender->add_option("--input", renderInputs, "Exported map directory")->expected(1, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (cGen->parsed())
            return CmdGenScenes(gen, genCount, genSeedBase);
        if (cTrain->parsed())
            return CmdTrain(train, resume);
        if (cMap->parsed())
            return CmdMap(map);
        if (cBench->parsed())
            return CmdBench(bench);
        if (cRender->parsed())
            return CmdRender(render, renderInputs);
    } catch (const std::exception& e) {
        const int code = ExitCodeFor(e);
        const char* kind = code == kExitConfig ? "config error"
            : code == kExitMissingInput        ? "missing or unreadable input"
            : code == kExitInvariant           ? "invariant violation"
                                               : "error";
        std::fprintf(stderr, "%s: %s\n", kind, e.what());
        return code;
    }
    return kExitFailure;
}
