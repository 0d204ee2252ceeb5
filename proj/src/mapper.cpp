/* mapper.cpp */

#include "imagimap/mapper.hpp"

#include <filesystem>
#include <string>

#include <json.hpp>

#include "imagimap/errors.hpp"
#include "imagimap/grid_io.hpp"
#include "imagimap/ground_truth.hpp"

namespace imagimap {

void MapperConfig::Validate() const
{
    if (!(mPredictionThreshold > 0.0 && mPredictionThreshold < 1.0))
        throw ConfigError("mapper: prediction_threshold must be in (0, 1)");
    if (!(mAggregation >= 0.0 && mAggregation <= 1.0))
        throw ConfigError("mapper: aggregation must be in [0, 1]");
    if (mEpsilon < 1 || mEpsilon % 2 == 0)
        throw ConfigError("mapper: epsilon must be odd and positive");
}

BinaryMask ValidityMask(const GridMap& classVisible, const GridMap& seen,
                        const MapperConfig& cfg)
{
    GtConfig gt;
    gt.mEpsilon = cfg.mEpsilon;
    gt.mThreshold = cfg.mPredictionThreshold;
    return SeenStar(classVisible, seen.Threshold(0.5), gt);
}

ValidPrediction ApplyValidity(const GridMap& prediction, const ObservationStack& obs,
                              int classId, const MapperConfig& cfg)
{
    cfg.Validate();
    if (classId < 0 || classId >= static_cast<int>(obs.mClassVisible.size()))
        throw ParameterError("ApplyValidity: class layer missing");
    if (!prediction.SameShape(obs.mSeen))
        throw DimensionError("ApplyValidity: prediction and observation differ in shape");

    const GridMap& seed = cfg.mPredictionSeeded ? prediction : obs.mClassVisible[classId];
    ValidPrediction out;
    out.mSeenStar = ValidityMask(seed, obs.mSeen, cfg);
    out.mValue = prediction.Multiply(out.mSeenStar);
    return out;
}

ValidPrediction ImagineValid(const ImaginationUnit& unit, const ObservationStack& obs,
                             const MapperConfig& cfg)
{
    return ApplyValidity(unit.Forward(obs), obs, unit.ClassId(), cfg);
}

void CheckValidity(const GridMap& value, const BinaryMask& seenStar)
{
    if (value.Width() != seenStar.Width() || value.Height() != seenStar.Height())
        throw DimensionError("CheckValidity: shape mismatch");
    const auto v = value.Values();
    const auto m = seenStar.Bits();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0f && !m[i])
            throw InvariantViolation("imagination outside the seen-object neighbourhood at cell " +
                                     std::to_string(i));
}

void UpdateGlobal(MultiLayerMap& global, const std::map<int, ValidPrediction>& valid,
                  const ObservationStack& obs, const MapperConfig& cfg)
{
    cfg.Validate();
    const BinaryMask seen = obs.mSeen.Threshold(0.5);
    for (const auto& [classId, pred] : valid) {
        CheckValidity(pred.mValue, pred.mSeenStar);
        if (cfg.mInformedDecay) {
            const BinaryMask support = seen.Or(pred.mSeenStar);
            RegisterEgo(global.ClassLayer(classId), pred.mValue, obs.mPose,
                        cfg.mAggregation, &support);
        } else {
            RegisterEgo(global.ClassLayer(classId), pred.mValue, obs.mPose, cfg.mAggregation);
        }
    }
    RegisterEgo(global.Seen(), obs.mSeen, obs.mPose, 1.0);
    RegisterEgo(global.Occupancy(), obs.mOccVisible, obs.mPose, 1.0);
}

void SegOnlyUpdate(MultiLayerMap& global, const ObservationStack& obs,
                   const MapperConfig& cfg)
{
    cfg.Validate();
    for (const int classId : global.ClassIds()) {
        if (classId >= static_cast<int>(obs.mClassVisible.size()))
            throw ParameterError("SegOnlyUpdate: class layer missing");
        const GridMap layer = obs.mClassVisible[classId]
            .Threshold(cfg.mPredictionThreshold).ToGrid(obs.mSeen.Resolution());
        RegisterEgo(global.ClassLayer(classId), layer, obs.mPose, 1.0);
    }
    RegisterEgo(global.Seen(), obs.mSeen, obs.mPose, 1.0);
    RegisterEgo(global.Occupancy(), obs.mOccVisible, obs.mPose, 1.0);
}

void ExportGlobalMap(const std::filesystem::path& dir, const MultiLayerMap& global,
                     const std::vector<Pose>& poses)
{
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["resolution"] = global.Resolution();
    manifest["width"] = global.Width();
    manifest["height"] = global.Height();
    manifest["class_ids"] = global.ClassIds();

    nlohmann::ordered_json layers = nlohmann::ordered_json::object();
    WritePgm(dir / "occupancy.pgm", global.Occupancy());
    layers["occupancy"] = "occupancy.pgm";
    WritePgm(dir / "seen.pgm", global.Seen());
    layers["seen"] = "seen.pgm";
    for (const auto& [classId, layer] : global.ClassLayers()) {
        const std::string name = std::string("class_") + ClassName(static_cast<ObjectClass>(classId)) + ".pgm";
        WritePgm(dir / name, layer);
        layers[ClassName(static_cast<ObjectClass>(classId))] = name;
    }
    manifest["layers"] = layers;

    nlohmann::ordered_json log = nlohmann::ordered_json::array();
    for (const auto& p : poses)
        log.push_back({ p.mX, p.mY, p.mTheta });
    manifest["poses"] = log;
    WriteFileText(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedMap ImportGlobalMap(const std::filesystem::path& dir)
{
    const auto bytes = ReadFileBytes(dir / "manifest.json");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("map manifest: ") + e.what());
    }

    LoadedMap out;
    try {
        const double res = manifest.at("resolution").get<double>();
        const int w = manifest.at("width").get<int>();
        const int h = manifest.at("height").get<int>();
        const auto classIds = manifest.at("class_ids").get<std::vector<int>>();
        out.mMap = MultiLayerMap(w, h, res, classIds);

        const auto& layers = manifest.at("layers");
        auto load = [&](const std::string& key, GridMap& dst) {
            GridMap g = ReadPgm(dir / layers.at(key).get<std::string>(), res);
            if (!g.SameShape(dst))
                throw FormatError("map layer '" + key + "' has the wrong size");
            dst = std::move(g);
        };
        load("occupancy", out.mMap.Occupancy());
        load("seen", out.mMap.Seen());
        for (const int c : classIds)
            load(ClassName(static_cast<ObjectClass>(c)), out.mMap.ClassLayer(c));

        for (const auto& p : manifest.at("poses"))
            out.mPoses.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                                    p.at(2).get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("map manifest: ") + e.what());
    }
    return out;
}

std::string RenderComposite(const MultiLayerMap& map, double threshold)
{
    static constexpr std::uint8_t kTint[kNumClasses][3] = {
        { 230, 60, 50 },
        { 40, 120, 230 },
        { 60, 180, 80 },
    };
    const int w = map.Width();
    const int h = map.Height();
    std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + static_cast<std::size_t>(w) * h * 3, '\0');

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t rgb[3] = { 0, 0, 0 };
            if (map.Seen().At(x, y) > threshold)
                rgb[0] = rgb[1] = rgb[2] = 200;
            if (map.Occupancy().At(x, y) > threshold)
                rgb[0] = rgb[1] = rgb[2] = 70;
            for (const auto& [classId, layer] : map.ClassLayers()) {
                if (layer.At(x, y) > threshold && classId >= 0 && classId < kNumClasses) {
                    for (int k = 0; k < 3; ++k)
                        rgb[k] = kTint[classId][k];
                }
            }
            const std::size_t at = header + (static_cast<std::size_t>(y) * w + x) * 3;
            for (int k = 0; k < 3; ++k)
                out[at + k] = static_cast<char>(rgb[k]);
        }
    }
    return out;
}

} // namespace imagimap
