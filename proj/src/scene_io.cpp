/* scene_io.cpp */

#include "imagimap/scene_io.hpp"

#include <json.hpp>

#include "imagimap/errors.hpp"
#include "imagimap/grid_io.hpp"

namespace imagimap {

using OrderedJson = nlohmann::ordered_json;

std::string SceneToJson(const SceneSpec& scene)
{
    OrderedJson doc;
    doc["seed"] = scene.mSeed;
    doc["extent"] = { scene.mExtentX, scene.mExtentY };

    OrderedJson walls = OrderedJson::array();
    for (const auto& w : scene.mWalls)
        walls.push_back({ w.mX0, w.mY0, w.mX1, w.mY1 });
    doc["walls"] = std::move(walls);

    OrderedJson objects = OrderedJson::array();
    for (const auto& o : scene.mObjects) {
        OrderedJson obj;
        obj["class"] = ClassName(o.mClass);
        obj["pose"] = { o.mX, o.mY, o.mRotation };
        obj["scale"] = o.mScale;
        obj["aspect"] = o.mAspect;
        objects.push_back(std::move(obj));
    }
    doc["objects"] = std::move(objects);
    doc["placement_warning"] = scene.mPlacementWarning;
    return doc.dump(2) + "\n";
}

SceneSpec SceneFromJson(const std::string& text)
{
    SceneSpec scene;
    try {
        const auto doc = OrderedJson::parse(text);
        scene.mSeed = doc.at("seed").get<std::uint64_t>();
        scene.mExtentX = doc.at("extent").at(0).get<double>();
        scene.mExtentY = doc.at("extent").at(1).get<double>();
        for (const auto& w : doc.at("walls")) {
            if (w.size() != 4)
                throw FormatError("scene wall must have 4 coordinates");
            scene.mWalls.push_back({ w[0].get<double>(), w[1].get<double>(),
                                     w[2].get<double>(), w[3].get<double>() });
        }
        for (const auto& o : doc.at("objects")) {
            ObjectInstance obj;
            obj.mClass = ClassFromName(o.at("class").get<std::string>());
            obj.mX = o.at("pose").at(0).get<double>();
            obj.mY = o.at("pose").at(1).get<double>();
            obj.mRotation = o.at("pose").at(2).get<double>();
            obj.mScale = o.at("scale").get<double>();
            obj.mAspect = o.value("aspect", 1.0);
            scene.mObjects.push_back(obj);
        }
        scene.mPlacementWarning = doc.value("placement_warning", false);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid scene JSON: ") + e.what());
    }
    return scene;
}

void WriteScene(const std::filesystem::path& path, const SceneSpec& scene)
{
    WriteFileText(path, SceneToJson(scene));
}

SceneSpec ReadScene(const std::filesystem::path& path)
{
    const auto bytes = ReadFileBytes(path);
    return SceneFromJson(std::string(bytes.begin(), bytes.end()));
}

} // namespace imagimap
