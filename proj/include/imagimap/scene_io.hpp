/* scene_io.hpp */

#ifndef IMAGIMAP_SCENE_IO_HPP
#define IMAGIMAP_SCENE_IO_HPP

#include <filesystem>
#include <string>

#include "imagimap/scene_sim.hpp"

namespace imagimap {

/* JSON document with a fixed field order, so equal scenes give equal bytes */
std::string SceneToJson(const SceneSpec& scene);
SceneSpec SceneFromJson(const std::string& text);

void WriteScene(const std::filesystem::path& path, const SceneSpec& scene);
SceneSpec ReadScene(const std::filesystem::path& path);

} // namespace imagimap

#endif // IMAGIMAP_SCENE_IO_HPP
