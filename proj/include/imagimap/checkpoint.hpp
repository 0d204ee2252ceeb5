/* checkpoint.hpp */

#ifndef IMAGIMAP_CHECKPOINT_HPP
#define IMAGIMAP_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imagimap/network.hpp"
#include "imagimap/trainer.hpp"

namespace imagimap {

constexpr std::uint32_t kCheckpointVersion = 2;

/*
 * Parameter checkpoint: "IMUN", version u32, class id u32, layer count u32,
 * then per layer four u32 dims and an f32 payload. All little-endian.
 */
std::vector<std::uint8_t> EncodeUnit(const ImaginationUnit& unit);
ImaginationUnit DecodeUnit(const std::vector<std::uint8_t>& bytes);
void SaveUnit(const std::filesystem::path& path, const ImaginationUnit& unit);
ImaginationUnit LoadUnit(const std::filesystem::path& path);

/*
 * Resumable training state: "IMST", version, class id, step u64 (as two
 * u32), layer count, then per layer dims and f64 parameters, first and
 * second moments.
 */
std::vector<std::uint8_t> EncodeTrainingState(const TrainingState& state);
TrainingState DecodeTrainingState(const std::vector<std::uint8_t>& bytes);
void SaveTrainingState(const std::filesystem::path& path, const TrainingState& state);
TrainingState LoadTrainingState(const std::filesystem::path& path);

/* CSV with header step,loss,w_alpha_mean,w_gamma_mean */
std::string LossCurveCsv(const std::vector<LossRecord>& curve);

} // namespace imagimap

#endif // IMAGIMAP_CHECKPOINT_HPP
