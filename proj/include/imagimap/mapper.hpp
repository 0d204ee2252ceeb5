/* mapper.hpp */

#ifndef IMAGIMAP_MAPPER_HPP
#define IMAGIMAP_MAPPER_HPP

#include <filesystem>
#include <map>
#include <vector>

#include "imagimap/grid_core.hpp"
#include "imagimap/network.hpp"
#include "imagimap/scene_sim.hpp"

namespace imagimap {

struct MapperConfig
{
    double mPredictionThreshold = 0.5;
    double mAggregation = 0.9;
    int    mEpsilon = 31;
    /* Seed the seen-object mask from the prediction instead of the observation */
    bool   mPredictionSeeded = false;
    /*
     * Limit the decay of class layers to cells this view says something
     * about (seen cells and the seen-object neighbourhood)
     */
    bool   mInformedDecay = true;

    void Validate() const;
};

/* Prediction restricted to the neighbourhood of the seen object */
struct ValidPrediction
{
    GridMap    mValue;
    BinaryMask mSeenStar;
};

/* Mask used by the validity filter for one class */
BinaryMask ValidityMask(const GridMap& classVisible, const GridMap& seen,
                        const MapperConfig& cfg);

/* forward(unit, obs) * M*_seen; cells outside the mask are exactly zero */
ValidPrediction ImagineValid(const ImaginationUnit& unit, const ObservationStack& obs,
                             const MapperConfig& cfg);
ValidPrediction ApplyValidity(const GridMap& prediction, const ObservationStack& obs,
                              int classId, const MapperConfig& cfg);

/* Throws InvariantViolation when the value is non-zero outside the mask */
void CheckValidity(const GridMap& value, const BinaryMask& seenStar);

/*
 * Register one view. Seen and occupancy merge with aggregation 1.0, each
 * class layer with the configured aggregation.
 */
void UpdateGlobal(MultiLayerMap& global, const std::map<int, ValidPrediction>& valid,
                  const ObservationStack& obs, const MapperConfig& cfg);

/* Baseline: register the thresholded visible class cells as they are */
void SegOnlyUpdate(MultiLayerMap& global, const ObservationStack& obs,
                   const MapperConfig& cfg);

/* One PGM per layer plus manifest.json with class ids, resolution and poses */
void ExportGlobalMap(const std::filesystem::path& dir, const MultiLayerMap& global,
                     const std::vector<Pose>& poses);

struct LoadedMap
{
    MultiLayerMap     mMap;
    std::vector<Pose> mPoses;
};

/* Inverse of ExportGlobalMap up to 8-bit quantization */
LoadedMap ImportGlobalMap(const std::filesystem::path& dir);

/*
 * Binary PPM (P6): free seen cells light grey, occupancy dark, class
 * layers above the threshold tinted per class.
 */
std::string RenderComposite(const MultiLayerMap& map, double threshold = 0.5);

} // namespace imagimap

#endif // IMAGIMAP_MAPPER_HPP
