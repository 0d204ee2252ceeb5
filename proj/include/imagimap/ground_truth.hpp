/* ground_truth.hpp */

#ifndef IMAGIMAP_GROUND_TRUTH_HPP
#define IMAGIMAP_GROUND_TRUTH_HPP

#include "imagimap/grid_core.hpp"
#include "imagimap/scene_sim.hpp"

namespace imagimap {

/*
 * Kernel sizes are in cells and must be odd. The defaults round the
 * reference values 30 and 50 up to 31 and 51.
 */
struct GtConfig
{
    int    mSegKernel = 31;
    int    mDelta = 51;
    int    mEpsilon = 31;
    double mThreshold = 0.5;

    /* Throws ParameterError on even or non-positive kernels */
    void Validate() const;
};

/* Training targets for one class at one viewpoint */
struct GroundTruthBundle
{
    /* Egocentric label restricted to the imaginable area */
    GridMap    mTargetCrop;
    /* Imaginable area: dilated visible object cells */
    BinaryMask mFilter;
    /* Validity area for imagination: dilated seen object cells */
    BinaryMask mSeenStar;
};

/* Object ground truth: occupancy AND label AND dilated segmentation */
BinaryMask BuildObjectGt(const GridMap& occupancy, const GridMap& label,
                         const GridMap& segmentation, const GtConfig& cfg);

/* Object ground truth of one class straight from a rasterized scene */
BinaryMask BuildSceneGt(const SceneRaster& raster, int classId, const GtConfig& cfg);

/* dilate(objectGt AND seen, delta) */
BinaryMask ImaginableFilter(const BinaryMask& objectGt, const BinaryMask& seen,
                            const GtConfig& cfg);

/* dilate((object > threshold) AND seen, epsilon) */
BinaryMask SeenStar(const GridMap& object, const BinaryMask& seen,
                    const GtConfig& cfg);

/*
 * Crop the global ground truth into the agent frame and keep only the
 * part that is imaginable from this observation.
 */
GroundTruthBundle MakeTarget(const BinaryMask& sceneGt, const Pose& pose,
                             const ObservationStack& obs, int classId,
                             const GtConfig& cfg);

} // namespace imagimap

#endif // IMAGIMAP_GROUND_TRUTH_HPP
