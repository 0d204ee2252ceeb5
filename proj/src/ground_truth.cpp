/* ground_truth.cpp */

#include "imagimap/ground_truth.hpp"

#include <string>

#include "imagimap/errors.hpp"

namespace imagimap {

void GtConfig::Validate() const
{
    for (const int k : { mSegKernel, mDelta, mEpsilon })
        if (k < 1 || k % 2 == 0)
            throw ParameterError("GtConfig: kernels must be odd and positive, got " +
                                 std::to_string(k));
    if (!(mThreshold >= 0.0 && mThreshold < 1.0))
        throw ParameterError("GtConfig: threshold must be in [0, 1)");
}

BinaryMask BuildObjectGt(const GridMap& occupancy, const GridMap& label,
                         const GridMap& segmentation, const GtConfig& cfg)
{
    cfg.Validate();
    if (!occupancy.SameShape(label) || !occupancy.SameShape(segmentation))
        throw DimensionError("BuildObjectGt: shape mismatch");

    const BinaryMask seg = Dilate(segmentation.Threshold(cfg.mThreshold), cfg.mSegKernel);
    return Intersect3(occupancy, label, seg.ToGrid(segmentation.Resolution()),
                      cfg.mThreshold);
}

BinaryMask BuildSceneGt(const SceneRaster& raster, int classId, const GtConfig& cfg)
{
    return BuildObjectGt(raster.mLayers.Occupancy(), raster.mBoxLayers.at(classId),
                         raster.mLayers.ClassLayer(classId), cfg);
}

BinaryMask ImaginableFilter(const BinaryMask& objectGt, const BinaryMask& seen,
                            const GtConfig& cfg)
{
    cfg.Validate();
    if (!objectGt.SameShape(seen))
        throw DimensionError("ImaginableFilter: shape mismatch");
    return Dilate(objectGt.And(seen), cfg.mDelta);
}

BinaryMask SeenStar(const GridMap& object, const BinaryMask& seen,
                    const GtConfig& cfg)
{
    cfg.Validate();
    if (!seen.SameShape(object))
        throw DimensionError("SeenStar: shape mismatch");
    return Dilate(object.Threshold(cfg.mThreshold).And(seen), cfg.mEpsilon);
}

GroundTruthBundle MakeTarget(const BinaryMask& sceneGt, const Pose& pose,
                             const ObservationStack& obs, int classId,
                             const GtConfig& cfg)
{
    cfg.Validate();
    if (classId < 0 || classId >= static_cast<int>(obs.mClassVisible.size()))
        throw ParameterError("MakeTarget: class layer missing");

    const double res = obs.mSeen.Resolution();
    const int size = obs.mSeen.Width();
    const GridMap crop = CropEgo(sceneGt.ToGrid(res), pose, size);
    const BinaryMask cropMask = crop.Threshold(cfg.mThreshold);
    const BinaryMask seen = obs.mSeen.Threshold(cfg.mThreshold);

    /* Ground-truth object cells the sensor actually hit */
    const BinaryMask visibleObject =
        cropMask.And(obs.mClassVisible[classId].Threshold(cfg.mThreshold));

    GroundTruthBundle bundle;
    bundle.mFilter = ImaginableFilter(visibleObject, seen, cfg);
    bundle.mSeenStar = SeenStar(visibleObject.ToGrid(res), seen, cfg);
    bundle.mTargetCrop = crop.Multiply(bundle.mFilter);
    return bundle;
}

} // namespace imagimap
