/* scene_sim.hpp */

#ifndef IMAGIMAP_SCENE_SIM_HPP
#define IMAGIMAP_SCENE_SIM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "imagimap/grid_core.hpp"

namespace imagimap {

/* Object categories; the integer value is the class id */
enum class ObjectClass : int
{
    Chair = 0,
    Table = 1,
    Bed = 2,
};

constexpr int kNumClasses = 3;

const char* ClassName(ObjectClass objectClass) noexcept;
/* Throws ParameterError for unknown names */
ObjectClass ClassFromName(const std::string& name);
std::vector<int> AllClassIds();

/* Axis-aligned rectangle in meters, [x0, x1) x [y0, y1) */
struct Rect
{
    double mX0 = 0.0;
    double mY0 = 0.0;
    double mX1 = 0.0;
    double mY1 = 0.0;

    double Width() const noexcept { return mX1 - mX0; }
    double Height() const noexcept { return mY1 - mY0; }
    /* Gap between two rectangles (0 when touching or overlapping) */
    double Distance(const Rect& other) const noexcept;
    Rect Union(const Rect& other) const noexcept;
};

/*
 * ObjectTemplate describes a parametric shape family as a compound of
 * rectangles in a canonical frame centered at the origin. Rotations are
 * restricted to multiples of a quarter turn so rasterized footprints stay
 * axis-aligned and connected.
 */
struct ObjectTemplate
{
    ObjectClass         mClass = ObjectClass::Chair;
    /* Characteristic size range in meters */
    double              mScaleMin = 0.0;
    double              mScaleMax = 0.0;
    /* Width / length ratio range (ignored by square shapes) */
    double              mAspectMin = 1.0;
    double              mAspectMax = 1.0;
    std::vector<double> mAllowedRotations;

    /* Canonical-frame rectangles for a given scale and aspect */
    std::vector<Rect> CanonicalParts(double scale, double aspect) const;
};

const ObjectTemplate& TemplateFor(ObjectClass objectClass);

struct ObjectInstance
{
    ObjectClass mClass = ObjectClass::Chair;
    double      mX = 0.0;
    double      mY = 0.0;
    double      mRotation = 0.0;
    double      mScale = 0.0;
    double      mAspect = 1.0;

    /* World-frame footprint rectangles */
    std::vector<Rect> Parts() const;
    /* Axis-aligned bounding box of the footprint */
    Rect BoundingBox() const;
};

struct WallSegment
{
    double mX0 = 0.0;
    double mY0 = 0.0;
    double mX1 = 0.0;
    double mY1 = 0.0;
};

struct SceneParams
{
    double mExtentMin = 7.0;
    double mExtentMax = 9.0;
    int    mMaxPartitions = 2;
    double mDoorWidth = 1.2;
    /* Minimum gap between objects and between objects and walls */
    double mClearance = 0.3;
    /* Per-class object count ranges, indexed by class id */
    std::array<int, kNumClasses> mCountMin = { 2, 1, 1 };
    std::array<int, kNumClasses> mCountMax = { 4, 2, 1 };
    int    mPlacementTries = 300;
    /* Agent placement needs a free disk of this radius */
    double mAgentRadius = 0.3;
    /* Resolution used for the agent free-space check */
    double mResolution = 0.1;
};

/* Throws ParameterError when bounds are not sane */
void ValidateSceneParams(const SceneParams& params);

struct SceneSpec
{
    std::uint64_t               mSeed = 0;
    double                      mExtentX = 0.0;
    double                      mExtentY = 0.0;
    std::vector<WallSegment>    mWalls;
    std::vector<ObjectInstance> mObjects;
    /* Set when placement gave up before all requested objects fit */
    bool                        mPlacementWarning = false;
};

SceneSpec GenerateScene(std::uint64_t seed, const SceneParams& params);

/*
 * SceneRaster is the cell-level view of a scene: occupancy (walls and all
 * footprints), per-class footprint layers, per-class bounding-box layers
 * and the owning object of every cell.
 */
struct SceneRaster
{
    /* Occupancy plus one footprint layer per class */
    MultiLayerMap            mLayers;
    /* Per-class union of bounding boxes, indexed by class id */
    std::vector<GridMap>     mBoxLayers;
    GridMap                  mWalls;
    /* -1 free, -2 wall, otherwise the object index */
    std::vector<int>         mOwner;

    int Width() const noexcept { return mLayers.Width(); }
    int Height() const noexcept { return mLayers.Height(); }
    double Resolution() const noexcept { return mLayers.Resolution(); }

    bool Occupied(int x, int y) const
    { return mOwner[static_cast<std::size_t>(y) * this->Width() + x] != -1; }
    /* Free cells inside the map */
    BinaryMask FreeMask() const;
};

constexpr int kDefaultMaxGridCells = 2001;

/* Throws SizeError when the grid would exceed maxCells per side */
SceneRaster Rasterize(const SceneSpec& scene, double resolution,
                      int maxCells = kDefaultMaxGridCells);

struct SensorSpec
{
    double mFov = 1.57;
    double mMaxRange = 3.0;
    int    mRayCount = 181;
    /* Egocentric window size in cells; must be odd */
    int    mEgoSize = 65;
    /* Optional hook: probability of dropping a visible hit; off by default */
    double mDropout = 0.0;
    std::uint64_t mDropoutSeed = 0;
};

/* Egocentric size used with the full-scale preset */
constexpr int kFullScaleEgoSize = 261;

void ValidateSensorSpec(const SensorSpec& sensor);

/*
 * Egocentric partial observation. All layers are ego-size square grids
 * with the agent at the center cell heading up.
 */
struct ObservationStack
{
    /* Cells traversed by rays, up to and including the first hit */
    GridMap              mSeen;
    /* First-hit obstacle cells */
    GridMap              mOccVisible;
    /* First-hit cells per class, indexed by class id */
    std::vector<GridMap> mClassVisible;
    Pose                 mPose;
};

/* Ray-cast observation; throws PreconditionError if the pose is not free */
ObservationStack Observe(const SceneRaster& raster, const Pose& pose,
                         const SensorSpec& sensor);
ObservationStack Observe(const SceneSpec& scene, const Pose& pose,
                         const SensorSpec& sensor, double resolution);

/* World-frame seen / hit layers of one observation (full map size) */
struct WorldObservation
{
    GridMap              mSeen;
    GridMap              mOccVisible;
    std::vector<GridMap> mClassVisible;
};

WorldObservation ObserveWorld(const SceneRaster& raster, const Pose& pose,
                              const SensorSpec& sensor);

/* World coordinates of a cell center */
inline Pose CellCenterPose(int x, int y, double resolution, double theta)
{
    return Pose((x + 0.5) * resolution, (y + 0.5) * resolution, theta);
}

} // namespace imagimap

#endif // IMAGIMAP_SCENE_SIM_HPP
