/* scene_sim.cpp */

#include "imagimap/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "imagimap/errors.hpp"
#include "imagimap/rng.hpp"

namespace imagimap {

namespace {

constexpr double kQuarterTurn = std::numbers::pi / 2.0;
/* Walls are thin segments centered half a decimeter inside the extent */
constexpr double kWallInset = 0.05;
constexpr double kWallHalfThickness = 0.05;

int QuarterTurns(double rotation) noexcept
{
    const long k = std::lround(rotation / kQuarterTurn);
    return static_cast<int>(((k % 4) + 4) % 4);
}

Rect RotateQuarter(const Rect& r, int turns) noexcept
{
    Rect out = r;
    for (int i = 0; i < turns; ++i)
        out = Rect { -out.mY1, out.mX0, -out.mY0, out.mX1 };
    return out;
}

int CellsAlong(double extent, double resolution) noexcept
{
    return static_cast<int>(std::ceil(extent / resolution - 1e-9));
}

/* Cells whose centers fall inside the rectangle */
template <typename Fn>
void ForEachCellIn(const Rect& r, double res, int width, int height, Fn&& fn)
{
    const int x0 = std::max(0, static_cast<int>(std::ceil(r.mX0 / res - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(r.mY0 / res - 0.5)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(r.mX1 / res - 0.5)) - 1);
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(r.mY1 / res - 0.5)) - 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            fn(x, y);
}

Rect WallRect(const WallSegment& w) noexcept
{
    return Rect { std::min(w.mX0, w.mX1) - kWallHalfThickness,
                  std::min(w.mY0, w.mY1) - kWallHalfThickness,
                  std::max(w.mX0, w.mX1) + kWallHalfThickness,
                  std::max(w.mY0, w.mY1) + kWallHalfThickness };
}

double RoundToDecimeterCenter(double v) noexcept
{
    return std::floor(v * 10.0) / 10.0 + kWallInset;
}

} // namespace

const char* ClassName(ObjectClass objectClass) noexcept
{
    switch (objectClass) {
        case ObjectClass::Chair: return "chair";
        case ObjectClass::Table: return "table";
        case ObjectClass::Bed:   return "bed";
    }
    return "unknown";
}

ObjectClass ClassFromName(const std::string& name)
{
    if (name == "chair")
        return ObjectClass::Chair;
    if (name == "table")
        return ObjectClass::Table;
    if (name == "bed")
        return ObjectClass::Bed;
    throw ParameterError("unknown object class '" + name + "'");
}

std::vector<int> AllClassIds()
{
    std::vector<int> ids(kNumClasses);
    for (int i = 0; i < kNumClasses; ++i)
        ids[i] = i;
    return ids;
}

double Rect::Distance(const Rect& other) const noexcept
{
    const double dx = std::max({ 0.0, other.mX0 - mX1, mX0 - other.mX1 });
    const double dy = std::max({ 0.0, other.mY0 - mY1, mY0 - other.mY1 });
    return std::hypot(dx, dy);
}

Rect Rect::Union(const Rect& other) const noexcept
{
    return Rect { std::min(mX0, other.mX0), std::min(mY0, other.mY0),
                  std::max(mX1, other.mX1), std::max(mY1, other.mY1) };
}

std::vector<Rect> ObjectTemplate::CanonicalParts(double scale, double aspect) const
{
    switch (mClass) {
        case ObjectClass::Chair: {
            /* Square seat plus a back bar that overhangs the seat sides */
            const double h = 0.5 * scale;
            return { Rect { -h, -h, h, h },
                     Rect { -h - 0.05, h, h + 0.05, h + 0.1 } };
        }
        case ObjectClass::Table: {
            const double hl = 0.5 * scale;
            const double hw = 0.5 * scale * aspect;
            return { Rect { -hw, -hl, hw, hl } };
        }
        case ObjectClass::Bed: {
            /* Mattress plus a wider headboard on one short side */
            const double hl = 0.5 * scale;
            const double hw = 0.5 * scale * aspect;
            return { Rect { -hw, -hl, hw, hl },
                     Rect { -hw - 0.05, hl, hw + 0.05, hl + 0.15 } };
        }
    }
    return {};
}

const ObjectTemplate& TemplateFor(ObjectClass objectClass)
{
    static const std::vector<double> rotations = {
        0.0, kQuarterTurn, 2.0 * kQuarterTurn, 3.0 * kQuarterTurn };
    static const ObjectTemplate templates[kNumClasses] = {
        { ObjectClass::Chair, 0.45, 0.6, 1.0, 1.0, rotations },
        { ObjectClass::Table, 1.0, 1.6, 0.5, 0.8, rotations },
        { ObjectClass::Bed, 1.9, 2.2, 0.45, 0.75, rotations },
    };
    return templates[static_cast<int>(objectClass)];
}

std::vector<Rect> ObjectInstance::Parts() const
{
    const int turns = QuarterTurns(mRotation);
    auto parts = TemplateFor(mClass).CanonicalParts(mScale, mAspect);
    for (auto& p : parts) {
        p = RotateQuarter(p, turns);
        p.mX0 += mX;
        p.mX1 += mX;
        p.mY0 += mY;
        p.mY1 += mY;
    }
    return parts;
}

Rect ObjectInstance::BoundingBox() const
{
    const auto parts = this->Parts();
    Rect box = parts.front();
    for (const auto& p : parts)
        box = box.Union(p);
    return box;
}

void ValidateSceneParams(const SceneParams& params)
{
    if (params.mExtentMin < 4.0 || params.mExtentMax < params.mExtentMin)
        throw ParameterError("scene extent must be at least 4 m and min <= max");
    if (params.mMaxPartitions < 0 || params.mMaxPartitions > 3)
        throw ParameterError("scene partitions must be in [0, 3]");
    if (!(params.mDoorWidth > 0.0) || params.mClearance < 0.0 ||
        !(params.mResolution > 0.0) || params.mAgentRadius < 0.0)
        throw ParameterError("scene door width, clearance or resolution invalid");
    if (params.mPlacementTries < 1)
        throw ParameterError("scene placement tries must be positive");
    for (int c = 0; c < kNumClasses; ++c)
        if (params.mCountMin[c] < 0 || params.mCountMax[c] < params.mCountMin[c])
            throw ParameterError("scene object count range invalid");
}

namespace {

bool HasAgentSpace(const SceneSpec& scene, const SceneParams& params)
{
    const SceneRaster raster = Rasterize(scene, params.mResolution);
    const int radius = static_cast<int>(std::ceil(params.mAgentRadius / params.mResolution));
    const BinaryMask blocked = Dilate(raster.FreeMask().Not(), 2 * radius + 1);
    return blocked.Count() < blocked.NumCells();
}

} // namespace

SceneSpec GenerateScene(std::uint64_t seed, const SceneParams& params)
{
    ValidateSceneParams(params);
    Rng rng(deriveSeed({ seed, 0x5343454eULL }));

    SceneSpec scene;
    scene.mSeed = seed;
    scene.mExtentX = std::round(rng.Uniform(params.mExtentMin, params.mExtentMax) * 10.0) / 10.0;
    scene.mExtentY = std::round(rng.Uniform(params.mExtentMin, params.mExtentMax) * 10.0) / 10.0;

    const double ex = scene.mExtentX;
    const double ey = scene.mExtentY;
    const double lo = kWallInset;
    scene.mWalls = {
        { lo, lo, ex - lo, lo },
        { ex - lo, lo, ex - lo, ey - lo },
        { ex - lo, ey - lo, lo, ey - lo },
        { lo, ey - lo, lo, lo },
    };

    /* Interior partitions with a door gap each */
    const int numPartitions = static_cast<int>(rng.Index(params.mMaxPartitions + 1));
    std::vector<double> verticals;
    std::vector<double> horizontals;
    for (int i = 0; i < numPartitions; ++i) {
        const bool vertical = rng.Uniform01() < 0.5;
        const double span = vertical ? ex : ey;
        const double length = vertical ? ey : ex;
        const double pos = RoundToDecimeterCenter(rng.Uniform(0.3, 0.7) * span);
        const double door = rng.Uniform(0.2 * length, 0.8 * length);
        auto& taken = vertical ? verticals : horizontals;
        const bool tooClose = std::any_of(taken.begin(), taken.end(),
            [pos](double p) { return std::abs(p - pos) < 1.5; });
        if (tooClose)
            continue;
        taken.push_back(pos);

        const double gap0 = std::max(lo, door - 0.5 * params.mDoorWidth);
        const double gap1 = std::min(length - lo, door + 0.5 * params.mDoorWidth);
        if (vertical) {
            scene.mWalls.push_back({ pos, lo, pos, gap0 });
            scene.mWalls.push_back({ pos, gap1, pos, ey - lo });
        } else {
            scene.mWalls.push_back({ lo, pos, gap0, pos });
            scene.mWalls.push_back({ gap1, pos, ex - lo, pos });
        }
    }

    std::vector<Rect> wallRects;
    for (const auto& w : scene.mWalls)
        wallRects.push_back(WallRect(w));

    const double margin = kWallInset + kWallHalfThickness + params.mClearance;
    auto fits = [&](const ObjectInstance& obj) {
        const Rect box = obj.BoundingBox();
        if (box.mX0 < margin || box.mY0 < margin ||
            box.mX1 > ex - margin || box.mY1 > ey - margin)
            return false;
        for (const auto& wr : wallRects)
            if (box.Distance(wr) < params.mClearance)
                return false;
        for (const auto& other : scene.mObjects)
            if (box.Distance(other.BoundingBox()) < params.mClearance)
                return false;
        return true;
    };

    /* Large objects first so they are not crowded out */
    const ObjectClass order[] = { ObjectClass::Bed, ObjectClass::Table, ObjectClass::Chair };
    for (const ObjectClass cls : order) {
        const int c = static_cast<int>(cls);
        const int span = params.mCountMax[c] - params.mCountMin[c] + 1;
        const int count = params.mCountMin[c] + static_cast<int>(rng.Index(span));
        const ObjectTemplate& tmpl = TemplateFor(cls);

        for (int n = 0; n < count; ++n) {
            bool placed = false;
            for (int attempt = 0; attempt < params.mPlacementTries && !placed; ++attempt) {
                ObjectInstance obj;
                obj.mClass = cls;
                obj.mScale = rng.Uniform(tmpl.mScaleMin, tmpl.mScaleMax);
                obj.mAspect = tmpl.mAspectMin == tmpl.mAspectMax
                    ? tmpl.mAspectMin : rng.Uniform(tmpl.mAspectMin, tmpl.mAspectMax);
                obj.mRotation = tmpl.mAllowedRotations[rng.Index(tmpl.mAllowedRotations.size())];

                /* Chairs are often drawn up to a table */
                const bool nearTable = cls == ObjectClass::Chair && rng.Uniform01() < 0.5;
                std::vector<const ObjectInstance*> tables;
                for (const auto& o : scene.mObjects)
                    if (o.mClass == ObjectClass::Table)
                        tables.push_back(&o);
                if (nearTable && !tables.empty()) {
                    const Rect t = tables[rng.Index(tables.size())]->BoundingBox();
                    const double reach = params.mClearance + 0.5 * obj.mScale + 0.3;
                    obj.mX = rng.Uniform(t.mX0 - reach, t.mX1 + reach);
                    obj.mY = rng.Uniform(t.mY0 - reach, t.mY1 + reach);
                } else {
                    obj.mX = rng.Uniform(margin, ex - margin);
                    obj.mY = rng.Uniform(margin, ey - margin);
                }
                if (fits(obj)) {
                    scene.mObjects.push_back(obj);
                    placed = true;
                }
            }
            if (!placed)
                scene.mPlacementWarning = true;
        }
    }

    while (!scene.mObjects.empty() && !HasAgentSpace(scene, params)) {
        scene.mObjects.pop_back();
        scene.mPlacementWarning = true;
    }
    return scene;
}

BinaryMask SceneRaster::FreeMask() const
{
    BinaryMask mask(this->Width(), this->Height());
    auto bits = mask.MutableBits();
    for (std::size_t i = 0; i < mOwner.size(); ++i)
        bits[i] = mOwner[i] == -1 ? 1 : 0;
    return mask;
}

SceneRaster Rasterize(const SceneSpec& scene, double resolution, int maxCells)
{
    if (!(resolution > 0.0))
        throw ParameterError("Rasterize: resolution must be positive");
    const int width = CellsAlong(scene.mExtentX, resolution);
    const int height = CellsAlong(scene.mExtentY, resolution);
    if (width <= 0 || height <= 0)
        throw ParameterError("Rasterize: scene extent must be positive");
    if (width > maxCells || height > maxCells)
        throw SizeError("Rasterize: grid " + std::to_string(width) + "x" +
                        std::to_string(height) + " exceeds maximum " +
                        std::to_string(maxCells));

    SceneRaster raster;
    raster.mLayers = MultiLayerMap(width, height, resolution, AllClassIds());
    raster.mWalls = GridMap(width, height, resolution);
    raster.mOwner.assign(static_cast<std::size_t>(width) * height, -1);
    for (int c = 0; c < kNumClasses; ++c)
        raster.mBoxLayers.emplace_back(width, height, resolution);

    auto& occupancy = raster.mLayers.Occupancy();
    for (const auto& w : scene.mWalls) {
        const double len = std::hypot(w.mX1 - w.mX0, w.mY1 - w.mY0);
        const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.25 * resolution))));
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            const int x = static_cast<int>(std::floor((w.mX0 + t * (w.mX1 - w.mX0)) / resolution));
            const int y = static_cast<int>(std::floor((w.mY0 + t * (w.mY1 - w.mY0)) / resolution));
            if (!raster.mWalls.InBounds(x, y))
                continue;
            raster.mWalls.Set(x, y, 1.0f);
            occupancy.Set(x, y, 1.0f);
            raster.mOwner[static_cast<std::size_t>(y) * width + x] = -2;
        }
    }

    for (std::size_t i = 0; i < scene.mObjects.size(); ++i) {
        const auto& obj = scene.mObjects[i];
        const int c = static_cast<int>(obj.mClass);
        GridMap& layer = raster.mLayers.ClassLayer(c);
        for (const auto& part : obj.Parts()) {
            ForEachCellIn(part, resolution, width, height, [&](int x, int y) {
                layer.Set(x, y, 1.0f);
                occupancy.Set(x, y, 1.0f);
                raster.mOwner[static_cast<std::size_t>(y) * width + x] = static_cast<int>(i);
            });
        }
        ForEachCellIn(obj.BoundingBox(), resolution, width, height, [&](int x, int y) {
            raster.mBoxLayers[c].Set(x, y, 1.0f);
        });
    }
    return raster;
}

void ValidateSensorSpec(const SensorSpec& sensor)
{
    if (!(sensor.mFov > 0.0) || sensor.mFov > 2.0 * std::numbers::pi + 1e-12)
        throw ParameterError("sensor fov must be in (0, 2*pi]");
    if (!(sensor.mMaxRange > 0.0))
        throw ParameterError("sensor max range must be positive");
    if (sensor.mRayCount < 2)
        throw ParameterError("sensor ray count must be at least 2");
    if (sensor.mEgoSize < 1 || sensor.mEgoSize % 2 == 0)
        throw ParameterError("sensor ego size must be odd");
    if (sensor.mDropout < 0.0 || sensor.mDropout >= 1.0)
        throw ParameterError("sensor dropout must be in [0, 1)");
}

namespace {

/* Window of cells around the agent that rays can reach */
struct RayWindow
{
    int                  mX0 = 0;
    int                  mY0 = 0;
    GridMap              mSeen;
    GridMap              mOccVisible;
    std::vector<GridMap> mClassVisible;
};

RayWindow CastRays(const SceneRaster& raster, const Pose& pose,
                   const SensorSpec& sensor, bool fullMap)
{
    ValidateSensorSpec(sensor);
    const double res = raster.Resolution();
    const int width = raster.Width();
    const int height = raster.Height();
    const int ax = static_cast<int>(std::floor(pose.mX / res));
    const int ay = static_cast<int>(std::floor(pose.mY / res));
    if (ax < 0 || ay < 0 || ax >= width || ay >= height)
        throw PreconditionError("Observe: pose outside the map");
    if (raster.Occupied(ax, ay))
        throw PreconditionError("Observe: pose inside an obstacle");

    RayWindow win;
    int winW = width;
    int winH = height;
    if (!fullMap) {
        const int reach = static_cast<int>(std::ceil(sensor.mMaxRange / res)) + 2;
        win.mX0 = ax - reach;
        win.mY0 = ay - reach;
        winW = 2 * reach + 1;
        winH = 2 * reach + 1;
    }
    win.mSeen = GridMap(winW, winH, res);
    win.mOccVisible = GridMap(winW, winH, res);
    for (int c = 0; c < kNumClasses; ++c)
        win.mClassVisible.emplace_back(winW, winH, res);

    auto seen = win.mSeen.MutableValues();
    auto occ = win.mOccVisible.MutableValues();

    Rng dropoutRng(sensor.mDropoutSeed);
    const double step = res / 3.0;
    const int numSteps = static_cast<int>(std::floor(sensor.mMaxRange / step + 1e-9));
    for (int r = 0; r < sensor.mRayCount; ++r) {
        const double angle = pose.mTheta - 0.5 * sensor.mFov +
            sensor.mFov * static_cast<double>(r) / (sensor.mRayCount - 1);
        const double dx = std::cos(angle);
        const double dy = std::sin(angle);
        for (int k = 0; k <= numSteps; ++k) {
            const double t = k * step;
            const int gx = static_cast<int>(std::floor((pose.mX + t * dx) / res));
            const int gy = static_cast<int>(std::floor((pose.mY + t * dy) / res));
            if (gx < 0 || gy < 0 || gx >= width || gy >= height)
                break;
            const std::size_t wi = static_cast<std::size_t>(gy - win.mY0) * winW + (gx - win.mX0);
            seen[wi] = 1.0f;
            const int owner = raster.mOwner[static_cast<std::size_t>(gy) * width + gx];
            if (owner == -1)
                continue;
            const bool dropped = sensor.mDropout > 0.0 &&
                dropoutRng.Uniform01() < sensor.mDropout;
            if (!dropped) {
                occ[wi] = 1.0f;
                if (owner >= 0) {
                    for (int c = 0; c < kNumClasses; ++c) {
                        if (raster.mLayers.ClassLayer(c).At(gx, gy) > 0.5f) {
                            win.mClassVisible[c].MutableValues()[wi] = 1.0f;
                            break;
                        }
                    }
                }
            }
            break;
        }
    }
    return win;
}

} // namespace

ObservationStack Observe(const SceneRaster& raster, const Pose& pose,
                         const SensorSpec& sensor)
{
    const RayWindow win = CastRays(raster, pose, sensor, false);
    const double res = raster.Resolution();
    /* Crop from the window with the pose expressed in window coordinates */
    const Pose local(pose.mX - win.mX0 * res, pose.mY - win.mY0 * res, pose.mTheta);

    ObservationStack obs;
    obs.mPose = pose;
    obs.mSeen = CropEgo(win.mSeen, local, sensor.mEgoSize);
    obs.mOccVisible = CropEgo(win.mOccVisible, local, sensor.mEgoSize);
    for (const auto& layer : win.mClassVisible)
        obs.mClassVisible.push_back(CropEgo(layer, local, sensor.mEgoSize));
    return obs;
}

ObservationStack Observe(const SceneSpec& scene, const Pose& pose,
                         const SensorSpec& sensor, double resolution)
{
    return Observe(Rasterize(scene, resolution), pose, sensor);
}

WorldObservation ObserveWorld(const SceneRaster& raster, const Pose& pose,
                              const SensorSpec& sensor)
{
    RayWindow win = CastRays(raster, pose, sensor, true);
    return { std::move(win.mSeen), std::move(win.mOccVisible),
             std::move(win.mClassVisible) };
}

} // namespace imagimap
