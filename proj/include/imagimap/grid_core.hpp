/* grid_core.hpp */

#ifndef IMAGIMAP_GRID_CORE_HPP
#define IMAGIMAP_GRID_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace imagimap {

class BinaryMask;

/*
 * GridMap is a row-major 2D array of values in [0, 1] at a fixed metric
 * resolution. Cell (x, y) covers the world rectangle
 * [x * res, (x + 1) * res) x [y * res, (y + 1) * res).
 */
class GridMap
{
public:
    GridMap() = default;
    GridMap(int width, int height, double resolution, float fill = 0.0f);

    int Width() const noexcept { return mWidth; }
    int Height() const noexcept { return mHeight; }
    double Resolution() const noexcept { return mResolution; }
    std::size_t NumCells() const noexcept { return mValues.size(); }

    bool InBounds(int x, int y) const noexcept
    { return x >= 0 && y >= 0 && x < mWidth && y < mHeight; }

    float At(int x, int y) const { return mValues[this->Index(x, y)]; }
    /* Throws ParameterError when the value leaves [0, 1] */
    void Set(int x, int y, float value);

    /* Raw row-major access; writers must keep values inside [0, 1] */
    std::span<const float> Values() const noexcept { return mValues; }
    std::span<float> MutableValues() noexcept { return mValues; }

    void Fill(float value);
    bool SameShape(const GridMap& other) const noexcept
    { return mWidth == other.mWidth && mHeight == other.mHeight; }

    /* Cells with value > threshold */
    BinaryMask Threshold(double threshold) const;
    /* Element-wise product */
    GridMap Multiply(const BinaryMask& mask) const;

    /* Verify the value-range invariant over all cells */
    bool ValuesInRange() const noexcept;

    bool operator==(const GridMap& other) const = default;

private:
    std::size_t Index(int x, int y) const noexcept
    { return static_cast<std::size_t>(y) * mWidth + x; }

    int                mWidth = 0;
    int                mHeight = 0;
    double             mResolution = 1.0;
    std::vector<float> mValues;
};

/*
 * BinaryMask is a row-major boolean grid without metric information.
 */
class BinaryMask
{
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int Width() const noexcept { return mWidth; }
    int Height() const noexcept { return mHeight; }
    std::size_t NumCells() const noexcept { return mBits.size(); }

    bool InBounds(int x, int y) const noexcept
    { return x >= 0 && y >= 0 && x < mWidth && y < mHeight; }

    bool Get(int x, int y) const
    { return mBits[static_cast<std::size_t>(y) * mWidth + x] != 0; }
    void Set(int x, int y, bool value)
    { mBits[static_cast<std::size_t>(y) * mWidth + x] = value ? 1 : 0; }

    std::span<const std::uint8_t> Bits() const noexcept { return mBits; }
    std::span<std::uint8_t> MutableBits() noexcept { return mBits; }

    std::size_t Count() const noexcept;
    bool Any() const noexcept { return this->Count() > 0; }

    bool SameShape(const BinaryMask& other) const noexcept
    { return mWidth == other.mWidth && mHeight == other.mHeight; }
    bool SameShape(const GridMap& other) const noexcept
    { return mWidth == other.Width() && mHeight == other.Height(); }

    BinaryMask And(const BinaryMask& other) const;
    BinaryMask Or(const BinaryMask& other) const;
    BinaryMask Not() const;
    bool IsSubsetOf(const BinaryMask& other) const;

    /* 0/1 valued grid at the given resolution */
    GridMap ToGrid(double resolution) const;

    bool operator==(const BinaryMask& other) const = default;

private:
    int                       mWidth = 0;
    int                       mHeight = 0;
    std::vector<std::uint8_t> mBits;
};

/* Wrap an angle into [-pi, pi) */
double NormalizeAngle(double theta) noexcept;

/* Agent pose in the world frame; heading is counter-clockwise from +x */
struct Pose
{
    Pose() = default;
    Pose(double x, double y, double theta) :
        mX(x), mY(y), mTheta(NormalizeAngle(theta)) { }

    double mX = 0.0;
    double mY = 0.0;
    double mTheta = 0.0;
};

/*
 * Maps continuous egocentric cell offsets to world coordinates.
 * The agent sits at the window center, heading points to row 0
 * ("up") and increasing column index points to the agent's right.
 */
class EgoFrame
{
public:
    EgoFrame(const Pose& pose, double resolution, int size);

    /* du, dv are column / row offsets from the window center in cells */
    std::pair<double, double> ToWorld(double du, double dv) const noexcept
    {
        return { mPose.mX + mRes * (du * mSin - dv * mCos),
                 mPose.mY - mRes * (dv * mSin + du * mCos) };
    }

    /* Inverse of ToWorld */
    std::pair<double, double> ToEgo(double wx, double wy) const noexcept
    {
        const double dx = (wx - mPose.mX) / mRes;
        const double dy = (wy - mPose.mY) / mRes;
        return { dx * mSin - dy * mCos, -dx * mCos - dy * mSin };
    }

    int Size() const noexcept { return mSize; }
    int Center() const noexcept { return mSize / 2; }

private:
    Pose   mPose;
    double mRes;
    int    mSize;
    double mCos;
    double mSin;
};

/*
 * MultiLayerMap holds occupancy, seen area and one layer per object class,
 * all sharing the same geometry.
 */
class MultiLayerMap
{
public:
    MultiLayerMap() = default;
    MultiLayerMap(int width, int height, double resolution,
                  const std::vector<int>& classIds);

    int Width() const noexcept { return mOccupancy.Width(); }
    int Height() const noexcept { return mOccupancy.Height(); }
    double Resolution() const noexcept { return mOccupancy.Resolution(); }

    GridMap& Occupancy() noexcept { return mOccupancy; }
    const GridMap& Occupancy() const noexcept { return mOccupancy; }
    GridMap& Seen() noexcept { return mSeen; }
    const GridMap& Seen() const noexcept { return mSeen; }

    bool HasClass(int classId) const noexcept;
    /* Throws ParameterError for unknown class ids */
    GridMap& ClassLayer(int classId);
    const GridMap& ClassLayer(int classId) const;
    std::vector<int> ClassIds() const;

    const std::vector<std::pair<int, GridMap>>& ClassLayers() const noexcept
    { return mClassLayers; }

    bool operator==(const MultiLayerMap& other) const = default;

private:
    GridMap                              mOccupancy;
    GridMap                              mSeen;
    std::vector<std::pair<int, GridMap>> mClassLayers;
};

/* Square (Chebyshev) dilation with an odd kernel */
BinaryMask Dilate(const BinaryMask& mask, int kernelSize);

/* Round a kernel up to the next odd size (30 -> 31) */
int MakeOddKernel(int kernelSize);

/* True where all three inputs exceed the threshold */
BinaryMask Intersect3(const GridMap& a, const GridMap& b, const GridMap& c,
                      double threshold);

struct RegistrationStats
{
    /* Global cells that received a value */
    std::size_t mTouched = 0;
    /* Ego cells whose center fell outside the global map */
    std::size_t mDropped = 0;
};

/*
 * Merge an egocentric grid into the global grid. Each ego cell is sampled
 * at 2x2 sub-cell points, rotated and translated by the pose and assigned
 * to the nearest global cell. A touched global cell g with incoming value
 * v (max over the samples landing in it) becomes max(aggregation * g, v).
 * Only ego cells inside the optional support mask take part.
 */
RegistrationStats RegisterEgo(GridMap& global, const GridMap& ego,
                              const Pose& pose, double aggregation,
                              const BinaryMask* support = nullptr);

/* Extract the size x size egocentric window around the pose */
GridMap CropEgo(const GridMap& global, const Pose& pose, int size);

} // namespace imagimap

#endif // IMAGIMAP_GRID_CORE_HPP
