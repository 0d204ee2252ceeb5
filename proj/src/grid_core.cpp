/* grid_core.cpp */

#include "imagimap/grid_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "imagimap/errors.hpp"

namespace imagimap {

GridMap::GridMap(int width, int height, double resolution, float fill) :
    mWidth(width),
    mHeight(height),
    mResolution(resolution)
{
    if (width <= 0 || height <= 0)
        throw ParameterError("GridMap: width and height must be positive");
    if (!(resolution > 0.0))
        throw ParameterError("GridMap: resolution must be positive");
    if (!(fill >= 0.0f && fill <= 1.0f))
        throw ParameterError("GridMap: fill value outside [0, 1]");
    mValues.assign(static_cast<std::size_t>(width) * height, fill);
}

void GridMap::Set(int x, int y, float value)
{
    if (!(value >= 0.0f && value <= 1.0f))
        throw ParameterError("GridMap::Set: value outside [0, 1]");
    mValues[this->Index(x, y)] = value;
}

void GridMap::Fill(float value)
{
    if (!(value >= 0.0f && value <= 1.0f))
        throw ParameterError("GridMap::Fill: value outside [0, 1]");
    std::fill(mValues.begin(), mValues.end(), value);
}

BinaryMask GridMap::Threshold(double threshold) const
{
    BinaryMask mask(mWidth, mHeight);
    auto bits = mask.MutableBits();
    for (std::size_t i = 0; i < mValues.size(); ++i)
        bits[i] = mValues[i] > threshold ? 1 : 0;
    return mask;
}

GridMap GridMap::Multiply(const BinaryMask& mask) const
{
    if (!mask.SameShape(*this))
        throw DimensionError("GridMap::Multiply: shape mismatch");
    GridMap out = *this;
    const auto bits = mask.Bits();
    for (std::size_t i = 0; i < out.mValues.size(); ++i)
        if (!bits[i])
            out.mValues[i] = 0.0f;
    return out;
}

bool GridMap::ValuesInRange() const noexcept
{
    return std::all_of(mValues.begin(), mValues.end(),
                       [](float v) { return v >= 0.0f && v <= 1.0f; });
}

BinaryMask::BinaryMask(int width, int height, bool fill) :
    mWidth(width),
    mHeight(height)
{
    if (width <= 0 || height <= 0)
        throw ParameterError("BinaryMask: width and height must be positive");
    mBits.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::Count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(mBits.begin(), mBits.end(),
                      [](std::uint8_t b) { return b != 0; }));
}

BinaryMask BinaryMask::And(const BinaryMask& other) const
{
    if (!this->SameShape(other))
        throw DimensionError("BinaryMask::And: shape mismatch");
    BinaryMask out(mWidth, mHeight);
    for (std::size_t i = 0; i < mBits.size(); ++i)
        out.mBits[i] = (mBits[i] && other.mBits[i]) ? 1 : 0;
    return out;
}

BinaryMask BinaryMask::Or(const BinaryMask& other) const
{
    if (!this->SameShape(other))
        throw DimensionError("BinaryMask::Or: shape mismatch");
    BinaryMask out(mWidth, mHeight);
    for (std::size_t i = 0; i < mBits.size(); ++i)
        out.mBits[i] = (mBits[i] || other.mBits[i]) ? 1 : 0;
    return out;
}

BinaryMask BinaryMask::Not() const
{
    BinaryMask out(mWidth, mHeight);
    for (std::size_t i = 0; i < mBits.size(); ++i)
        out.mBits[i] = mBits[i] ? 0 : 1;
    return out;
}

bool BinaryMask::IsSubsetOf(const BinaryMask& other) const
{
    if (!this->SameShape(other))
        throw DimensionError("BinaryMask::IsSubsetOf: shape mismatch");
    for (std::size_t i = 0; i < mBits.size(); ++i)
        if (mBits[i] && !other.mBits[i])
            return false;
    return true;
}

GridMap BinaryMask::ToGrid(double resolution) const
{
    GridMap grid(mWidth, mHeight, resolution);
    auto values = grid.MutableValues();
    for (std::size_t i = 0; i < mBits.size(); ++i)
        values[i] = mBits[i] ? 1.0f : 0.0f;
    return grid;
}

double NormalizeAngle(double theta) noexcept
{
    constexpr double twoPi = 2.0 * std::numbers::pi;
    double t = std::fmod(theta + std::numbers::pi, twoPi);
    if (t < 0.0)
        t += twoPi;
    t -= std::numbers::pi;
    /* fmod rounding can land exactly on +pi */
    if (t >= std::numbers::pi)
        t -= twoPi;
    return t;
}

EgoFrame::EgoFrame(const Pose& pose, double resolution, int size) :
    mPose(pose),
    mRes(resolution),
    mSize(size),
    mCos(std::cos(pose.mTheta)),
    mSin(std::sin(pose.mTheta))
{
    /* Snap right-angle headings so registration stays exact */
    constexpr double snap = 1e-12;
    if (std::abs(mCos) < snap)
        mCos = 0.0;
    if (std::abs(mSin) < snap)
        mSin = 0.0;
}

MultiLayerMap::MultiLayerMap(int width, int height, double resolution,
                             const std::vector<int>& classIds) :
    mOccupancy(width, height, resolution),
    mSeen(width, height, resolution)
{
    for (const int id : classIds) {
        if (this->HasClass(id))
            throw ParameterError("MultiLayerMap: duplicate class id " +
                                 std::to_string(id));
        mClassLayers.emplace_back(id, GridMap(width, height, resolution));
    }
    std::sort(mClassLayers.begin(), mClassLayers.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

bool MultiLayerMap::HasClass(int classId) const noexcept
{
    return std::any_of(mClassLayers.begin(), mClassLayers.end(),
                       [classId](const auto& l) { return l.first == classId; });
}

GridMap& MultiLayerMap::ClassLayer(int classId)
{
    for (auto& [id, layer] : mClassLayers)
        if (id == classId)
            return layer;
    throw ParameterError("MultiLayerMap: unknown class id " +
                         std::to_string(classId));
}

const GridMap& MultiLayerMap::ClassLayer(int classId) const
{
    for (const auto& [id, layer] : mClassLayers)
        if (id == classId)
            return layer;
    throw ParameterError("MultiLayerMap: unknown class id " +
                         std::to_string(classId));
}

std::vector<int> MultiLayerMap::ClassIds() const
{
    std::vector<int> ids;
    ids.reserve(mClassLayers.size());
    for (const auto& l : mClassLayers)
        ids.push_back(l.first);
    return ids;
}

int MakeOddKernel(int kernelSize)
{
    if (kernelSize < 1)
        throw ParameterError("MakeOddKernel: kernel size must be positive");
    return kernelSize % 2 == 0 ? kernelSize + 1 : kernelSize;
}

namespace {

/* One-dimensional running-window dilation along rows or columns */
void DilateLine(const std::uint8_t* in, std::uint8_t* out, int length,
                std::ptrdiff_t stride, int radius, std::vector<int>& prefix)
{
    prefix[0] = 0;
    for (int i = 0; i < length; ++i)
        prefix[i + 1] = prefix[i] + (in[i * stride] ? 1 : 0);
    for (int i = 0; i < length; ++i) {
        const int lo = std::max(0, i - radius);
        const int hi = std::min(length, i + radius + 1);
        out[i * stride] = prefix[hi] - prefix[lo] > 0 ? 1 : 0;
    }
}

} // namespace

BinaryMask Dilate(const BinaryMask& mask, int kernelSize)
{
    if (kernelSize < 1 || kernelSize % 2 == 0)
        throw ParameterError("Dilate: kernel size must be odd and positive, got " +
                             std::to_string(kernelSize));

    const int w = mask.Width();
    const int h = mask.Height();
    const int radius = (kernelSize - 1) / 2;
    if (radius == 0)
        return mask;

    /* The square window is separable: rows first, then columns */
    BinaryMask rows(w, h);
    BinaryMask out(w, h);
    std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);

    const auto in = mask.Bits();
    auto mid = rows.MutableBits();
    for (int y = 0; y < h; ++y)
        DilateLine(in.data() + static_cast<std::size_t>(y) * w,
                   mid.data() + static_cast<std::size_t>(y) * w,
                   w, 1, radius, prefix);

    auto dst = out.MutableBits();
    for (int x = 0; x < w; ++x)
        DilateLine(mid.data() + x, dst.data() + x, h, w, radius, prefix);

    return out;
}

BinaryMask Intersect3(const GridMap& a, const GridMap& b, const GridMap& c,
                      double threshold)
{
    if (!a.SameShape(b) || !a.SameShape(c))
        throw DimensionError("Intersect3: shape mismatch");

    BinaryMask out(a.Width(), a.Height());
    auto bits = out.MutableBits();
    const auto va = a.Values();
    const auto vb = b.Values();
    const auto vc = c.Values();
    for (std::size_t i = 0; i < bits.size(); ++i)
        bits[i] = (va[i] > threshold && vb[i] > threshold && vc[i] > threshold) ? 1 : 0;
    return out;
}

RegistrationStats RegisterEgo(GridMap& global, const GridMap& ego,
                              const Pose& pose, double aggregation,
                              const BinaryMask* support)
{
    if (ego.Width() != ego.Height() || ego.Width() % 2 == 0)
        throw DimensionError("RegisterEgo: ego map must be square with odd size");
    if (std::abs(ego.Resolution() - global.Resolution()) >
        1e-9 * global.Resolution())
        throw DimensionError("RegisterEgo: resolution mismatch");
    if (support != nullptr && !support->SameShape(ego))
        throw DimensionError("RegisterEgo: support mask shape mismatch");
    if (!(aggregation >= 0.0 && aggregation <= 1.0))
        throw ParameterError("RegisterEgo: aggregation outside [0, 1]");

    const int size = ego.Width();
    const EgoFrame frame(pose, global.Resolution(), size);
    const double res = global.Resolution();
    const int center = frame.Center();
    const int gw = global.Width();
    const int gh = global.Height();

    /* Incoming value per global cell; negative means untouched */
    std::vector<float> incoming(global.NumCells(), -1.0f);
    std::vector<std::size_t> touched;

    RegistrationStats stats;
    constexpr double sub[2] = { -0.25, 0.25 };
    const auto egoValues = ego.Values();

    for (int v = 0; v < size; ++v) {
        for (int u = 0; u < size; ++u) {
            const std::size_t ei = static_cast<std::size_t>(v) * size + u;
            if (support != nullptr && !support->Bits()[ei])
                continue;

            const float value = egoValues[ei];
            const auto [cx, cy] = frame.ToWorld(u - center, v - center);
            const int cgx = static_cast<int>(std::floor(cx / res));
            const int cgy = static_cast<int>(std::floor(cy / res));
            if (!global.InBounds(cgx, cgy))
                ++stats.mDropped;

            for (const double su : sub) {
                for (const double sv : sub) {
                    const auto [wx, wy] = frame.ToWorld(u - center + su,
                                                        v - center + sv);
                    const int gx = static_cast<int>(std::floor(wx / res));
                    const int gy = static_cast<int>(std::floor(wy / res));
                    if (gx < 0 || gy < 0 || gx >= gw || gy >= gh)
                        continue;
                    const std::size_t gi = static_cast<std::size_t>(gy) * gw + gx;
                    if (incoming[gi] < 0.0f)
                        touched.push_back(gi);
                    incoming[gi] = std::max(incoming[gi], value);
                }
            }
        }
    }

    auto values = global.MutableValues();
    const float agg = static_cast<float>(aggregation);
    for (const std::size_t gi : touched)
        values[gi] = std::max(agg * values[gi], incoming[gi]);

    stats.mTouched = touched.size();
    return stats;
}

GridMap CropEgo(const GridMap& global, const Pose& pose, int size)
{
    if (size < 1 || size % 2 == 0)
        throw ParameterError("CropEgo: size must be odd and positive, got " +
                             std::to_string(size));

    const double res = global.Resolution();
    const EgoFrame frame(pose, res, size);
    const int center = frame.Center();

    GridMap ego(size, size, res);
    auto out = ego.MutableValues();
    for (int v = 0; v < size; ++v) {
        for (int u = 0; u < size; ++u) {
            const auto [wx, wy] = frame.ToWorld(u - center, v - center);
            const int gx = static_cast<int>(std::floor(wx / res));
            const int gy = static_cast<int>(std::floor(wy / res));
            if (global.InBounds(gx, gy))
                out[static_cast<std::size_t>(v) * size + u] = global.At(gx, gy);
        }
    }
    return ego;
}

} // namespace imagimap
