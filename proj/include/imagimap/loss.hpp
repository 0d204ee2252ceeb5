/* loss.hpp */

#ifndef IMAGIMAP_LOSS_HPP
#define IMAGIMAP_LOSS_HPP

#include <span>
#include <vector>

#include "imagimap/grid_core.hpp"

namespace imagimap {

/* Real-valued per-cell weights; unlike GridMap, values may exceed 1 */
struct WeightMap
{
    WeightMap() = default;
    WeightMap(int width, int height, double fill = 0.0) :
        mWidth(width), mHeight(height),
        mValues(static_cast<std::size_t>(width) * height, fill) { }

    double At(int x, int y) const
    { return mValues[static_cast<std::size_t>(y) * mWidth + x]; }

    int                 mWidth = 0;
    int                 mHeight = 0;
    std::vector<double> mValues;
};

/* Which count the gamma denominator uses */
enum class GammaCountMode
{
    /* Cells in the gamma support: seen-star AND label == 0 */
    SeenStarSupport,
    /* Object cells, mirroring the alpha denominator */
    ObjectCells,
};

struct WeightResult
{
    WeightMap mMap;
    double    mScalar = 0.0;
};

/* alpha = min(cells / (object cells + 1), max); map = alpha - 1 on label > 0 */
WeightResult ComputeWeightAlpha(const GridMap& label, double alphaMax);

/* gamma = min(cells / (support + 1), max); map = gamma - 1 on seenStar AND label == 0 */
WeightResult ComputeWeightGamma(const GridMap& label, const BinaryMask& seenStar,
                                double gammaMax,
                                GammaCountMode mode = GammaCountMode::SeenStarSupport);

/* alpha map + gamma map + 1 */
WeightMap CombineWeights(const WeightMap& alpha, const WeightMap& gamma);

/* Clamp bounds applied to predictions before taking logs */
constexpr double kBceClamp = 1e-7;

/* Sum over cells of -W (y log p + (1 - y) log(1 - p)) */
double WeightedBce(const GridMap& pred, const GridMap& label, const WeightMap& weights);

/* Same loss on raw arrays; fills dL/dlogit when gradLogit is non-null */
double WeightedBceWithGrad(std::span<const double> prob, std::span<const double> label,
                           std::span<const double> weights,
                           std::vector<double>* gradLogit);

} // namespace imagimap

#endif // IMAGIMAP_LOSS_HPP
