/* loss.cpp */

#include "imagimap/loss.hpp"

#include <algorithm>
#include <cmath>

#include "imagimap/errors.hpp"

namespace imagimap {

WeightResult ComputeWeightAlpha(const GridMap& label, double alphaMax)
{
    const auto values = label.Values();
    const auto occupied = std::count_if(values.begin(), values.end(),
                                        [](float v) { return v > 0.0f; });
    const double total = static_cast<double>(values.size());

    WeightResult result;
    result.mScalar = std::min(total / (static_cast<double>(occupied) + 1.0), alphaMax);
    result.mMap = WeightMap(label.Width(), label.Height());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] > 0.0f)
            result.mMap.mValues[i] = result.mScalar - 1.0;
    return result;
}

WeightResult ComputeWeightGamma(const GridMap& label, const BinaryMask& seenStar,
                                double gammaMax, GammaCountMode mode)
{
    if (!seenStar.SameShape(label))
        throw DimensionError("ComputeWeightGamma: shape mismatch");

    const auto values = label.Values();
    const auto bits = seenStar.Bits();
    std::size_t support = 0;
    std::size_t objectCells = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (bits[i] && values[i] == 0.0f)
            ++support;
        if (values[i] > 0.0f)
            ++objectCells;
    }
    const double count = static_cast<double>(
        mode == GammaCountMode::SeenStarSupport ? support : objectCells);
    const double total = static_cast<double>(values.size());

    WeightResult result;
    result.mScalar = std::min(total / (count + 1.0), gammaMax);
    result.mMap = WeightMap(label.Width(), label.Height());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (bits[i] && values[i] == 0.0f)
            result.mMap.mValues[i] = result.mScalar - 1.0;
    return result;
}

WeightMap CombineWeights(const WeightMap& alpha, const WeightMap& gamma)
{
    if (alpha.mWidth != gamma.mWidth || alpha.mHeight != gamma.mHeight)
        throw DimensionError("CombineWeights: shape mismatch");
    WeightMap out(alpha.mWidth, alpha.mHeight);
    for (std::size_t i = 0; i < out.mValues.size(); ++i)
        out.mValues[i] = alpha.mValues[i] + gamma.mValues[i] + 1.0;
    return out;
}

double WeightedBceWithGrad(std::span<const double> prob, std::span<const double> label,
                           std::span<const double> weights,
                           std::vector<double>* gradLogit)
{
    if (prob.size() != label.size() || prob.size() != weights.size())
        throw DimensionError("WeightedBce: size mismatch");
    if (gradLogit != nullptr)
        gradLogit->assign(prob.size(), 0.0);

    double loss = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double p = std::clamp(prob[i], kBceClamp, 1.0 - kBceClamp);
        const double y = label[i];
        loss -= weights[i] * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
        /* d/dz of the sigmoid cross-entropy; flat where the clamp is active */
        if (gradLogit != nullptr && p == prob[i])
            (*gradLogit)[i] = weights[i] * (prob[i] - y);
    }
    return loss;
}

double WeightedBce(const GridMap& pred, const GridMap& label, const WeightMap& weights)
{
    if (!pred.SameShape(label) || weights.mWidth != pred.Width() ||
        weights.mHeight != pred.Height())
        throw DimensionError("WeightedBce: shape mismatch");

    const auto pv = pred.Values();
    const auto lv = label.Values();
    std::vector<double> p(pv.begin(), pv.end());
    std::vector<double> l(lv.begin(), lv.end());
    return WeightedBceWithGrad(p, l, weights.mValues, nullptr);
}

} // namespace imagimap
