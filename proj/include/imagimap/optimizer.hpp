/* optimizer.hpp */

#ifndef IMAGIMAP_OPTIMIZER_HPP
#define IMAGIMAP_OPTIMIZER_HPP

#include <cstdint>
#include <vector>

#include "imagimap/network.hpp"

namespace imagimap {

struct AdamConfig
{
    double mLearningRate = 0.001;
    double mBeta1 = 0.9;
    double mBeta2 = 0.999;
    double mEpsilon = 1e-8;
};

/* First and second moment estimates, shaped like the parameters */
struct AdamState
{
    Gradients mFirst;
    Gradients mSecond;

    static AdamState ZerosLike(const ImaginationUnit& unit);
    bool operator==(const AdamState&) const = default;
};

/*
 * Bias-corrected Adam update in place. step is the 1-based update count.
 */
void AdamStep(ImaginationUnit& unit, const Gradients& grads, AdamState& state,
              const AdamConfig& cfg, std::uint64_t step);

} // namespace imagimap

#endif // IMAGIMAP_OPTIMIZER_HPP
