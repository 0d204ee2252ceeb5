/* optimizer.cpp */

#include "imagimap/optimizer.hpp"

#include <cmath>

#include "imagimap/errors.hpp"

namespace imagimap {

AdamState AdamState::ZerosLike(const ImaginationUnit& unit)
{
    return { unit.ZeroGradients(), unit.ZeroGradients() };
}

void AdamStep(ImaginationUnit& unit, const Gradients& grads, AdamState& state,
              const AdamConfig& cfg, std::uint64_t step)
{
    if (step < 1)
        throw ParameterError("AdamStep: step must be >= 1");
    auto& params = unit.Parameters();
    if (grads.size() != params.size() || state.mFirst.size() != params.size() ||
        state.mSecond.size() != params.size())
        throw DimensionError("AdamStep: gradient / state layout mismatch");

    const double t = static_cast<double>(step);
    const double c1 = 1.0 - std::pow(cfg.mBeta1, t);
    const double c2 = 1.0 - std::pow(cfg.mBeta2, t);

    for (std::size_t l = 0; l < params.size(); ++l) {
        auto& p = params[l].mValues;
        auto& m = state.mFirst[l];
        auto& v = state.mSecond[l];
        const auto& g = grads[l];
        if (g.size() != p.size())
            throw DimensionError("AdamStep: gradient size mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.mBeta1 * m[i] + (1.0 - cfg.mBeta1) * g[i];
            v[i] = cfg.mBeta2 * v[i] + (1.0 - cfg.mBeta2) * g[i] * g[i];
            const double mHat = m[i] / c1;
            const double vHat = v[i] / c2;
            p[i] -= cfg.mLearningRate * mHat / (std::sqrt(vHat) + cfg.mEpsilon);
        }
    }
}

} // namespace imagimap
