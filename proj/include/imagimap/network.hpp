/* network.hpp */

#ifndef IMAGIMAP_NETWORK_HPP
#define IMAGIMAP_NETWORK_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "imagimap/grid_core.hpp"
#include "imagimap/scene_sim.hpp"

namespace imagimap {

/* Dense channel-major (C, H, W) array */
struct Tensor
{
    Tensor() = default;
    Tensor(int channels, int height, int width) :
        mChannels(channels), mHeight(height), mWidth(width),
        mData(static_cast<std::size_t>(channels) * height * width, 0.0) { }

    double* Plane(int c) noexcept
    { return mData.data() + static_cast<std::size_t>(c) * mHeight * mWidth; }
    const double* Plane(int c) const noexcept
    { return mData.data() + static_cast<std::size_t>(c) * mHeight * mWidth; }
    std::size_t PlaneSize() const noexcept
    { return static_cast<std::size_t>(mHeight) * mWidth; }

    int                 mChannels = 0;
    int                 mHeight = 0;
    int                 mWidth = 0;
    std::vector<double> mData;
};

/* Parameter tensor with a fixed 4D shape (out, in, kh, kw) */
struct ParamTensor
{
    std::array<std::uint32_t, 4> mShape { 0, 0, 0, 0 };
    std::vector<double>          mValues;

    std::size_t Size() const noexcept { return mValues.size(); }

    bool operator==(const ParamTensor&) const = default;
};

/* Channel widths of the encoder-decoder */
struct UnitArchitecture
{
    int mConv1 = 8;
    int mConv2 = 16;
    int mConv3 = 16;
    int mConv4 = 8;

    static constexpr int kInputChannels = 3;

    bool operator==(const UnitArchitecture&) const = default;
};

/* Intermediate values kept by Forward for Backward */
struct Activations
{
    Tensor                   mInput;
    Tensor                   mA1;
    Tensor                   mP1;
    std::vector<std::uint8_t> mP1Arg;
    Tensor                   mA2;
    Tensor                   mP2;
    std::vector<std::uint8_t> mP2Arg;
    Tensor                   mA3;
    Tensor                   mU1;
    Tensor                   mA4;
    Tensor                   mCat;
    /* Sigmoid output on the padded grid */
    Tensor                   mProb;
    int                      mHeight = 0;
    int                      mWidth = 0;
};

using Gradients = std::vector<std::vector<double>>;

/*
 * ImaginationUnit predicts, for one object class, the probability that
 * each egocentric cell belongs to an object of that class.
 *
 * Layout: conv3x3(3 -> c1) ReLU, maxpool 2, conv3x3(c1 -> c2) ReLU,
 * maxpool 2, conv3x3 dilated 4 (c2 -> c3) ReLU, upsample 2, conv3x3
 * dilated 2 (c3 -> c4) ReLU, upsample 2, concat with the first conv
 * output, conv3x3(c4 + c1 -> 1), sigmoid. The receptive field is about
 * 52 cells, enough to complete a bed seen from one end. Convolutions zero-pad to keep the size; inputs are zero-padded
 * on the bottom/right to a multiple of 4 and the output is cropped back.
 */
class ImaginationUnit
{
public:
    static constexpr int kNumLayers = 10;
    static constexpr int kBottleneckDilation = 4;
    static constexpr int kDecoderDilation = 2;

    ImaginationUnit() = default;
    /* He-initialized hidden layers, zero output layer */
    ImaginationUnit(int classId, const UnitArchitecture& arch, std::uint64_t seed);

    /* Adopt loaded parameters; throws FormatError on shape mismatch */
    static ImaginationUnit FromParameters(int classId, std::vector<ParamTensor> params);

    int ClassId() const noexcept { return mClassId; }
    const UnitArchitecture& Architecture() const noexcept { return mArch; }

    std::vector<ParamTensor>& Parameters() noexcept { return mParams; }
    const std::vector<ParamTensor>& Parameters() const noexcept { return mParams; }
    std::size_t NumParameters() const noexcept;

    /* Re-draw every layer, including the output layer, from N(0, scale * he) */
    void RandomizeAll(std::uint64_t seed, double scale = 1.0);

    /* Probability grid with values clamped to [1e-7, 1 - 1e-7] */
    GridMap Forward(const ObservationStack& obs) const;

    /* Probabilities (H x W, row-major) for a 3-channel input */
    std::vector<double> Forward(const Tensor& input, Activations* cache = nullptr) const;

    /* Gradient of the loss w.r.t. all parameters, given dL/dlogit per cell */
    Gradients Backward(const Activations& cache, const std::vector<double>& gradLogit) const;

    Gradients ZeroGradients() const;

    bool operator==(const ImaginationUnit&) const = default;

private:
    int                      mClassId = 0;
    UnitArchitecture         mArch;
    std::vector<ParamTensor> mParams;
};

/* Stack seen, visible occupancy and visible class layers as input channels */
Tensor MakeInput(const ObservationStack& obs, int classId);

/* Validate parameter shapes against an architecture */
UnitArchitecture ArchitectureFromShapes(const std::vector<ParamTensor>& params);

} // namespace imagimap

#endif // IMAGIMAP_NETWORK_HPP
