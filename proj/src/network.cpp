/* network.cpp */

#include "imagimap/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imagimap/errors.hpp"
#include "imagimap/rng.hpp"

namespace imagimap {

namespace {

constexpr double kProbClamp = 1e-7;

int RoundUp4(int v) noexcept { return (v + 3) / 4 * 4; }

ParamTensor MakeParam(std::uint32_t out, std::uint32_t in,
                      std::uint32_t kh, std::uint32_t kw)
{
    ParamTensor p;
    p.mShape = { out, in, kh, kw };
    p.mValues.assign(static_cast<std::size_t>(out) * in * kh * kw, 0.0);
    return p;
}

double Sigmoid(double z) noexcept
{
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/* out = conv3x3(in) + bias with zero padding; taps spaced `dil` cells apart */
void ConvForward(const Tensor& in, const ParamTensor& w, const ParamTensor& b,
                 Tensor& out, int dil = 1)
{
    const int cin = in.mChannels;
    const int h = in.mHeight;
    const int wd = in.mWidth;
    const int cout = static_cast<int>(w.mShape[0]);
    out = Tensor(cout, h, wd);

    for (int o = 0; o < cout; ++o) {
        double* op = out.Plane(o);
        std::fill(op, op + out.PlaneSize(), b.mValues[o]);
        for (int c = 0; c < cin; ++c) {
            const double* ip = in.Plane(c);
            const double* kern = w.mValues.data() + (static_cast<std::size_t>(o) * cin + c) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = (ky - 1) * dil;
                const int y0 = std::max(0, -dy);
                const int y1 = std::min(h, h - dy);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = (kx - 1) * dil;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(wd, wd - dx);
                    const double wv = kern[ky * 3 + kx];
                    for (int y = y0; y < y1; ++y) {
                        double* orow = op + static_cast<std::ptrdiff_t>(y) * wd;
                        const double* irow = ip + static_cast<std::ptrdiff_t>(y + dy) * wd + dx;
                        for (int x = x0; x < x1; ++x)
                            orow[x] += wv * irow[x];
                    }
                }
            }
        }
    }
}

/* Accumulate weight / bias gradients and, optionally, the input gradient */
void ConvBackward(const Tensor& in, const ParamTensor& w, const Tensor& gout,
                  Tensor* gin, std::vector<double>& gw, std::vector<double>& gb, int dil = 1)
{
    const int cin = in.mChannels;
    const int h = in.mHeight;
    const int wd = in.mWidth;
    const int cout = gout.mChannels;
    if (gin != nullptr)
        *gin = Tensor(cin, h, wd);

    for (int o = 0; o < cout; ++o) {
        const double* gp = gout.Plane(o);
        double sum = 0.0;
        for (std::size_t i = 0; i < gout.PlaneSize(); ++i)
            sum += gp[i];
        gb[o] += sum;

        for (int c = 0; c < cin; ++c) {
            const double* ip = in.Plane(c);
            double* gip = gin != nullptr ? gin->Plane(c) : nullptr;
            const std::size_t kbase = (static_cast<std::size_t>(o) * cin + c) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = (ky - 1) * dil;
                const int y0 = std::max(0, -dy);
                const int y1 = std::min(h, h - dy);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = (kx - 1) * dil;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(wd, wd - dx);
                    const double wv = w.mValues[kbase + ky * 3 + kx];
                    double acc = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* grow = gp + static_cast<std::ptrdiff_t>(y) * wd;
                        const double* irow = ip + static_cast<std::ptrdiff_t>(y + dy) * wd + dx;
                        for (int x = x0; x < x1; ++x)
                            acc += grow[x] * irow[x];
                        if (gip != nullptr) {
                            double* girow = gip + static_cast<std::ptrdiff_t>(y + dy) * wd + dx;
                            for (int x = x0; x < x1; ++x)
                                girow[x] += wv * grow[x];
                        }
                    }
                    gw[kbase + ky * 3 + kx] += acc;
                }
            }
        }
    }
}

void ReluInPlace(Tensor& t) noexcept
{
    for (auto& v : t.mData)
        v = v > 0.0 ? v : 0.0;
}

void ReluBackward(const Tensor& activated, Tensor& grad) noexcept
{
    for (std::size_t i = 0; i < grad.mData.size(); ++i)
        if (!(activated.mData[i] > 0.0))
            grad.mData[i] = 0.0;
}

void MaxPoolForward(const Tensor& in, Tensor& out, std::vector<std::uint8_t>& arg)
{
    const int h = in.mHeight / 2;
    const int w = in.mWidth / 2;
    out = Tensor(in.mChannels, h, w);
    arg.assign(out.mData.size(), 0);
    for (int c = 0; c < in.mChannels; ++c) {
        const double* ip = in.Plane(c);
        double* op = out.Plane(c);
        std::uint8_t* ap = arg.data() + static_cast<std::size_t>(c) * h * w;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double* base = ip + static_cast<std::ptrdiff_t>(2 * y) * in.mWidth + 2 * x;
                const double cand[4] = { base[0], base[1], base[in.mWidth], base[in.mWidth + 1] };
                int best = 0;
                for (int k = 1; k < 4; ++k)
                    if (cand[k] > cand[best])
                        best = k;
                op[y * w + x] = cand[best];
                ap[y * w + x] = static_cast<std::uint8_t>(best);
            }
        }
    }
}

void MaxPoolBackward(const Tensor& gout, const std::vector<std::uint8_t>& arg,
                     int inHeight, int inWidth, Tensor& gin)
{
    gin = Tensor(gout.mChannels, inHeight, inWidth);
    const int h = gout.mHeight;
    const int w = gout.mWidth;
    for (int c = 0; c < gout.mChannels; ++c) {
        const double* gp = gout.Plane(c);
        double* gi = gin.Plane(c);
        const std::uint8_t* ap = arg.data() + static_cast<std::size_t>(c) * h * w;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int k = ap[y * w + x];
                gi[(2 * y + k / 2) * inWidth + 2 * x + k % 2] += gp[y * w + x];
            }
        }
    }
}

void UpsampleForward(const Tensor& in, Tensor& out)
{
    const int w = in.mWidth * 2;
    out = Tensor(in.mChannels, in.mHeight * 2, w);
    for (int c = 0; c < in.mChannels; ++c) {
        const double* ip = in.Plane(c);
        double* op = out.Plane(c);
        for (int y = 0; y < out.mHeight; ++y)
            for (int x = 0; x < w; ++x)
                op[y * w + x] = ip[(y / 2) * in.mWidth + x / 2];
    }
}

void UpsampleBackward(const Tensor& gout, Tensor& gin)
{
    gin = Tensor(gout.mChannels, gout.mHeight / 2, gout.mWidth / 2);
    for (int c = 0; c < gout.mChannels; ++c) {
        const double* gp = gout.Plane(c);
        double* gi = gin.Plane(c);
        for (int y = 0; y < gout.mHeight; ++y)
            for (int x = 0; x < gout.mWidth; ++x)
                gi[(y / 2) * gin.mWidth + x / 2] += gp[y * gout.mWidth + x];
    }
}

void HeInit(ParamTensor& p, Rng& rng, double scale)
{
    const double fanIn = static_cast<double>(p.mShape[1]) * p.mShape[2] * p.mShape[3];
    const double sd = scale * std::sqrt(2.0 / fanIn);
    for (auto& v : p.mValues)
        v = sd * rng.Normal();
}

} // namespace

ImaginationUnit::ImaginationUnit(int classId, const UnitArchitecture& arch,
                                 std::uint64_t seed) :
    mClassId(classId),
    mArch(arch)
{
    if (arch.mConv1 < 1 || arch.mConv2 < 1 || arch.mConv3 < 1 || arch.mConv4 < 1)
        throw ParameterError("ImaginationUnit: channel widths must be positive");

    const auto c0 = static_cast<std::uint32_t>(UnitArchitecture::kInputChannels);
    const auto c1 = static_cast<std::uint32_t>(arch.mConv1);
    const auto c2 = static_cast<std::uint32_t>(arch.mConv2);
    const auto c3 = static_cast<std::uint32_t>(arch.mConv3);
    const auto c4 = static_cast<std::uint32_t>(arch.mConv4);
    mParams = {
        MakeParam(c1, c0, 3, 3), MakeParam(c1, 1, 1, 1),
        MakeParam(c2, c1, 3, 3), MakeParam(c2, 1, 1, 1),
        MakeParam(c3, c2, 3, 3), MakeParam(c3, 1, 1, 1),
        MakeParam(c4, c3, 3, 3), MakeParam(c4, 1, 1, 1),
        MakeParam(1, c4 + c1, 3, 3), MakeParam(1, 1, 1, 1),
    };

    Rng rng(deriveSeed({ seed, static_cast<std::uint64_t>(classId), 0x494e4954ULL }));
    for (int layer = 0; layer < 8; layer += 2)
        HeInit(mParams[layer], rng, 1.0);
}

ImaginationUnit ImaginationUnit::FromParameters(int classId, std::vector<ParamTensor> params)
{
    ImaginationUnit unit;
    unit.mClassId = classId;
    unit.mArch = ArchitectureFromShapes(params);
    unit.mParams = std::move(params);
    return unit;
}

std::size_t ImaginationUnit::NumParameters() const noexcept
{
    std::size_t n = 0;
    for (const auto& p : mParams)
        n += p.Size();
    return n;
}

void ImaginationUnit::RandomizeAll(std::uint64_t seed, double scale)
{
    Rng rng(seed);
    for (std::size_t layer = 0; layer < mParams.size(); ++layer) {
        if (layer % 2 == 0) {
            HeInit(mParams[layer], rng, scale);
        } else {
            for (auto& v : mParams[layer].mValues)
                v = 0.1 * scale * rng.Normal();
        }
    }
}

Gradients ImaginationUnit::ZeroGradients() const
{
    Gradients g;
    g.reserve(mParams.size());
    for (const auto& p : mParams)
        g.emplace_back(p.Size(), 0.0);
    return g;
}

std::vector<double> ImaginationUnit::Forward(const Tensor& input, Activations* cache) const
{
    if (input.mChannels != UnitArchitecture::kInputChannels)
        throw DimensionError("ImaginationUnit::Forward: expected 3 input channels");
    if (input.mHeight < 1 || input.mWidth < 1)
        throw DimensionError("ImaginationUnit::Forward: empty input");

    Activations local;
    Activations& act = cache != nullptr ? *cache : local;
    act.mHeight = input.mHeight;
    act.mWidth = input.mWidth;

    const int hp = RoundUp4(input.mHeight);
    const int wp = RoundUp4(input.mWidth);
    act.mInput = Tensor(input.mChannels, hp, wp);
    for (int c = 0; c < input.mChannels; ++c)
        for (int y = 0; y < input.mHeight; ++y)
            std::copy_n(input.Plane(c) + static_cast<std::size_t>(y) * input.mWidth,
                        input.mWidth, act.mInput.Plane(c) + static_cast<std::size_t>(y) * wp);

    ConvForward(act.mInput, mParams[0], mParams[1], act.mA1);
    ReluInPlace(act.mA1);
    MaxPoolForward(act.mA1, act.mP1, act.mP1Arg);
    ConvForward(act.mP1, mParams[2], mParams[3], act.mA2);
    ReluInPlace(act.mA2);
    MaxPoolForward(act.mA2, act.mP2, act.mP2Arg);
    ConvForward(act.mP2, mParams[4], mParams[5], act.mA3, kBottleneckDilation);
    ReluInPlace(act.mA3);
    UpsampleForward(act.mA3, act.mU1);
    ConvForward(act.mU1, mParams[6], mParams[7], act.mA4, kDecoderDilation);
    ReluInPlace(act.mA4);

    Tensor u2;
    UpsampleForward(act.mA4, u2);
    act.mCat = Tensor(u2.mChannels + act.mA1.mChannels, hp, wp);
    std::copy(u2.mData.begin(), u2.mData.end(), act.mCat.mData.begin());
    std::copy(act.mA1.mData.begin(), act.mA1.mData.end(),
              act.mCat.mData.begin() + static_cast<std::ptrdiff_t>(u2.mData.size()));

    Tensor logits;
    ConvForward(act.mCat, mParams[8], mParams[9], logits);
    act.mProb = Tensor(1, hp, wp);
    for (std::size_t i = 0; i < logits.mData.size(); ++i)
        act.mProb.mData[i] = Sigmoid(logits.mData[i]);

    std::vector<double> out(static_cast<std::size_t>(input.mHeight) * input.mWidth);
    for (int y = 0; y < input.mHeight; ++y)
        std::copy_n(act.mProb.mData.data() + static_cast<std::size_t>(y) * wp,
                    input.mWidth, out.data() + static_cast<std::size_t>(y) * input.mWidth);
    return out;
}

Gradients ImaginationUnit::Backward(const Activations& act,
                                    const std::vector<double>& gradLogit) const
{
    const int h = act.mHeight;
    const int w = act.mWidth;
    if (gradLogit.size() != static_cast<std::size_t>(h) * w)
        throw DimensionError("ImaginationUnit::Backward: gradient size mismatch");

    const int hp = act.mInput.mHeight;
    const int wp = act.mInput.mWidth;
    Gradients grads = this->ZeroGradients();

    Tensor gz(1, hp, wp);
    for (int y = 0; y < h; ++y)
        std::copy_n(gradLogit.data() + static_cast<std::size_t>(y) * w, w,
                    gz.mData.data() + static_cast<std::size_t>(y) * wp);

    Tensor gcat;
    ConvBackward(act.mCat, mParams[8], gz, &gcat, grads[8], grads[9]);

    const int c4 = mArch.mConv4;
    Tensor gu2(c4, hp, wp);
    Tensor ga1(mArch.mConv1, hp, wp);
    std::copy_n(gcat.mData.begin(), gu2.mData.size(), gu2.mData.begin());
    std::copy(gcat.mData.begin() + static_cast<std::ptrdiff_t>(gu2.mData.size()),
              gcat.mData.end(), ga1.mData.begin());

    Tensor ga4;
    UpsampleBackward(gu2, ga4);
    ReluBackward(act.mA4, ga4);
    Tensor gu1;
    ConvBackward(act.mU1, mParams[6], ga4, &gu1, grads[6], grads[7], kDecoderDilation);

    Tensor ga3;
    UpsampleBackward(gu1, ga3);
    ReluBackward(act.mA3, ga3);
    Tensor gp2;
    ConvBackward(act.mP2, mParams[4], ga3, &gp2, grads[4], grads[5], kBottleneckDilation);

    Tensor ga2;
    MaxPoolBackward(gp2, act.mP2Arg, act.mA2.mHeight, act.mA2.mWidth, ga2);
    ReluBackward(act.mA2, ga2);
    Tensor gp1;
    ConvBackward(act.mP1, mParams[2], ga2, &gp1, grads[2], grads[3]);

    Tensor ga1Pool;
    MaxPoolBackward(gp1, act.mP1Arg, act.mA1.mHeight, act.mA1.mWidth, ga1Pool);
    for (std::size_t i = 0; i < ga1.mData.size(); ++i)
        ga1.mData[i] += ga1Pool.mData[i];
    ReluBackward(act.mA1, ga1);
    ConvBackward(act.mInput, mParams[0], ga1, nullptr, grads[0], grads[1]);

    return grads;
}

GridMap ImaginationUnit::Forward(const ObservationStack& obs) const
{
    const Tensor input = MakeInput(obs, mClassId);
    const auto prob = this->Forward(input);
    GridMap out(input.mWidth, input.mHeight, obs.mSeen.Resolution());
    auto values = out.MutableValues();
    for (std::size_t i = 0; i < prob.size(); ++i)
        values[i] = static_cast<float>(std::clamp(prob[i], kProbClamp, 1.0 - kProbClamp));
    return out;
}

Tensor MakeInput(const ObservationStack& obs, int classId)
{
    if (classId < 0 || classId >= static_cast<int>(obs.mClassVisible.size()))
        throw ParameterError("MakeInput: class layer missing");
    const GridMap& cls = obs.mClassVisible[classId];
    if (!obs.mSeen.SameShape(obs.mOccVisible) || !obs.mSeen.SameShape(cls))
        throw DimensionError("MakeInput: observation layers differ in shape");

    Tensor t(3, obs.mSeen.Height(), obs.mSeen.Width());
    const GridMap* layers[3] = { &obs.mSeen, &obs.mOccVisible, &cls };
    for (int c = 0; c < 3; ++c) {
        const auto v = layers[c]->Values();
        std::copy(v.begin(), v.end(), t.Plane(c));
    }
    return t;
}

UnitArchitecture ArchitectureFromShapes(const std::vector<ParamTensor>& params)
{
    if (params.size() != ImaginationUnit::kNumLayers)
        throw FormatError("unit must have " + std::to_string(ImaginationUnit::kNumLayers) +
                          " parameter tensors");
    UnitArchitecture arch;
    arch.mConv1 = static_cast<int>(params[0].mShape[0]);
    arch.mConv2 = static_cast<int>(params[2].mShape[0]);
    arch.mConv3 = static_cast<int>(params[4].mShape[0]);
    arch.mConv4 = static_cast<int>(params[6].mShape[0]);

    const ImaginationUnit reference(0, arch, 0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].mShape != reference.Parameters()[i].mShape)
            throw FormatError("parameter tensor " + std::to_string(i) + " has unexpected shape");
        if (params[i].mValues.size() != reference.Parameters()[i].Size())
            throw FormatError("parameter tensor " + std::to_string(i) + " has wrong length");
    }
    return arch;
}

} // namespace imagimap
