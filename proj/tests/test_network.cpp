#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "imagimap/errors.hpp"
#include "imagimap/loss.hpp"
#include "imagimap/network.hpp"
#include "imagimap/optimizer.hpp"
#include "oracles.hpp"

using namespace imagimap;

namespace {

std::size_t ConvParams(int in, int out)
{
    return static_cast<std::size_t>(in) * out * 9 + out;
}

} // namespace

TEST_CASE("parameter count follows the architecture")
{
    const UnitArchitecture arch;
    const ImaginationUnit unit(0, arch, 1);
    const std::size_t expected = ConvParams(3, 8) + ConvParams(8, 16) + ConvParams(16, 16) +
        ConvParams(16, 8) + ConvParams(8 + 8, 1);
    CHECK(unit.NumParameters() == expected);
    CHECK(unit.Parameters().size() == ImaginationUnit::kNumLayers);

    const ImaginationUnit small(1, { 4, 8, 8, 4 }, 1);
    CHECK(small.NumParameters() <= 2000);
}

TEST_CASE("fresh unit predicts one half everywhere and keeps the input size")
{
    const ImaginationUnit unit(2, UnitArchitecture {}, 5);
    Rng rng(1);
    for (const auto [h, w] : { std::pair { 16, 16 }, std::pair { 13, 11 }, std::pair { 65, 65 } }) {
        const auto prob = unit.Forward(gradcheck::RandomInput(rng, h, w));
        REQUIRE(prob.size() == static_cast<std::size_t>(h * w));
        for (const double p : prob)
            CHECK(p == 0.5);
    }
}

TEST_CASE("randomized unit outputs valid probabilities deterministically")
{
    ImaginationUnit unit(0, UnitArchitecture {}, 5);
    unit.RandomizeAll(9);
    Rng rng(2);
    const Tensor in = gradcheck::RandomInput(rng, 21, 19);
    const auto a = unit.Forward(in);
    const auto b = unit.Forward(in);
    CHECK(a == b);
    bool varied = false;
    for (const double p : a) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        varied = varied || std::abs(p - a[0]) > 1e-6;
    }
    CHECK(varied);
}

TEST_CASE("backward matches central finite differences")
{
    Rng rng(77);
    for (const auto [h, w] : { std::pair { 16, 16 }, std::pair { 13, 11 } }) {
        ImaginationUnit unit(0, { 4, 8, 8, 4 }, 3);
        unit.RandomizeAll(11);
        const auto problem = gradcheck::RandomProblem(rng, h, w);
        const auto report = gradcheck::Check(unit, problem, 1e-3);
        MESSAGE("checked " << report.mChecked << " skipped " << report.mSkipped
                << " max rel " << report.mMaxRelError);
        CHECK(report.mChecked + report.mSkipped == unit.NumParameters());
        CHECK(report.mSkipped * 100 < unit.NumParameters());
        CHECK(report.mMaxRelError < 1e-4);
    }
}

TEST_CASE("network input stacks seen, occupancy and the class layer")
{
    ObservationStack obs;
    obs.mSeen = GridMap(5, 5, 0.1, 1.0f);
    obs.mOccVisible = GridMap(5, 5, 0.1);
    obs.mOccVisible.Set(2, 1, 1.0f);
    for (int c = 0; c < 3; ++c)
        obs.mClassVisible.emplace_back(5, 5, 0.1);
    obs.mClassVisible[1].Set(2, 1, 1.0f);
    const Tensor t = MakeInput(obs, 1);
    CHECK(t.mChannels == 3);
    CHECK(t.Plane(0)[0] == 1.0);
    CHECK(t.Plane(1)[7] == 1.0);
    CHECK(t.Plane(2)[7] == 1.0);
    CHECK(MakeInput(obs, 0).Plane(2)[7] == 0.0);
    CHECK_THROWS_AS(MakeInput(obs, 3), ParameterError);
}

TEST_CASE("parameters with the wrong shape are rejected")
{
    const ImaginationUnit unit(0, UnitArchitecture {}, 1);
    auto params = unit.Parameters();
    CHECK(ImaginationUnit::FromParameters(0, params) == unit);
    params[2].mShape[1] = 7;
    CHECK_THROWS_AS(ImaginationUnit::FromParameters(0, params), FormatError);
    params = unit.Parameters();
    params.pop_back();
    CHECK_THROWS_AS(ImaginationUnit::FromParameters(0, params), FormatError);
}

TEST_CASE("Adam matches a scalar reference")
{
    ImaginationUnit unit(0, { 2, 2, 2, 2 }, 4);
    unit.RandomizeAll(4);
    AdamState state = AdamState::ZerosLike(unit);
    const AdamConfig cfg;
    std::vector<oracle::ScalarAdam> ref(unit.NumParameters());
    std::vector<double> expected;
    for (const auto& p : unit.Parameters())
        expected.insert(expected.end(), p.mValues.begin(), p.mValues.end());

    Rng rng(6);
    for (int t = 1; t <= 5; ++t) {
        Gradients g = unit.ZeroGradients();
        std::size_t k = 0;
        for (auto& layer : g) {
            for (auto& v : layer) {
                v = rng.Uniform(-1.0, 1.0);
                expected[k] = ref[k].Step(expected[k], v, cfg.mLearningRate, cfg.mBeta1,
                                          cfg.mBeta2, cfg.mEpsilon, t);
                ++k;
            }
        }
        AdamStep(unit, g, state, cfg, static_cast<std::uint64_t>(t));
    }
    std::size_t k = 0;
    for (const auto& p : unit.Parameters())
        for (const double v : p.mValues)
            CHECK(v == doctest::Approx(expected[k++]).epsilon(1e-12));
    CHECK_THROWS_AS(AdamStep(unit, unit.ZeroGradients(), state, cfg, 0), ParameterError);
}
