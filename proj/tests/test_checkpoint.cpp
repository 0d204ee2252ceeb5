#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

#include "imagimap/checkpoint.hpp"
#include "imagimap/errors.hpp"
#include "imagimap/grid_io.hpp"

using namespace imagimap;

TEST_CASE("checkpoint header layout")
{
    ImaginationUnit unit(2, UnitArchitecture {}, 1);
    unit.RandomizeAll(3);
    const auto bytes = EncodeUnit(unit);
    CHECK(std::memcmp(bytes.data(), "IMUN", 4) == 0);
    std::size_t pos = 4;
    CHECK(le::GetU32(bytes, pos) == kCheckpointVersion);
    CHECK(le::GetU32(bytes, pos) == 2);
    CHECK(le::GetU32(bytes, pos) == ImaginationUnit::kNumLayers);
    std::size_t expected = 16;
    for (const auto& p : unit.Parameters())
        expected += 16 + 4 * p.Size();
    CHECK(bytes.size() == expected);
}

TEST_CASE("checkpoint round trip keeps f32 values")
{
    ImaginationUnit unit(1, UnitArchitecture {}, 1);
    unit.RandomizeAll(5);
    const ImaginationUnit back = DecodeUnit(EncodeUnit(unit));
    CHECK(back.ClassId() == 1);
    CHECK(back.Architecture() == unit.Architecture());
    for (std::size_t l = 0; l < unit.Parameters().size(); ++l)
        for (std::size_t i = 0; i < unit.Parameters()[l].Size(); ++i)
            CHECK(back.Parameters()[l].mValues[i] ==
                  static_cast<double>(static_cast<float>(unit.Parameters()[l].mValues[i])));
    /* A decoded unit encodes to the same bytes */
    CHECK(EncodeUnit(back) == EncodeUnit(unit));

    const auto path = std::filesystem::temp_directory_path() / "imagimap_ckpt_test.imun";
    SaveUnit(path, unit);
    CHECK(LoadUnit(path) == back);
    std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected")
{
    const auto bytes = EncodeUnit(ImaginationUnit(0, UnitArchitecture {}, 1));
    auto bad = bytes;
    bad[1] = 'X';
    CHECK_THROWS_AS(DecodeUnit(bad), FormatError);
    bad = bytes;
    bad[4] = 99;
    CHECK_THROWS_AS(DecodeUnit(bad), FormatError);
    bad = bytes;
    bad.resize(bad.size() - 3);
    CHECK_THROWS_AS(DecodeUnit(bad), FormatError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(DecodeUnit(bad), FormatError);
    CHECK_THROWS_AS(LoadUnit("/nonexistent/unit.imun"), MissingInputError);
}

TEST_CASE("training state round trip is exact")
{
    TrainingState s;
    s.mUnit = ImaginationUnit(0, { 2, 3, 4, 5 }, 2);
    s.mUnit.RandomizeAll(8);
    s.mAdam = AdamState::ZerosLike(s.mUnit);
    s.mAdam.mFirst[3][1] = 0.125;
    s.mAdam.mSecond[9][0] = 1e-300;
    s.mStep = (1ULL << 33) + 5;
    CHECK(DecodeTrainingState(EncodeTrainingState(s)) == s);
    auto bytes = EncodeTrainingState(s);
    bytes[0] = 'X';
    CHECK_THROWS_AS(DecodeTrainingState(bytes), FormatError);
}

TEST_CASE("loss curve csv")
{
    const std::vector<LossRecord> curve { { 1, 2.5, 30.0, 4.0 }, { 2, 2.0, 30.0, 5.0 } };
    const std::string csv = LossCurveCsv(curve);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,loss,w_alpha_mean,w_gamma_mean");
    std::getline(in, line);
    CHECK(line == "1,2.5,30,4");
    int rows = 1;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 2);
}
