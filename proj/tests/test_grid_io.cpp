#include <doctest.h>

#include <filesystem>

#include "imagimap/errors.hpp"
#include "imagimap/grid_io.hpp"
#include "oracles.hpp"

using namespace imagimap;

TEST_CASE("grid container round trip is lossless")
{
    Rng rng(2);
    const GridMap g = oracle::RandomGrid(rng, 13, 7, 0.1);
    const auto bytes = EncodeImgm(g);
    CHECK(bytes.size() == 16 + 13 * 7 * 4);
    const GridMap back = DecodeImgm(bytes);
    CHECK(back.Width() == 13);
    CHECK(back.Height() == 7);
    CHECK(back.Resolution() == doctest::Approx(0.1));
    for (std::size_t i = 0; i < g.NumCells(); ++i)
        CHECK(back.Values()[i] == g.Values()[i]);
}

TEST_CASE("grid container rejects malformed data")
{
    GridMap g(2, 2, 0.1);
    auto bytes = EncodeImgm(g);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(DecodeImgm(bad), FormatError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(DecodeImgm(bad), FormatError);
    CHECK_THROWS_AS(ReadImgm("/nonexistent/grid.imgm"), MissingInputError);
}

TEST_CASE("pgm quantizes and reads back")
{
    GridMap g(3, 2, 0.1);
    g.Set(0, 0, 1.0f);
    g.Set(1, 0, 0.5f);
    const std::string pgm = EncodePgm(g);
    CHECK(pgm.rfind("P5\n3 2\n255\n", 0) == 0);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 6]) == 255);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 5]) == 128);
    CHECK(static_cast<unsigned char>(pgm[pgm.size() - 1]) == 0);

    const auto path = std::filesystem::temp_directory_path() / "imagimap_io_test.pgm";
    WritePgm(path, g);
    const GridMap back = ReadPgm(path, 0.1);
    CHECK(back.At(0, 0) == 1.0f);
    CHECK(back.At(1, 0) == doctest::Approx(128.0 / 255.0));
    CHECK(back.At(2, 1) == 0.0f);
    std::filesystem::remove(path);
}

TEST_CASE("all-zero layer renders black")
{
    const std::string pgm = EncodePgm(GridMap(4, 4, 0.1));
    for (std::size_t i = pgm.size() - 16; i < pgm.size(); ++i)
        CHECK(pgm[i] == '\0');
}
