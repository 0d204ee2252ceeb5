#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "imagimap/grid_io.hpp"

namespace fs = std::filesystem;
using imagimap::ReadFileBytes;
using imagimap::WriteFileText;

namespace {

int Run(const std::string& args)
{
    const std::string cmd = std::string(IMAGIMAP_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Sandbox
{
    fs::path mRoot;

    Sandbox()
    {
        mRoot = fs::temp_directory_path() / "imagimap_cli_test";
        fs::remove_all(mRoot);
        fs::create_directories(mRoot);
    }
    ~Sandbox() { fs::remove_all(mRoot); }

    /* Tiny world so that every command finishes in about a second */
    std::string Config(const std::string& name, int steps, const std::string& extra = "")
    {
        const fs::path path = mRoot / name;
        WriteFileText(path, R"({
  "seed": 3,
  "scene_dir": ")" + (mRoot / "scenes").string() + R"(",
  "sensor": { "ego_size": 31, "max_range": 1.5, "ray_count": 61 },
  "ground_truth": { "seg_kernel": 5, "delta": 11, "epsilon": 9 },
  "train": { "steps": )" + std::to_string(steps) + R"(, "architecture": [2, 4, 4, 2],
             "batch_size": 4, "replay_capacity": 10, "scenes_per_batch": 2,
             "update_interval": 2, "update_batches": 3, "epsilon": 9 },
  "mapper": { "epsilon": 9 },
  "bench": { "cell_widths": [3.0], "sets_per_scene": 1 },
  "datasets": { "generate": { "seed_base": 3000, "count": 3 },
                "train": { "seed_base": 3000, "count": 2 },
                "eval": { "seed_base": 3002, "count": 1 } },
  "map": { "scene_seed": 3002, "cell_width": 3.0 })" + extra + R"(
})");
        return path.string();
    }
};

} // namespace

TEST_CASE("cli argument and input errors")
{
    Sandbox box;
    CHECK(Run("") == 2);
    CHECK(Run("frobnicate") == 2);
    CHECK(Run("train --bogus") == 2);
    CHECK(Run("train --config /nonexistent/config.json") == 3);
    WriteFileText(box.mRoot / "unknown.json", "{ \"trian\": {} }");
    CHECK(Run("train --config " + (box.mRoot / "unknown.json").string()) == 2);
    WriteFileText(box.mRoot / "broken.json", "{ \"seed\": ");
    CHECK(Run("gen-scenes --config " + (box.mRoot / "broken.json").string()) == 2);
    const std::string cfg = box.Config("c.json", 3);
    CHECK(Run("gen-scenes --config " + cfg + " --jobs 0") == 2);
    /* Training needs scene files */
    CHECK(Run("train --config " + cfg + " --out " + (box.mRoot / "t").string()) == 3);
    CHECK(Run("map --config " + cfg + " --out " + (box.mRoot / "m").string()) == 3);
    CHECK(Run("render --config " + cfg + " --out " + (box.mRoot / "r").string() + " --input " +
              (box.mRoot / "nothing").string()) == 3);
}

TEST_CASE("cli scene generation")
{
    Sandbox box;
    const std::string cfg = box.Config("c.json", 3);
    const fs::path empty = box.mRoot / "empty";
    CHECK(Run("gen-scenes --config " + cfg + " --count 0 --out " + empty.string()) == 0);
    CHECK_FALSE(fs::exists(empty / "scene_3000.json"));
    CHECK(fs::exists(empty / "resolved_config.json"));

    CHECK(Run("gen-scenes --config " + cfg) == 0);
    const fs::path again = box.mRoot / "again";
    CHECK(Run("gen-scenes --config " + cfg + " --out " + again.string()) == 0);
    for (const char* name : { "scene_3000.json", "scene_3001.json", "scene_3002.json" })
        CHECK(ReadFileBytes(box.mRoot / "scenes" / name) == ReadFileBytes(again / name));
    CHECK(Run("gen-scenes --config " + cfg + " --count -1") == 2);
}

TEST_CASE("cli train, resume, map, bench and render")
{
    Sandbox box;
    const std::string full = box.Config("full.json", 6);
    const std::string half = box.Config("half.json", 3);
    REQUIRE(Run("gen-scenes --config " + full) == 0);

    const fs::path a = box.mRoot / "a";
    const fs::path b = box.mRoot / "b";
    REQUIRE(Run("train --config " + full + " --out " + a.string()) == 0);
    REQUIRE(Run("train --config " + half + " --out " + b.string()) == 0);
    /* Resume reads states from checkpoint_dir, which defaults to the output directory */
    CHECK(Run("train --config " + full + " --out " + (box.mRoot / "c").string() + " --resume") == 3);
    REQUIRE(Run("train --config " + full + " --out " + b.string() + " --resume") == 0);
    for (const char* cls : { "chair", "table", "bed" }) {
        const std::string c(cls);
        CHECK(ReadFileBytes(a / ("unit_" + c + ".imun")) == ReadFileBytes(b / ("unit_" + c + ".imun")));
        CHECK(ReadFileBytes(a / ("state_" + c + ".imst")) == ReadFileBytes(b / ("state_" + c + ".imst")));
        CHECK(ReadFileBytes(a / ("loss_" + c + ".csv")) == ReadFileBytes(b / ("loss_" + c + ".csv")));
    }
    CHECK(fs::exists(a / "resolved_config.json"));

    const std::string withCkpt =
        box.Config("use.json", 6, R"(, "checkpoint_dir": ")" + a.string() + "\"");
    const fs::path m = box.mRoot / "m";
    CHECK(Run("map --config " + withCkpt + " --out " + m.string()) == 0);
    for (const char* sub : { "imagination", "seg_gt", "imagination_seen_only", "ground_truth" })
        CHECK(fs::exists(m / sub / "manifest.json"));

    const fs::path r = box.mRoot / "r";
    CHECK(Run("render --config " + withCkpt + " --out " + r.string() + " --input " +
              (m / "imagination").string() + " " + (m / "seg_gt").string()) == 0);
    CHECK(fs::exists(r / "imagination.ppm"));
    CHECK(fs::exists(r / "seg_gt_bed.pgm"));

    const fs::path q = box.mRoot / "q";
    CHECK(Run("bench --config " + withCkpt + " --out " + q.string()) == 0);
    CHECK(fs::exists(q / "report.csv"));
    CHECK(fs::exists(q / "aggregate.json"));

    /* Evaluation scenes must not overlap the training scenes */
    const std::string leaky = box.Config(
        "leaky.json", 6, R"(, "checkpoint_dir": ")" + a.string() + "\"");
    {
        const auto bytes = ReadFileBytes(leaky);
        std::string text(bytes.begin(), bytes.end());
        const std::string from = R"("eval": { "seed_base": 3002)";
        text.replace(text.find(from), from.size(), R"("eval": { "seed_base": 3001)");
        WriteFileText(leaky, text);
    }
    CHECK(Run("bench --config " + leaky + " --out " + q.string()) == 2);

    /* Corrupt checkpoint */
    WriteFileText(a / "unit_bed.imun", "IMUN garbage");
    CHECK(Run("map --config " + withCkpt + " --out " + m.string()) == 3);
}
