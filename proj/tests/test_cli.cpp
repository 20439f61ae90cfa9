/*
   Copyright 2026 The rivolution Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "rivo/ingest.hpp"
#include "rivo/raster_io.hpp"
#include "rivo/report.hpp"
#include "rivo/trainer.hpp"
#include "rivo/workers.hpp"

using namespace rivo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Runs the installed binary with stdout+stderr captured and returns the
// process exit code.
int run_cli(const std::string& args, std::string* output = nullptr,
            const std::string& env_prefix = "") {
    static int counter = 0;
    const fs::path cap =
        fs::temp_directory_path() / ("rivo_cli_capture_" + std::to_string(counter++) + ".txt");
    const std::string cmd = env_prefix + "\"" + RIVOLUTION_CLI_PATH + "\" " + args + " > \"" +
                            cap.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) *output = slurp(cap);
    fs::remove(cap);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("help succeeds and usage errors exit 1") {
    std::string out;
    CHECK(run_cli("--help", &out) == 0);
    CHECK(out.find("generate") != std::string::npos);
    CHECK(out.find("repro") != std::string::npos);
    CHECK(run_cli("generate --help") == 0);
    CHECK(run_cli("train --help") == 0);

    CHECK(run_cli("") == 1);                      // a subcommand is required
    CHECK(run_cli("frobnicate") == 1);            // unknown subcommand
    CHECK(run_cli("generate --bogus x") == 1);    // unknown flag
    CHECK(run_cli("train --data m.json") == 1);   // missing required --out
    CHECK(run_cli("widths --mask a") == 1);       // missing required options
}

TEST_CASE("missing inputs exit 2") {
    TempDir tmp("rivo_cli_missing");
    const std::string none = (tmp.path / "nope").string();
    CHECK(run_cli("train --data " + none + "/manifest.json --out " + none + "/c.json") == 2);
    CHECK(run_cli("predict --checkpoint " + none + ".json --scene " + none + " --out " + none) ==
          2);
    CHECK(run_cli("widths --mask " + none + " --transects " + none + ".txt --out " + none +
                  ".csv") == 2);
    CHECK(run_cli("evaluate --checkpoint " + none + ".json --data " + none +
                  "/manifest.json --out " + none) == 2);
    CHECK(run_cli("report --input " + none + ".json --out " + none) == 2);
}

TEST_CASE("worker count respects the environment cap") {
    setenv("RIVOLUTION_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("RIVOLUTION_WORKERS", "not-a-number", 1);
    CHECK(worker_count() == 1);
    unsetenv("RIVOLUTION_WORKERS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("the subcommands compose into a full pipeline") {
    TempDir tmp("rivo_cli_pipeline");
    const std::string data = (tmp.path / "data").string();
    std::string out;

    // generate
    REQUIRE(run_cli("generate --out " + data +
                        " --scenes 12 --hr-size 32 --factor 4 --frames 4 --channels 3"
                        " --transects 2 --cloud-probability 0.3 --seed 7",
                    &out) == 0);
    CHECK(out.find("wrote 12 scenes") != std::string::npos);
    REQUIRE(fs::exists(fs::path(data) / "manifest.json"));
    const DatasetManifest manifest = load_manifest(fs::path(data) / "manifest.json");
    REQUIRE(manifest.split("test").size() == 2);
    const fs::path scene_dir = manifest.scene_dir(manifest.split("test").front());

    // train
    const std::string ckpt = (tmp.path / "ckpt.json").string();
    REQUIRE(run_cli("train --data " + data + "/manifest.json --out " + ckpt +
                        " --strategy input-up --epochs 1 --lr 1e-3 --m 2 --base-channels 2"
                        " --seed 3 --log " + (tmp.path / "train.jsonl").string(),
                    &out) == 0);
    CHECK(out.find("checkpoint") != std::string::npos);
    CHECK(fs::exists(tmp.path / "train.jsonl"));
    CHECK(load_checkpoint(ckpt).in_channels == 3);

    // a bad strategy value is a contract violation, not a usage error
    CHECK(run_cli("train --data " + data + "/manifest.json --out " + ckpt +
                  " --strategy sideways --epochs 1") == 3);

    // evaluate, then again under RIVOLUTION_WORKERS=1: same bytes
    const std::string eval_dir = (tmp.path / "eval").string();
    REQUIRE(run_cli("evaluate --checkpoint " + ckpt + " --data " + data +
                        "/manifest.json --split test --out " + eval_dir,
                    &out) == 0);
    CHECK(out.find("f1 temporal") != std::string::npos);
    const EvalReport report = load_report(fs::path(eval_dir) / "report.json");
    CHECK(report.scenes.size() == 2);
    CHECK(report.method == "input-up");

    const std::string eval_one = (tmp.path / "eval_one_worker").string();
    REQUIRE(run_cli("evaluate --checkpoint " + ckpt + " --data " + data +
                        "/manifest.json --split test --out " + eval_one,
                    nullptr, "RIVOLUTION_WORKERS=1 ") == 0);
    CHECK(slurp(fs::path(eval_dir) / "report.json") ==
          slurp(fs::path(eval_one) / "report.json"));

    // predict on one held-out scene
    const std::string pred = (tmp.path / "pred").string();
    REQUIRE(run_cli("predict --checkpoint " + ckpt + " --scene " + scene_dir.string() +
                        " --out " + pred,
                    &out) == 0);
    CHECK(out.find("water pixels") != std::string::npos);
    const BinaryMask mask = read_mask(pred + "_mask");
    CHECK(mask.grid.width == 32);
    CHECK(mask.grid.height == 32);
    CHECK(fs::exists(pred + "_logits.bin"));

    // widths from the predicted mask along the scene transects
    const std::string width_csv = (tmp.path / "widths.csv").string();
    REQUIRE(run_cli("widths --mask " + pred + "_mask --transects " +
                        (scene_dir / "transects.txt").string() + " --out " + width_csv,
                    &out) == 0);
    CHECK(out.find("2 measurements") != std::string::npos);
    std::istringstream rows(slurp(width_csv));
    std::string line;
    int lines = 0;
    while (std::getline(rows, line)) ++lines;
    CHECK(lines == 3);  // header + 2 transects
    CHECK(run_cli("widths --mask " + pred + "_mask --transects " +
                  (scene_dir / "transects.txt").string() + " --out " + width_csv +
                  " --geometric") == 0);

    // report: single run re-render, then a two-run comparison
    REQUIRE(run_cli("report --input " + eval_dir + "/report.json --out " +
                    (tmp.path / "render").string()) == 0);
    CHECK(fs::exists(tmp.path / "render" / "summary.txt"));
    REQUIRE(run_cli("report --input " + eval_dir + "/report.json --input " + eval_one +
                    "/report.json --out " + (tmp.path / "cmp").string()) == 0);
    CHECK(fs::exists(tmp.path / "cmp" / "comparison.csv"));

    // pair: rebuild a scene from its own label and frames
    const std::string paired = (tmp.path / "paired").string();
    REQUIRE(run_cli("pair --label " + (scene_dir / "hr_label").string() + " --frame " +
                        (scene_dir / "frame_000").string() + " --frame " +
                        (scene_dir / "frame_001").string() +
                        " --anchor 2022-06-15T00:00:00Z --out " + paired +
                        " --frames-per-scene 2 --manifest " +
                        (tmp.path / "paired_manifest.json").string(),
                    &out) == 0);
    CHECK(out.find("2 frames") != std::string::npos);
    CHECK(fs::exists(fs::path(paired) / "hr_label.bin"));
    CHECK(load_manifest(tmp.path / "paired_manifest.json").scenes.size() == 1);

    // appending the same scene id again violates manifest uniqueness
    CHECK(run_cli("pair --label " + (scene_dir / "hr_label").string() + " --frame " +
                  (scene_dir / "frame_000").string() +
                  " --anchor 2022-06-15T00:00:00Z --out " + paired +
                  " --frames-per-scene 1 --manifest " +
                  (tmp.path / "paired_manifest.json").string()) == 2);
}
