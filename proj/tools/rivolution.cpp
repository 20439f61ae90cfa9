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

// rivolution: river segmentation and width estimation from temporal
// stacks of low-resolution satellite imagery.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 runtime/numeric error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rivo/raster_io.hpp"
#include "rivo/report.hpp"
#include "rivo/repro.hpp"
#include "rivo/synth.hpp"
#include "rivo/trainer.hpp"

namespace {

using namespace rivo;

struct GenerateArgs {
    std::string out;
    GenerateConfig cfg;
};

struct PairArgs {
    std::string label;
    std::vector<std::string> frames;
    std::string anchor;
    std::string out;
    std::string scene_id;
    int window_days = 61;
    int frames_per_scene = 8;
    double lr_pixel_size = 0.0;  // 0 = take the first windowed frame's
    std::string manifest;
    std::string split = "train";
};

struct TrainArgs {
    std::string data;
    std::string out;
    std::string strategy = "input-up";
    std::string regime = "sr";
    std::string log;
    TrainConfig cfg;
};

struct PredictArgs {
    std::string checkpoint;
    std::string scene;
    std::string out;
    std::string scene_id;
};

struct WidthsArgs {
    std::string mask;
    std::string transects;
    std::string out;
    bool geometric = false;
};

struct EvaluateArgs {
    std::string checkpoint;
    std::string data;
    std::string split = "test";
    std::string out;
};

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

struct ReproArgs {
    std::string out;
    ReproConfig cfg;
};

void run_generate(const GenerateArgs& a) {
    const DatasetManifest manifest = generate_dataset(a.cfg, a.out);
    std::cout << "wrote " << manifest.scenes.size() << " scenes to " << a.out << "\n";
    std::cout << "manifest: " << (std::filesystem::path(a.out) / "manifest.json").string()
              << "\n";
}

void run_pair(const PairArgs& a) {
    BuildConfig cfg;
    cfg.half_window_days = a.window_days;
    cfg.frames = a.frames_per_scene;
    if (a.lr_pixel_size > 0.0) cfg.lr_pixel_size = a.lr_pixel_size;
    cfg.scene_id = a.scene_id.empty() ? std::filesystem::path(a.out).filename().string()
                                      : a.scene_id;
    const UtcTime anchor = parse_iso8601(a.anchor);
    std::vector<std::filesystem::path> frame_paths(a.frames.begin(), a.frames.end());
    const SceneSeries series = build_scene(a.label, frame_paths, anchor, cfg);
    save_scene(a.out, series, nullptr, {});
    std::cout << "scene " << series.scene_id << ": " << series.frames.size() << " frames, "
              << series.hr_label.grid.width << "x" << series.hr_label.grid.height
              << " label -> " << a.out << "\n";

    if (!a.manifest.empty()) {
        const std::filesystem::path manifest_path(a.manifest);
        DatasetManifest manifest;
        if (std::filesystem::exists(manifest_path)) {
            manifest = load_manifest(manifest_path);
        } else {
            manifest.window_days = a.window_days;
            manifest.frames_per_scene = a.frames_per_scene;
            manifest.channels = series.channels();
            manifest.root = manifest_path.parent_path();
        }
        SceneEntry entry;
        entry.scene_id = series.scene_id;
        entry.split = a.split;
        entry.dir = std::filesystem::relative(a.out, manifest.root).string();
        entry.anchor = series.anchor_time;
        manifest.scenes.push_back(entry);
        manifest.validate();
        save_manifest(manifest_path, manifest);
        std::cout << "added to manifest " << a.manifest << " (split " << a.split << ")\n";
    }
}

void run_train(const TrainArgs& a) {
    TrainConfig cfg = a.cfg;
    cfg.strategy = parse_strategy(a.strategy);
    cfg.regime = parse_regime(a.regime);
    if (!a.log.empty()) cfg.log_path = a.log;
    const DatasetManifest manifest = load_manifest(a.data);
    const Checkpoint ckpt = train(cfg, manifest);
    save_checkpoint(a.out, ckpt);
    std::cout << "checkpoint " << a.out << ": val f1 " << ckpt.best_val_f1 << " at epoch "
              << ckpt.epoch << " (lr " << ckpt.learning_rate << ")\n";
}

void run_predict(const PredictArgs& a) {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const std::string scene_id =
        a.scene_id.empty() ? std::filesystem::path(a.scene).filename().string() : a.scene_id;
    const LoadedScene scene = load_scene(a.scene, scene_id, ckpt.config.m);
    const GeoGrid& hr = scene.series.hr_label.grid;

    LogitMap logits(hr);
    switch (ckpt.config.regime) {
        case Regime::superrivolution: {
            NaiveMeanSr sr_op;
            FusionStrategy strategy{ckpt.config.strategy, &ckpt.model, &sr_op,
                                    ckpt.config.threshold};
            logits = predict_logits(strategy, scene.series.frames, hr);
            break;
        }
        case Regime::lr_baseline:
            logits = predict_output_upsampling(ckpt.model, scene.series.frames, hr);
            break;
        case Regime::hr_oracle:
            logits = forward(ckpt.model, load_scene_hr_image(a.scene));
            break;
    }
    const BinaryMask mask = binarize(logits, ckpt.config.threshold);

    const std::filesystem::path base(a.out);
    write_raster(base.string() + "_logits", logits);
    write_raster(base.string() + "_mask", mask);
    std::cout << "wrote " << base.string() << "_logits.{bin,meta} and " << base.string()
              << "_mask.{bin,meta} (" << mask.water_count() << " water pixels)\n";
}

void run_widths(const WidthsArgs& a) {
    const BinaryMask mask = read_mask(a.mask);
    const std::vector<Transect> transects = read_transects(a.transects);
    const auto measurements = widths_for_scene(mask, transects, a.geometric);
    write_width_csv(a.out, measurements);
    std::size_t valid = 0;
    for (const auto& m : measurements) valid += m.valid ? 1 : 0;
    std::cout << "wrote " << measurements.size() << " measurements (" << valid << " valid) to "
              << a.out << "\n";
}

void run_evaluate(const EvaluateArgs& a) {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const DatasetManifest manifest = load_manifest(a.data);
    const EvalReport report = evaluate_checkpoint(ckpt, manifest, a.split);
    emit_report(report, a.out);
    std::cout << "method " << report.method << " on split " << a.split << ": f1 temporal "
              << report.aggregate_temporal.f1 << ", f1 single " << report.aggregate_single.f1
              << "\n";
    std::cout << "report: " << (std::filesystem::path(a.out) / "report.json").string() << "\n";
}

void run_report(const ReportArgs& a) {
    std::vector<EvalReport> reports;
    for (const auto& path : a.inputs) reports.push_back(load_report(path));
    std::vector<std::filesystem::path> written;
    if (reports.size() == 1) written = emit_report(reports.front(), a.out);
    else written = compare_reports(reports, a.out);
    std::cout << "wrote " << written.size() << " files to " << a.out << "\n";
}

void run_repro(const ReproArgs& a) {
    ReproConfig cfg = a.cfg;
    cfg.out_dir = a.out;
    const ReproSummary summary = run_repro(cfg);
    std::cout << "summary: " << (cfg.out_dir / "summary.json").string() << "\n";
    for (const MethodStats& m : summary.methods) {
        std::cout << "  " << m.method << ": f1 " << mean_of(m.f1_temporal) << " +/- "
                  << sample_std(m.f1_temporal) << " (single " << mean_of(m.f1_single) << ")\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"river segmentation and width estimation from temporal satellite stacks"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* sub_gen = app.add_subcommand("generate", "generate a seeded synthetic dataset");
    sub_gen->add_option("--out", gen.out, "output dataset directory")->required();
    sub_gen->add_option("--scenes", gen.cfg.scenes, "number of scenes");
    sub_gen->add_option("--hr-size", gen.cfg.hr_size, "HR label size in pixels");
    sub_gen->add_option("--pixel-size", gen.cfg.hr_pixel_size, "HR pixel size in metres");
    sub_gen->add_option("--factor", gen.cfg.factor, "LR downsampling factor");
    sub_gen->add_option("--frames", gen.cfg.frames, "frames per scene");
    sub_gen->add_option("--channels", gen.cfg.channels, "spectral channels");
    sub_gen->add_option("--cloud-probability", gen.cfg.cloud_probability,
                        "per-frame cloud probability");
    sub_gen->add_option("--noise-std", gen.cfg.noise_std, "per-frame sensor noise std");
    sub_gen->add_option("--max-shift", gen.cfg.max_subpixel_shift,
                        "max subpixel shift in LR pixels");
    sub_gen->add_option("--transects", gen.cfg.transects_per_scene, "transects per scene");
    sub_gen->add_option("--train-fraction", gen.cfg.train_fraction, "train split fraction");
    sub_gen->add_option("--val-fraction", gen.cfg.val_fraction, "val split fraction");
    sub_gen->add_option("--seed", gen.cfg.seed, "dataset seed");
    sub_gen->callback([&] { run_generate(gen); });

    PairArgs pair;
    auto* sub_pair = app.add_subcommand("pair", "pair an HR label with LR frames into a scene");
    sub_pair->add_option("--label", pair.label, "HR label raster (base path or .tif)")
        ->required();
    sub_pair->add_option("--frame", pair.frames, "LR frame raster (repeatable)")->required();
    sub_pair->add_option("--anchor", pair.anchor, "anchor timestamp (ISO 8601)")->required();
    sub_pair->add_option("--out", pair.out, "output scene directory")->required();
    sub_pair->add_option("--scene-id", pair.scene_id, "scene id (default: out dir name)");
    sub_pair->add_option("--window-days", pair.window_days, "temporal half-window in days");
    sub_pair->add_option("--frames-per-scene", pair.frames_per_scene, "frames to select (m)");
    sub_pair->add_option("--lr-pixel-size", pair.lr_pixel_size,
                         "target LR pixel size (default: first frame's)");
    sub_pair->add_option("--manifest", pair.manifest, "manifest to append the scene to");
    sub_pair->add_option("--split", pair.split, "split for the manifest entry");
    sub_pair->callback([&] { run_pair(pair); });

    TrainArgs tr;
    auto* sub_train = app.add_subcommand("train", "train a segmentation checkpoint");
    sub_train->add_option("--data", tr.data, "dataset manifest.json")->required();
    sub_train->add_option("--out", tr.out, "output checkpoint path")->required();
    sub_train->add_option("--strategy", tr.strategy,
                          "fusion strategy: input-up | output-up | sr");
    sub_train->add_option("--regime", tr.regime,
                          "training regime: sr | lr-baseline | hr-oracle");
    sub_train->add_option("--epochs", tr.cfg.epochs, "training epochs per candidate");
    sub_train->add_option("--lr", tr.cfg.learning_rates, "learning-rate candidate (repeatable)");
    sub_train->add_option("--batch-size", tr.cfg.batch_size, "scenes per optimizer step");
    sub_train->add_option("--m", tr.cfg.m, "frames per scene");
    sub_train->add_option("--base-channels", tr.cfg.base_channels, "UNet base width");
    sub_train->add_option("--threshold", tr.cfg.threshold, "binarization threshold");
    sub_train->add_option("--seed", tr.cfg.seed, "training seed");
    sub_train->add_option("--log", tr.log, "JSONL training log path");
    sub_train->callback([&] { run_train(tr); });

    PredictArgs pr;
    auto* sub_predict = app.add_subcommand("predict", "predict an HR mask for one scene");
    sub_predict->add_option("--checkpoint", pr.checkpoint, "checkpoint path")->required();
    sub_predict->add_option("--scene", pr.scene, "scene directory")->required();
    sub_predict->add_option("--out", pr.out, "output base path (writes _logits and _mask)")
        ->required();
    sub_predict->add_option("--scene-id", pr.scene_id, "scene id (default: dir name)");
    sub_predict->callback([&] { run_predict(pr); });

    WidthsArgs wd;
    auto* sub_widths = app.add_subcommand("widths", "estimate river widths along transects");
    sub_widths->add_option("--mask", wd.mask, "binary mask raster base path")->required();
    sub_widths->add_option("--transects", wd.transects, "transects file")->required();
    sub_widths->add_option("--out", wd.out, "output CSV path")->required();
    sub_widths->add_flag("--geometric", wd.geometric,
                         "use intersected segment length instead of pixel counts");
    sub_widths->callback([&] { run_widths(wd); });

    EvaluateArgs ev;
    auto* sub_eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a split");
    sub_eval->add_option("--checkpoint", ev.checkpoint, "checkpoint path")->required();
    sub_eval->add_option("--data", ev.data, "dataset manifest.json")->required();
    sub_eval->add_option("--split", ev.split, "split name (default test)");
    sub_eval->add_option("--out", ev.out, "output report directory")->required();
    sub_eval->callback([&] { run_evaluate(ev); });

    ReportArgs rp;
    auto* sub_report = app.add_subcommand("report", "render tables and plots from reports");
    sub_report->add_option("--input", rp.inputs, "report.json (repeat to compare runs)")
        ->required();
    sub_report->add_option("--out", rp.out, "output directory")->required();
    sub_report->callback([&] { run_report(rp); });

    ReproArgs rr;
    auto* sub_repro = app.add_subcommand("repro", "run the full seeded benchmark");
    sub_repro->add_option("--out", rr.out, "output directory")->required();
    sub_repro->add_option("--seeds", rr.cfg.seeds, "benchmark seed (repeatable)");
    sub_repro->add_option("--scenes", rr.cfg.generate.scenes, "scenes per seed");
    sub_repro->add_option("--hr-size", rr.cfg.generate.hr_size, "HR label size");
    sub_repro->add_option("--factor", rr.cfg.generate.factor, "LR downsampling factor");
    sub_repro->add_option("--frames", rr.cfg.generate.frames, "frames per scene");
    sub_repro->add_option("--cloud-probability", rr.cfg.generate.cloud_probability,
                          "per-frame cloud probability");
    sub_repro->add_option("--epochs", rr.cfg.epochs, "training epochs");
    sub_repro->add_option("--lr", rr.cfg.learning_rates, "learning-rate candidate (repeatable)");
    sub_repro->add_option("--m", rr.cfg.m, "frames per scene used in training");
    sub_repro->add_option("--base-channels", rr.cfg.base_channels, "UNet base width");
    sub_repro->add_option("--threshold", rr.cfg.threshold, "binarization threshold");
    sub_repro->callback([&] {
        rr.cfg.generate.frames = std::max(rr.cfg.generate.frames, rr.cfg.m);
        run_repro(rr);
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const AlignmentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
