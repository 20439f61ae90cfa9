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

#include "rivo/repro.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "rivo/log.hpp"
#include "rivo/report.hpp"
#include "rivo/strings.hpp"

namespace rivo {
namespace {

using nlohmann::json;

struct Job {
    const char* label;
    StrategyKind strategy;
    Regime regime;
};

constexpr Job kJobs[] = {
    {"input-up", StrategyKind::input_upsampling, Regime::superrivolution},
    {"output-up", StrategyKind::output_upsampling, Regime::superrivolution},
    {"sr", StrategyKind::super_resolution, Regime::superrivolution},
    {"lr-baseline", StrategyKind::input_upsampling, Regime::lr_baseline},
    {"hr-oracle", StrategyKind::input_upsampling, Regime::hr_oracle},
};

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json opt_list(const std::vector<std::optional<double>>& v) {
    json arr = json::array();
    for (const auto& x : v) arr.push_back(opt_json(x));
    return arr;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json repro_summary_to_json(const ReproSummary& summary) {
    const GenerateConfig& g = summary.config.generate;
    json cfg{{"seeds", summary.config.seeds},
             {"scenes", g.scenes},
             {"hr_size", g.hr_size},
             {"hr_pixel_size", g.hr_pixel_size},
             {"factor", g.factor},
             {"frames", g.frames},
             {"channels", g.channels},
             {"cloud_probability", g.cloud_probability},
             {"noise_std", g.noise_std},
             {"transects_per_scene", g.transects_per_scene},
             {"train_fraction", g.train_fraction},
             {"val_fraction", g.val_fraction},
             {"epochs", summary.config.epochs},
             {"learning_rates", summary.config.learning_rates},
             {"batch_size", summary.config.batch_size},
             {"base_channels", summary.config.base_channels},
             {"m", summary.config.m},
             {"threshold", summary.config.threshold}};

    json methods = json::object();
    for (const MethodStats& m : summary.methods) {
        methods[m.method] = json{{"f1_temporal", m.f1_temporal},
                                 {"f1_temporal_mean", mean_of(m.f1_temporal)},
                                 {"f1_temporal_std", sample_std(m.f1_temporal)},
                                 {"f1_single", m.f1_single},
                                 {"f1_single_mean", mean_of(m.f1_single)},
                                 {"f1_single_std", sample_std(m.f1_single)},
                                 {"width_mae_temporal", opt_list(m.width_mae_temporal)},
                                 {"width_mae_temporal_mean", opt_json(mean_of(m.width_mae_temporal))},
                                 {"width_mae_single", opt_list(m.width_mae_single)},
                                 {"width_mae_single_mean", opt_json(mean_of(m.width_mae_single))},
                                 {"delta_f1_cloudy", opt_list(m.delta_f1_cloudy)},
                                 {"delta_f1_cloudy_mean", opt_json(mean_of(m.delta_f1_cloudy))},
                                 {"delta_f1_clear", opt_list(m.delta_f1_clear)},
                                 {"delta_f1_clear_mean", opt_json(mean_of(m.delta_f1_clear))},
                                 {"best_val_f1", m.best_val_f1},
                                 {"best_epoch", m.best_epoch}};
    }

    // Ordering block: HR oracle, best temporal strategy, LR baseline.
    const MethodStats* hr = summary.find("hr-oracle");
    const MethodStats* lr = summary.find("lr-baseline");
    const MethodStats* best_temporal = nullptr;
    for (const char* name : {"input-up", "output-up", "sr"}) {
        const MethodStats* m = summary.find(name);
        if (m && (!best_temporal || mean_of(m->f1_temporal) > mean_of(best_temporal->f1_temporal)))
            best_temporal = m;
    }
    json ordering = json::object();
    if (hr) ordering["hr_oracle_f1"] = mean_of(hr->f1_temporal);
    if (best_temporal) {
        ordering["best_temporal_method"] = best_temporal->method;
        ordering["best_temporal_f1"] = mean_of(best_temporal->f1_temporal);
    }
    if (lr) ordering["lr_baseline_f1"] = mean_of(lr->f1_temporal);

    return json{{"format", "rivolution-repro-v1"},
                {"config", std::move(cfg)},
                {"methods", std::move(methods)},
                {"ordering", std::move(ordering)}};
}

ReproSummary run_repro(const ReproConfig& config) {
    if (config.seeds.empty()) throw ContractError("repro: need at least one seed");
    std::filesystem::create_directories(config.out_dir);

    ReproSummary summary;
    summary.config = config;
    for (const Job& job : kJobs) summary.methods.push_back(MethodStats{job.label, {}, {}, {}, {}, {}, {}, {}, {}});

    std::ostringstream timings;
    const auto run_start = std::chrono::steady_clock::now();

    for (std::size_t si = 0; si < config.seeds.size(); ++si) {
        const std::uint64_t seed = config.seeds[si];
        const auto seed_dir = config.out_dir / ("seed_" + std::to_string(seed));
        const auto data_dir = seed_dir / "data";

        GenerateConfig gen = config.generate;
        gen.seed = seed;
        auto t0 = std::chrono::steady_clock::now();
        log_info("repro: seed " + std::to_string(seed) + ": generating " +
                 std::to_string(gen.scenes) + " scenes");
        const DatasetManifest manifest = generate_dataset(gen, data_dir);
        timings << "seed " << seed << " generate: " << elapsed_s(t0) << " s\n";

        std::vector<EvalReport> seed_reports;
        for (std::size_t ji = 0; ji < std::size(kJobs); ++ji) {
            const Job& job = kJobs[ji];
            TrainConfig tc;
            tc.epochs = config.epochs;
            tc.learning_rates = config.learning_rates;
            tc.batch_size = config.batch_size;
            tc.m = config.m;
            tc.strategy = job.strategy;
            tc.regime = job.regime;
            tc.base_channels = config.base_channels;
            tc.threshold = config.threshold;
            tc.seed = seed;
            tc.log_path = seed_dir / (std::string("train_") + job.label + ".jsonl");

            t0 = std::chrono::steady_clock::now();
            log_info(std::string("repro: seed ") + std::to_string(seed) + ": training " +
                     job.label);
            const Checkpoint ckpt = train(tc, manifest);
            timings << "seed " << seed << " train " << job.label << ": " << elapsed_s(t0)
                    << " s\n";
            save_checkpoint(seed_dir / (std::string("ckpt_") + job.label + ".json"), ckpt);

            t0 = std::chrono::steady_clock::now();
            EvalReport report = evaluate_checkpoint(ckpt, manifest, "test");
            timings << "seed " << seed << " eval " << job.label << ": " << elapsed_s(t0)
                    << " s\n";
            emit_report(report, seed_dir / (std::string("eval_") + job.label));

            MethodStats& stats = summary.methods[ji];
            stats.f1_temporal.push_back(report.aggregate_temporal.f1);
            stats.f1_single.push_back(report.aggregate_single.f1);
            stats.width_mae_temporal.push_back(report.width_temporal.mean_abs_err_m);
            stats.width_mae_single.push_back(report.width_single.mean_abs_err_m);
            stats.delta_f1_cloudy.push_back(report.cloud.delta_cloudy);
            stats.delta_f1_clear.push_back(report.cloud.delta_clear);
            stats.best_val_f1.push_back(ckpt.best_val_f1);
            stats.best_epoch.push_back(ckpt.epoch);
            seed_reports.push_back(std::move(report));
        }
        compare_reports(seed_reports, seed_dir / "comparison");
    }

    const json summary_json = repro_summary_to_json(summary);
    {
        std::ofstream out(config.out_dir / "summary.json");
        if (!out) throw IoError("cannot write repro summary");
        out << summary_json.dump(1) << "\n";
    }

    std::ostringstream table;
    table << "method,f1_temporal_mean,f1_temporal_std,f1_single_mean,width_mae_temporal_mean,"
             "width_mae_single_mean,delta_f1_cloudy_mean,delta_f1_clear_mean\n";
    for (const MethodStats& m : summary.methods) {
        const auto wt = mean_of(m.width_mae_temporal);
        const auto ws = mean_of(m.width_mae_single);
        const auto dc = mean_of(m.delta_f1_cloudy);
        const auto dl = mean_of(m.delta_f1_clear);
        table << m.method << ',' << fmt_g(mean_of(m.f1_temporal)) << ','
              << fmt_g(sample_std(m.f1_temporal)) << ',' << fmt_g(mean_of(m.f1_single)) << ','
              << (wt ? fmt_g(*wt) : "") << ',' << (ws ? fmt_g(*ws) : "") << ','
              << (dc ? fmt_g(*dc) : "") << ',' << (dl ? fmt_g(*dl) : "") << '\n';
    }
    {
        std::ofstream out(config.out_dir / "methods.csv");
        if (!out) throw IoError("cannot write methods.csv");
        out << table.str();
    }

    timings << "total: " << elapsed_s(run_start) << " s\n";
    {
        std::ofstream out(config.out_dir / "timings.txt");
        if (!out) throw IoError("cannot write timings.txt");
        out << timings.str();
    }
    return summary;
}

}  // namespace rivo
