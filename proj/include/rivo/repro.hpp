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

// End-to-end seeded benchmark: generate a synthetic dataset per seed,
// train the three temporal strategies plus the LR baseline and HR
// oracle, evaluate on the test split, and aggregate across seeds. The
// summary holds no wall-clock times so identical seeds reproduce
// identical bytes.

#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rivo/synth.hpp"
#include "rivo/trainer.hpp"

namespace rivo {

struct ReproConfig {
    std::filesystem::path out_dir;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    GenerateConfig generate;  // defaults: 200 scenes, 64x64 HR, factor 4, m=8, clouds 0.3
    int epochs = 8;
    std::vector<double> learning_rates{1e-3};
    int batch_size = 1;
    int base_channels = 8;
    int m = 8;
    double threshold = 0.5;
};

struct MethodStats {
    std::string method;
    std::vector<double> f1_temporal;  // one entry per seed
    std::vector<double> f1_single;
    std::vector<std::optional<double>> width_mae_temporal;
    std::vector<std::optional<double>> width_mae_single;
    std::vector<std::optional<double>> delta_f1_cloudy;
    std::vector<std::optional<double>> delta_f1_clear;
    std::vector<double> best_val_f1;
    std::vector<int> best_epoch;
};

struct ReproSummary {
    ReproConfig config;
    std::vector<MethodStats> methods;  // input-up, output-up, sr, lr-baseline, hr-oracle

    const MethodStats* find(const std::string& method) const {
        for (const auto& m : methods)
            if (m.method == method) return &m;
        return nullptr;
    }
};

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& x : v)
        if (x) {
            s += *x;
            ++n;
        }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
}

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

nlohmann::json repro_summary_to_json(const ReproSummary& summary);

// Runs the full pipeline, writes per-seed artifacts under
// out_dir/seed_<s>/ and the cross-seed summary.json; per-stage wall
// times go to timings.txt only.
ReproSummary run_repro(const ReproConfig& config);

}  // namespace rivo
