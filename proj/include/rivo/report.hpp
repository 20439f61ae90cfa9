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

// Evaluation reports: per-scene segmentation and width results for the
// temporal and single-frame arms, aggregates, JSON round-trip, and the
// rendered artifacts (CSV tables, summary text, SVG plots).

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rivo/metrics.hpp"
#include "rivo/riverwidth.hpp"

namespace rivo {

struct SceneEval {
    std::string scene_id;
    SegMetrics temporal;
    SegMetrics single;
    double cloud_fraction = 0.0;  // of the frame the single-frame arm saw
    bool padded = false;          // frames were cyclically repeated
    std::vector<WidthMeasurement> widths_temporal;
    std::vector<WidthMeasurement> widths_single;
};

struct EvalReport {
    std::string method;  // "input-up", "output-up", "sr", "lr-baseline", "hr-oracle"
    std::string split;
    nlohmann::json config;  // resolved configuration echo
    std::vector<SceneEval> scenes;

    // Derived from `scenes` by recompute().
    SegMetrics aggregate_temporal;
    SegMetrics aggregate_single;
    WidthMetrics width_temporal;
    WidthMetrics width_single;
    CloudDeltaF1 cloud;

    void recompute(double cloud_threshold = 0.10);
};

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

void save_report(const std::filesystem::path& path, const EvalReport& report);
EvalReport load_report(const std::filesystem::path& path);

// Writes report.json, scenes.csv, widths.csv, summary.txt and the SVG
// plots into `dir` (created if missing). Returns the paths written.
std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::filesystem::path& dir);

// Side-by-side comparison of several runs: comparison.csv, a grouped F1
// bar chart, and a text summary.
std::vector<std::filesystem::path> compare_reports(const std::vector<EvalReport>& reports,
                                                   const std::filesystem::path& dir);

}  // namespace rivo
