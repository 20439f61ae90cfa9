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

#include "rivo/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rivo/errors.hpp"
#include "rivo/strings.hpp"

namespace rivo {
namespace {

using nlohmann::json;

json seg_to_json(const SegMetrics& m) {
    return json{{"tp", m.tp},       {"fp", m.fp},           {"fn", m.fn},  {"tn", m.tn},
                {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

SegMetrics seg_from_json(const json& j) {
    return seg_metrics_from_counts(j.at("tp").get<std::int64_t>(), j.at("fp").get<std::int64_t>(),
                                   j.at("fn").get<std::int64_t>(), j.at("tn").get<std::int64_t>());
}

json opt_to_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<double> opt_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json widths_to_json(const std::vector<WidthMeasurement>& widths) {
    json arr = json::array();
    for (const WidthMeasurement& w : widths) {
        arr.push_back(json{{"transect_id", w.transect_id},
                           {"predicted_width_m", w.predicted_width_m},
                           {"truth_width_m", opt_to_json(w.truth_width_m)},
                           {"water_pixel_count", w.water_pixel_count},
                           {"valid", w.valid}});
    }
    return arr;
}

std::vector<WidthMeasurement> widths_from_json(const json& arr) {
    std::vector<WidthMeasurement> out;
    for (const json& j : arr) {
        WidthMeasurement w;
        w.transect_id = j.at("transect_id").get<std::string>();
        w.predicted_width_m = j.at("predicted_width_m").get<double>();
        w.truth_width_m = opt_from_json(j.at("truth_width_m"));
        w.water_pixel_count = j.at("water_pixel_count").get<long>();
        w.valid = j.at("valid").get<bool>();
        out.push_back(std::move(w));
    }
    return out;
}

json width_metrics_to_json(const WidthMetrics& m) {
    return json{{"n", m.n},
                {"bias_m", opt_to_json(m.bias_m)},
                {"pct_bias", opt_to_json(m.pct_bias)},
                {"mean_abs_err_m", opt_to_json(m.mean_abs_err_m)},
                {"median_abs_err_m", opt_to_json(m.median_abs_err_m)},
                {"zero_truth_excluded", m.zero_truth_excluded},
                {"invalid_excluded", m.invalid_excluded}};
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "n/a"; }

// Minimal deterministic SVG builder; coordinates are printed with two
// decimals so repeated runs emit identical bytes.
class Svg {
  public:
    Svg(int w, int h) : w_(w), h_(h) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
             << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
        rect(0, 0, w, h, "#ffffff");
    }

    static std::string px(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        out_ << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(w)
             << "\" height=\"" << px(h) << "\" fill=\"" << fill << "\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0) {
        out_ << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2)
             << "\" y2=\"" << px(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
             << px(width) << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        out_ << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy) << "\" r=\"" << px(r)
             << "\" fill=\"" << fill << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor = "start",
              int size = 12) {
        out_ << "<text x=\"" << px(x) << "\" y=\"" << px(y) << "\" font-family=\"sans-serif\""
             << " font-size=\"" << size << "\" text-anchor=\"" << anchor << "\">" << s
             << "</text>\n";
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

    int width() const { return w_; }
    int height() const { return h_; }

  private:
    int w_, h_;
    std::ostringstream out_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

// Vertical bar chart with labelled values, shared by the single-run and
// comparison plots.
std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<std::vector<double>>& groups,
                      const std::vector<std::string>& series_names) {
    const int width = std::max<int>(360, 90 + static_cast<int>(labels.size()) * 110);
    Svg svg(width, 300);
    const double left = 50, bottom = 250, top = 40;
    double vmax = 0.0;
    for (const auto& g : groups)
        for (double v : g) vmax = std::max(vmax, std::abs(v));
    if (vmax <= 0.0) vmax = 1.0;
    vmax *= 1.15;
    svg.text(static_cast<double>(width) / 2, 22, title, "middle", 14);
    svg.line(left, bottom, width - 20, bottom, "#222222");
    svg.line(left, bottom, left, top, "#222222");
    const std::vector<std::string> palette{"#2b6cb0", "#c05621", "#2f855a", "#6b46c1"};
    const double slot = (width - 30 - left) / std::max<std::size_t>(1, labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& vals = groups[i];
        const double bw = slot * 0.7 / std::max<std::size_t>(1, vals.size());
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double h = (bottom - top) * std::max(0.0, vals[k]) / vmax;
            const double x = left + slot * i + slot * 0.15 + bw * k;
            svg.rect(x, bottom - h, bw - 2, h, palette[k % palette.size()]);
            svg.text(x + bw / 2 - 1, bottom - h - 4, num(vals[k]), "middle", 10);
        }
        svg.text(left + slot * i + slot / 2, bottom + 16, labels[i], "middle", 11);
    }
    for (std::size_t k = 0; k < series_names.size(); ++k) {
        const double y = top + 14.0 * k;
        svg.rect(width - 130, y - 8, 10, 10, palette[k % palette.size()]);
        svg.text(width - 115, y, series_names[k], "start", 10);
    }
    return svg.finish();
}

std::string scatter_plot(const std::string& title, const std::vector<WidthMeasurement>& widths) {
    Svg svg(360, 360);
    const double left = 50, bottom = 310, top = 40, right = 330;
    svg.text(180, 22, title, "middle", 14);
    svg.line(left, bottom, right, bottom, "#222222");
    svg.line(left, bottom, left, top, "#222222");
    double vmax = 1.0;
    for (const auto& w : widths)
        if (w.valid && w.truth_width_m)
            vmax = std::max({vmax, *w.truth_width_m, w.predicted_width_m});
    vmax *= 1.1;
    auto sx = [&](double v) { return left + (right - left) * v / vmax; };
    auto sy = [&](double v) { return bottom - (bottom - top) * v / vmax; };
    svg.line(sx(0), sy(0), sx(vmax), sy(vmax), "#aaaaaa");
    for (const auto& w : widths)
        if (w.valid && w.truth_width_m)
            svg.circle(sx(*w.truth_width_m), sy(w.predicted_width_m), 3, "#2b6cb0");
    svg.text(180, 340, "truth width (m)", "middle", 11);
    svg.text(14, 180, "predicted (m)", "middle", 11);
    return svg.finish();
}

void append_width_rows(std::ostringstream& csv, const std::string& scene_id,
                       const std::string& arm, const std::vector<WidthMeasurement>& widths) {
    for (const WidthMeasurement& w : widths) {
        csv << scene_id << ',' << w.transect_id << ',' << arm << ',';
        csv << fmt_g(w.predicted_width_m) << ',';
        csv << (w.truth_width_m ? fmt_g(*w.truth_width_m) : "") << ',';
        csv << (w.truth_width_m && w.valid ? fmt_g(std::abs(w.predicted_width_m - *w.truth_width_m))
                                           : "");
        csv << ',' << (w.valid ? 1 : 0) << '\n';
    }
}

}  // namespace

void EvalReport::recompute(double cloud_threshold) {
    SegMetrics temporal_total, single_total;
    std::vector<WidthMeasurement> all_temporal, all_single;
    std::vector<CloudSceneDelta> deltas;
    deltas.reserve(scenes.size());
    for (const SceneEval& s : scenes) {
        temporal_total = temporal_total + s.temporal;
        single_total = single_total + s.single;
        all_temporal.insert(all_temporal.end(), s.widths_temporal.begin(),
                            s.widths_temporal.end());
        all_single.insert(all_single.end(), s.widths_single.begin(), s.widths_single.end());
        deltas.push_back({s.single.f1, s.temporal.f1, s.cloud_fraction});
    }
    aggregate_temporal = temporal_total;
    aggregate_single = single_total;
    width_temporal = width_metrics(all_temporal);
    width_single = width_metrics(all_single);
    cloud = cloud_delta_f1(deltas, cloud_threshold);
}

json to_json(const EvalReport& report) {
    json scenes = json::array();
    for (const SceneEval& s : report.scenes) {
        scenes.push_back(json{{"scene_id", s.scene_id},
                              {"cloud_fraction", s.cloud_fraction},
                              {"padded", s.padded},
                              {"temporal", seg_to_json(s.temporal)},
                              {"single", seg_to_json(s.single)},
                              {"widths_temporal", widths_to_json(s.widths_temporal)},
                              {"widths_single", widths_to_json(s.widths_single)}});
    }
    return json{{"format", "rivolution-report-v1"},
                {"method", report.method},
                {"split", report.split},
                {"config", report.config},
                {"scenes", std::move(scenes)},
                {"aggregate",
                 json{{"temporal", seg_to_json(report.aggregate_temporal)},
                      {"single", seg_to_json(report.aggregate_single)}}},
                {"width_metrics",
                 json{{"temporal", width_metrics_to_json(report.width_temporal)},
                      {"single", width_metrics_to_json(report.width_single)}}},
                {"cloud", json{{"threshold", report.cloud.threshold},
                               {"n_cloudy", report.cloud.n_cloudy},
                               {"n_clear", report.cloud.n_clear},
                               {"delta_f1_cloudy", opt_to_json(report.cloud.delta_cloudy)},
                               {"delta_f1_clear", opt_to_json(report.cloud.delta_clear)}}}};
}

EvalReport report_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "rivolution-report-v1")
            throw IoError("report: unknown format tag");
        EvalReport report;
        report.method = j.at("method").get<std::string>();
        report.split = j.at("split").get<std::string>();
        report.config = j.at("config");
        for (const json& js : j.at("scenes")) {
            SceneEval s;
            s.scene_id = js.at("scene_id").get<std::string>();
            s.cloud_fraction = js.at("cloud_fraction").get<double>();
            s.padded = js.at("padded").get<bool>();
            s.temporal = seg_from_json(js.at("temporal"));
            s.single = seg_from_json(js.at("single"));
            s.widths_temporal = widths_from_json(js.at("widths_temporal"));
            s.widths_single = widths_from_json(js.at("widths_single"));
            report.scenes.push_back(std::move(s));
        }
        report.recompute(j.at("cloud").at("threshold").get<double>());
        return report;
    } catch (const json::exception& e) {
        throw IoError(std::string("report: ") + e.what());
    }
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report " + path.string());
    out << to_json(report).dump(1) << "\n";
    if (!out) throw IoError("failed writing report " + path.string());
}

EvalReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read report " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("report " + path.string() + ": " + e.what());
    }
    return report_from_json(j);
}

std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    const auto report_path = dir / "report.json";
    save_report(report_path, report);
    written.push_back(report_path);

    std::ostringstream scenes_csv;
    scenes_csv << "scene_id,f1_temporal,precision_temporal,recall_temporal,f1_single,"
                  "cloud_fraction,padded\n";
    for (const SceneEval& s : report.scenes) {
        scenes_csv << s.scene_id << ',' << fmt_g(s.temporal.f1) << ',' << fmt_g(s.temporal.precision)
                   << ',' << fmt_g(s.temporal.recall) << ',' << fmt_g(s.single.f1) << ','
                   << fmt_g(s.cloud_fraction) << ',' << (s.padded ? 1 : 0) << '\n';
    }
    write_file(dir / "scenes.csv", scenes_csv.str());
    written.push_back(dir / "scenes.csv");

    std::ostringstream widths_csv;
    widths_csv << "scene_id,transect_id,arm,predicted_width_m,truth_width_m,abs_err_m,valid\n";
    for (const SceneEval& s : report.scenes) {
        append_width_rows(widths_csv, s.scene_id, "temporal", s.widths_temporal);
        append_width_rows(widths_csv, s.scene_id, "single", s.widths_single);
    }
    write_file(dir / "widths.csv", widths_csv.str());
    written.push_back(dir / "widths.csv");

    std::ostringstream summary;
    summary << "method: " << report.method << "\n";
    summary << "split: " << report.split << " (" << report.scenes.size() << " scenes)\n";
    summary << "f1 temporal: " << num(report.aggregate_temporal.f1)
            << "  (precision " << num(report.aggregate_temporal.precision) << ", recall "
            << num(report.aggregate_temporal.recall) << ")\n";
    summary << "f1 single-frame: " << num(report.aggregate_single.f1) << "\n";
    summary << "width mean abs err temporal: " << opt_num(report.width_temporal.mean_abs_err_m)
            << " m (bias " << opt_num(report.width_temporal.bias_m) << " m, n "
            << report.width_temporal.n << ")\n";
    summary << "width mean abs err single: " << opt_num(report.width_single.mean_abs_err_m)
            << " m\n";
    summary << "delta f1 cloudy (cf >= " << num(report.cloud.threshold)
            << "): " << opt_num(report.cloud.delta_cloudy) << " over " << report.cloud.n_cloudy
            << " scenes\n";
    summary << "delta f1 clear: " << opt_num(report.cloud.delta_clear) << " over "
            << report.cloud.n_clear << " scenes\n";
    write_file(dir / "summary.txt", summary.str());
    written.push_back(dir / "summary.txt");

    write_file(dir / "f1_bars.svg",
               bar_chart("F1 on split '" + report.split + "'", {report.method},
                         {{report.aggregate_temporal.f1, report.aggregate_single.f1}},
                         {"temporal", "single"}));
    written.push_back(dir / "f1_bars.svg");

    std::vector<WidthMeasurement> all_widths;
    for (const SceneEval& s : report.scenes)
        all_widths.insert(all_widths.end(), s.widths_temporal.begin(), s.widths_temporal.end());
    write_file(dir / "width_scatter.svg",
               scatter_plot("Predicted vs truth width (temporal)", all_widths));
    written.push_back(dir / "width_scatter.svg");

    std::vector<double> deltas{report.cloud.delta_cloudy.value_or(0.0),
                               report.cloud.delta_clear.value_or(0.0)};
    write_file(dir / "delta_f1.svg", bar_chart("Temporal gain by cloud stratum", {"cloudy", "clear"},
                                               {{deltas[0]}, {deltas[1]}}, {"delta F1"}));
    written.push_back(dir / "delta_f1.svg");

    return written;
}

std::vector<std::filesystem::path> compare_reports(const std::vector<EvalReport>& reports,
                                                   const std::filesystem::path& dir) {
    if (reports.empty()) throw ContractError("compare_reports: no reports given");
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    std::ostringstream csv;
    csv << "method,split,f1_temporal,f1_single,width_mae_temporal,width_mae_single,"
           "delta_f1_cloudy,delta_f1_clear\n";
    std::vector<std::string> labels;
    std::vector<std::vector<double>> groups;
    for (const EvalReport& r : reports) {
        csv << r.method << ',' << r.split << ',' << fmt_g(r.aggregate_temporal.f1) << ','
            << fmt_g(r.aggregate_single.f1) << ','
            << (r.width_temporal.mean_abs_err_m ? fmt_g(*r.width_temporal.mean_abs_err_m) : "")
            << ','
            << (r.width_single.mean_abs_err_m ? fmt_g(*r.width_single.mean_abs_err_m) : "") << ','
            << (r.cloud.delta_cloudy ? fmt_g(*r.cloud.delta_cloudy) : "") << ','
            << (r.cloud.delta_clear ? fmt_g(*r.cloud.delta_clear) : "") << '\n';
        labels.push_back(r.method);
        groups.push_back({r.aggregate_temporal.f1, r.aggregate_single.f1});
    }
    write_file(dir / "comparison.csv", csv.str());
    written.push_back(dir / "comparison.csv");

    write_file(dir / "f1_compare.svg",
               bar_chart("F1 by method", labels, groups, {"temporal", "single"}));
    written.push_back(dir / "f1_compare.svg");

    return written;
}

}  // namespace rivo
