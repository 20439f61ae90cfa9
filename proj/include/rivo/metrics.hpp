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

// Segmentation and width-error metrics. Water is the positive class.
// Aggregate F1 across scenes is micro-averaged: confusion counts are
// pooled first, then precision/recall/F1 are computed once.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "rivo/errors.hpp"
#include "rivo/raster.hpp"
#include "rivo/riverwidth.hpp"

namespace rivo {

struct SegMetrics {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    std::int64_t total() const { return tp + fp + fn + tn; }
};

inline SegMetrics seg_metrics_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                                          std::int64_t tn) {
    SegMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
}

inline SegMetrics seg_metrics(const BinaryMask& pred, const BinaryMask& truth) {
    if (!(pred.grid == truth.grid))
        throw ShapeError("seg_metrics: grids differ: " + pred.grid.describe() + " vs " +
                         truth.grid.describe());
    const auto p = pred.values == std::uint8_t{1};
    const auto t = truth.values == std::uint8_t{1};
    const std::int64_t tp = (p && t).count();
    const std::int64_t fp = (p && !t).count();
    const std::int64_t fn = (!p && t).count();
    const std::int64_t tn = (!p && !t).count();
    return seg_metrics_from_counts(tp, fp, fn, tn);
}

// Pools confusion counts (micro-average building block).
inline SegMetrics operator+(const SegMetrics& a, const SegMetrics& b) {
    return seg_metrics_from_counts(a.tp + b.tp, a.fp + b.fp, a.fn + b.fn, a.tn + b.tn);
}

struct WidthMetrics {
    std::size_t n = 0;  // measurements used
    std::optional<double> bias_m;
    std::optional<double> pct_bias;
    std::optional<double> mean_abs_err_m;
    std::optional<double> median_abs_err_m;
    std::size_t zero_truth_excluded = 0;  // dropped from pct_bias only
    std::size_t invalid_excluded = 0;     // invalid or truth-less, dropped entirely
};

// bias = mean(pred - truth); pct_bias = mean((pred - truth)/truth) * 100
// over positive truths; mean and median of |pred - truth|. The median of
// an even-length list is the mean of the two central values. Invalid or
// truth-less measurements are excluded; an empty usable set leaves every
// statistic absent.
inline WidthMetrics width_metrics(const std::vector<WidthMeasurement>& measurements) {
    WidthMetrics out;
    std::vector<double> abs_errs;
    double bias_sum = 0.0, pct_sum = 0.0;
    std::size_t pct_n = 0;
    for (const WidthMeasurement& m : measurements) {
        if (!m.valid || !m.truth_width_m) {
            ++out.invalid_excluded;
            continue;
        }
        const double err = m.predicted_width_m - *m.truth_width_m;
        bias_sum += err;
        abs_errs.push_back(std::abs(err));
        if (*m.truth_width_m > 0.0) {
            pct_sum += err / *m.truth_width_m;
            ++pct_n;
        } else {
            ++out.zero_truth_excluded;
        }
    }
    out.n = abs_errs.size();
    if (out.n == 0) return out;
    out.bias_m = bias_sum / static_cast<double>(out.n);
    out.mean_abs_err_m =
        std::accumulate(abs_errs.begin(), abs_errs.end(), 0.0) / static_cast<double>(out.n);
    std::sort(abs_errs.begin(), abs_errs.end());
    const std::size_t mid = out.n / 2;
    out.median_abs_err_m =
        out.n % 2 == 1 ? abs_errs[mid] : 0.5 * (abs_errs[mid - 1] + abs_errs[mid]);
    if (pct_n > 0) out.pct_bias = pct_sum / static_cast<double>(pct_n) * 100.0;
    return out;
}

struct CloudSceneDelta {
    double f1_single = 0.0;
    double f1_temporal = 0.0;
    double cloud_fraction = 0.0;
};

struct CloudDeltaF1 {
    std::optional<double> delta_cloudy;  // mean(temporal - single), cloud_fraction >= threshold
    std::optional<double> delta_clear;
    std::size_t n_cloudy = 0;
    std::size_t n_clear = 0;
    double threshold = 0.10;
};

// Scenes split at cloud_fraction >= threshold; an empty stratum leaves
// its delta absent.
inline CloudDeltaF1 cloud_delta_f1(const std::vector<CloudSceneDelta>& scenes,
                                   double threshold = 0.10) {
    CloudDeltaF1 out;
    out.threshold = threshold;
    double sum_cloudy = 0.0, sum_clear = 0.0;
    for (const CloudSceneDelta& s : scenes) {
        const double d = s.f1_temporal - s.f1_single;
        if (s.cloud_fraction >= threshold) {
            sum_cloudy += d;
            ++out.n_cloudy;
        } else {
            sum_clear += d;
            ++out.n_clear;
        }
    }
    if (out.n_cloudy > 0) out.delta_cloudy = sum_cloudy / static_cast<double>(out.n_cloudy);
    if (out.n_clear > 0) out.delta_clear = sum_clear / static_cast<double>(out.n_clear);
    return out;
}

}  // namespace rivo
