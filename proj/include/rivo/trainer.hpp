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

// Training protocol: BCE loss, Adam over a learning-rate grid, per-epoch
// validation F1, and best-checkpoint selection. Three regimes share the
// loop: the temporal strategies against HR labels, the LR baseline
// against majority-downsampled labels, and the HR oracle upper bound.

#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rivo/fusion.hpp"
#include "rivo/ingest.hpp"
#include "rivo/report.hpp"
#include "rivo/resample.hpp"
#include "rivo/seg_model.hpp"

namespace rivo {

enum class Regime { superrivolution, lr_baseline, hr_oracle };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::superrivolution: return "sr";
        case Regime::lr_baseline: return "lr-baseline";
        case Regime::hr_oracle: return "hr-oracle";
    }
    return "?";
}

inline Regime parse_regime(const std::string& s) {
    if (s == "sr" || s == "superrivolution") return Regime::superrivolution;
    if (s == "lr-baseline" || s == "lr_baseline") return Regime::lr_baseline;
    if (s == "hr-oracle" || s == "hr_oracle") return Regime::hr_oracle;
    throw ContractError("unknown regime '" + s + "' (expected sr, lr-baseline, or hr-oracle)");
}

struct TrainConfig {
    int epochs = 50;
    std::vector<double> learning_rates{1e-3, 3e-4, 1e-4};
    int batch_size = 1;  // scenes per optimizer step
    int m = 8;           // frames per scene
    StrategyKind strategy = StrategyKind::input_upsampling;
    Regime regime = Regime::superrivolution;
    int base_channels = 8;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    std::filesystem::path log_path;  // optional JSONL training log

    void validate() const {
        if (epochs < 1) throw ContractError("TrainConfig: epochs must be >= 1");
        if (learning_rates.empty())
            throw ContractError("TrainConfig: need at least one learning-rate candidate");
        if (m < 1 || batch_size < 1 || base_channels < 1)
            throw ContractError("TrainConfig: m, batch_size, base_channels must be >= 1");
    }
};

struct Checkpoint {
    SegModel<float> model;
    TrainConfig config;
    double best_val_f1 = 0.0;
    int epoch = 0;              // 1-based best epoch
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    int in_channels = 0;
};

// Mean binary cross-entropy with probabilities clipped to [eps, 1-eps],
// eps = 1e-7. Accumulated in double.
double bce_loss(const BinaryMask& y, const PlaneF& probs);

// "input-up" / "output-up" / "sr" for the temporal strategies,
// otherwise the regime name.
std::string method_label(const TrainConfig& config);

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

Checkpoint train(const TrainConfig& config, const DatasetManifest& manifest);
EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const DatasetManifest& manifest,
                               const std::string& split);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// --------------------------------------------------------------------
// Differentiable temporal pipeline shared by the trainer (float) and the
// finite-difference gradient checks (double).

// Bilinear upsampling as two dense per-axis operators so the backward
// pass is just the transpose.
template <typename S>
struct UpOperator {
    nn::Mat<S> rows;  // HR_h x LR_h
    nn::Mat<S> cols;  // HR_w x LR_w
    GeoGrid lr, hr;

    static UpOperator make(const GeoGrid& lr_grid, const GeoGrid& hr_grid) {
        return {interp_matrix<S>(lr_grid, hr_grid, false), interp_matrix<S>(lr_grid, hr_grid, true),
                lr_grid, hr_grid};
    }

    nn::Fmap<S> up(const nn::Fmap<S>& x) const {
        using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        if (x.channels() != 1) throw ShapeError("UpOperator: expected single channel");
        Eigen::Map<const RowMat> plane(x.m.data(), x.h, x.w);
        const nn::Mat<S> hr_plane = rows * plane * cols.transpose();
        nn::Fmap<S> y(hr.height, hr.width, 1);
        Eigen::Map<RowMat>(y.m.data(), hr.height, hr.width) = hr_plane;
        return y;
    }

    nn::Fmap<S> adjoint(const nn::Fmap<S>& dy) const {
        using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        if (dy.channels() != 1) throw ShapeError("UpOperator: expected single channel");
        Eigen::Map<const RowMat> plane(dy.m.data(), dy.h, dy.w);
        const nn::Mat<S> lr_plane = rows.transpose() * plane * cols;
        nn::Fmap<S> y(lr.height, lr.width, 1);
        Eigen::Map<RowMat>(y.m.data(), lr.height, lr.width) = lr_plane;
        return y;
    }
};

// One preprocessed training sample. For input upsampling the inputs are
// the m upsampled frames; for output upsampling the m LR frames (the
// UpOperator maps logits up); for super resolution and the baselines a
// single image. The target is the label as a 0/1 column.
template <typename S>
struct SceneBatch {
    std::vector<nn::Fmap<S>> inputs;
    nn::Vec<S> target;
    int target_h = 0, target_w = 0;
    bool upsample_outputs = false;  // route logits through the UpOperator
};

// Mean BCE on logits via the stable form max(l, 0) - l*y + log1p(e^-|l|),
// which is finite for every finite logit and propagates inf/NaN logits
// into the loss (the trainer's divergence signal). dlogits gets
// (sigmoid - y)/N, zeroed where the probability saturates past
// [eps, 1-eps].
template <typename S>
S bce_with_logits(const nn::Vec<S>& logits, const nn::Vec<S>& target, nn::Vec<S>* dlogits) {
    if (logits.size() != target.size())
        throw ShapeError("bce_with_logits: logits/target size mismatch");
    constexpr double eps = 1e-7;
    const Eigen::Index n = logits.size();
    if (dlogits) dlogits->resize(n);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = static_cast<double>(logits(i));
        const double y = static_cast<double>(target(i));
        sum += std::max(l, 0.0) - l * y + std::log1p(std::exp(-std::abs(l)));
        if (dlogits) {
            const double p = 1.0 / (1.0 + std::exp(-l));
            (*dlogits)(i) = (p > eps && p < 1.0 - eps)
                                ? static_cast<S>((p - y) / static_cast<double>(n))
                                : S{0};
        }
    }
    return static_cast<S>(sum / static_cast<double>(n));
}

// Forward (and optionally backward) of one scene through the configured
// fusion: fused = (1/m) sum_j [Up] f(x_j), loss = BCE(fused, target).
// Gradients accumulate into the model. This is the exact pipeline the
// gradient checks difference through.
template <typename S>
S temporal_step(SegModel<S>& model, const SceneBatch<S>& batch, const UpOperator<S>* up,
                bool do_backward, nn::Vec<S>* fused_out = nullptr) {
    const std::size_t m = batch.inputs.size();
    if (m == 0) throw ContractError("temporal_step: batch has no inputs");
    if (batch.upsample_outputs && !up)
        throw ContractError("temporal_step: output upsampling requires an UpOperator");

    std::vector<typename SegModel<S>::Trace> traces(do_backward ? m : 0);
    nn::Vec<S> fused = nn::Vec<S>::Zero(batch.target.size());
    for (std::size_t j = 0; j < m; ++j) {
        nn::Fmap<S> logits =
            model.forward_fmap(batch.inputs[j], do_backward ? &traces[j] : nullptr);
        if (batch.upsample_outputs && up != nullptr) logits = up->up(logits);
        if (logits.m.rows() != fused.size())
            throw ShapeError("temporal_step: fused logits do not match the target size");
        fused += logits.m.col(0);
    }
    fused /= static_cast<S>(m);
    if (fused_out) *fused_out = fused;

    nn::Vec<S> dfused;
    const S loss = bce_with_logits<S>(fused, batch.target, do_backward ? &dfused : nullptr);
    if (do_backward) {
        dfused /= static_cast<S>(m);
        // The per-frame gradient is shared: d(mean)/dlogit_j = 1/m.
        nn::Fmap<S> dlog;
        if (batch.upsample_outputs && up != nullptr) {
            nn::Fmap<S> dhr;
            dhr.h = batch.target_h;
            dhr.w = batch.target_w;
            dhr.m = dfused;
            dlog = up->adjoint(dhr);
        } else {
            dlog.h = batch.target_h;
            dlog.w = batch.target_w;
            dlog.m = dfused;
        }
        for (std::size_t j = 0; j < m; ++j) model.backward_fmap(dlog, traces[j]);
    }
    return loss;
}

// Confusion counts of the fused prediction against the target column at
// the given threshold (tp, fp, fn, tn).
template <typename S>
void temporal_counts(SegModel<S>& model, const SceneBatch<S>& batch, const UpOperator<S>* up,
                     double threshold, std::int64_t counts[4]) {
    nn::Vec<S> fused;
    (void)temporal_step<S>(model, batch, up, false, &fused);
    for (Eigen::Index i = 0; i < fused.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-static_cast<double>(fused(i))));
        const bool pred = p >= threshold;
        const bool truth = batch.target(i) != S{0};
        if (pred && truth) ++counts[0];
        else if (pred && !truth) ++counts[1];
        else if (!pred && truth) ++counts[2];
        else ++counts[3];
    }
}

}  // namespace rivo
