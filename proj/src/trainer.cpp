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

#include "rivo/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "rivo/log.hpp"
#include "rivo/nn/adam.hpp"
#include "rivo/rng.hpp"
#include "rivo/workers.hpp"

namespace rivo {
namespace {

using nn::Fmap;

nn::Vec<float> label_column(const BinaryMask& mask) {
    const Eigen::Index n = static_cast<Eigen::Index>(mask.grid.pixel_count());
    return Eigen::Map<const Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>>(mask.values.data(), n)
        .cast<float>()
        .matrix();
}

// Prepared sample plus the upsampling operator it routes logits through
// (shared between samples on the same grid pair).
struct Sample {
    SceneBatch<float> batch;
    std::shared_ptr<const UpOperator<float>> up;
};

class UpCache {
  public:
    std::shared_ptr<const UpOperator<float>> get(const GeoGrid& lr, const GeoGrid& hr) {
        const std::string key = lr.describe() + "|" + hr.describe();
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        auto op = std::make_shared<UpOperator<float>>(UpOperator<float>::make(lr, hr));
        cache_.emplace(key, op);
        return op;
    }

  private:
    std::map<std::string, std::shared_ptr<const UpOperator<float>>> cache_;
};

void set_target(SceneBatch<float>& batch, const BinaryMask& label) {
    batch.target = label_column(label);
    batch.target_h = label.grid.height;
    batch.target_w = label.grid.width;
}

// Turns one loaded scene into training or validation samples for the
// configured regime. The LR baseline trains on every frame against the
// majority-vote LR label but validates like output upsampling against
// the HR label, matching how it is evaluated.
std::vector<Sample> prepare_scene(const LoadedScene& scene, const MultibandImage* hr_image,
                                  const TrainConfig& cfg, bool for_eval, UpCache& ups) {
    const SceneSeries& series = scene.series;
    const GeoGrid& hr = series.hr_label.grid;
    std::vector<Sample> out;

    switch (cfg.regime) {
        case Regime::superrivolution: {
            Sample s;
            switch (cfg.strategy) {
                case StrategyKind::input_upsampling:
                    for (const Frame& f : series.frames)
                        s.batch.inputs.push_back(nn::to_fmap<float>(bilinear_upsample(f.image, hr)));
                    break;
                case StrategyKind::output_upsampling:
                    for (const Frame& f : series.frames)
                        s.batch.inputs.push_back(nn::to_fmap<float>(f.image));
                    s.batch.upsample_outputs = true;
                    s.up = ups.get(series.lr_grid(), hr);
                    break;
                case StrategyKind::super_resolution:
                    s.batch.inputs.push_back(nn::to_fmap<float>(naive_mfsr(series.frames, hr)));
                    break;
            }
            set_target(s.batch, series.hr_label);
            out.push_back(std::move(s));
            break;
        }
        case Regime::lr_baseline: {
            if (for_eval) {
                Sample s;
                for (const Frame& f : series.frames)
                    s.batch.inputs.push_back(nn::to_fmap<float>(f.image));
                s.batch.upsample_outputs = true;
                s.up = ups.get(series.lr_grid(), hr);
                set_target(s.batch, series.hr_label);
                out.push_back(std::move(s));
            } else {
                const BinaryMask lr_label = make_lr_label(series.hr_label, series.lr_grid());
                for (const Frame& f : series.frames) {
                    Sample s;
                    s.batch.inputs.push_back(nn::to_fmap<float>(f.image));
                    set_target(s.batch, lr_label);
                    out.push_back(std::move(s));
                }
            }
            break;
        }
        case Regime::hr_oracle: {
            if (!hr_image)
                throw IngestError("hr-oracle regime: scene '" + series.scene_id +
                                  "' has no HR image");
            Sample s;
            s.batch.inputs.push_back(nn::to_fmap<float>(*hr_image));
            set_target(s.batch, series.hr_label);
            out.push_back(std::move(s));
            break;
        }
    }
    return out;
}

std::vector<Sample> prepare_split(const DatasetManifest& manifest, const std::string& split,
                                  const TrainConfig& cfg, bool for_eval, UpCache& ups) {
    std::vector<Sample> samples;
    for (const SceneEntry& e : manifest.split(split)) {
        const auto dir = manifest.scene_dir(e);
        const LoadedScene scene = load_scene(dir, e.scene_id, cfg.m, e.anchor);
        std::optional<MultibandImage> hr_image;
        if (cfg.regime == Regime::hr_oracle) hr_image = load_scene_hr_image(dir);
        auto batch = prepare_scene(scene, hr_image ? &*hr_image : nullptr, cfg, for_eval, ups);
        for (auto& s : batch) samples.push_back(std::move(s));
    }
    return samples;
}

double validation_f1(SegModel<float>& model, std::vector<Sample>& samples, double threshold) {
    std::int64_t counts[4] = {0, 0, 0, 0};
    for (auto& s : samples) temporal_counts<float>(model, s.batch, s.up.get(), threshold, counts);
    return seg_metrics_from_counts(counts[0], counts[1], counts[2], counts[3]).f1;
}

void shuffle_indices(std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
}

void write_log_line(std::ofstream& log, const nlohmann::json& j) {
    if (!log.is_open()) return;
    log << j.dump() << "\n";
    if (!log) throw IoError("failed to write training log");
}

}  // namespace

double bce_loss(const BinaryMask& y, const PlaneF& probs) {
    if (y.grid.height != probs.rows() || y.grid.width != probs.cols())
        throw ShapeError("bce_loss: label and probability shapes differ");
    constexpr double eps = 1e-7;
    double sum = 0.0;
    for (int r = 0; r < probs.rows(); ++r) {
        for (int c = 0; c < probs.cols(); ++c) {
            const double p =
                std::min(1.0 - eps, std::max(eps, static_cast<double>(probs(r, c))));
            const double t = static_cast<double>(y.values(r, c));
            sum -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
    }
    return sum / static_cast<double>(probs.size());
}

std::string method_label(const TrainConfig& config) {
    return config.regime == Regime::superrivolution ? to_string(config.strategy)
                                                    : to_string(config.regime);
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
    return nlohmann::json{{"epochs", c.epochs},
                          {"learning_rates", c.learning_rates},
                          {"batch_size", c.batch_size},
                          {"m", c.m},
                          {"strategy", to_string(c.strategy)},
                          {"regime", to_string(c.regime)},
                          {"base_channels", c.base_channels},
                          {"threshold", c.threshold},
                          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.learning_rates = j.at("learning_rates").get<std::vector<double>>();
    c.batch_size = j.at("batch_size").get<int>();
    c.m = j.at("m").get<int>();
    c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    c.regime = parse_regime(j.at("regime").get<std::string>());
    c.base_channels = j.at("base_channels").get<int>();
    c.threshold = j.at("threshold").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

Checkpoint train(const TrainConfig& config, const DatasetManifest& manifest) {
    config.validate();
    UpCache ups;
    auto train_samples = prepare_split(manifest, "train", config, false, ups);
    auto val_samples = prepare_split(manifest, "val", config, true, ups);
    if (train_samples.empty()) throw IngestError("train: split 'train' is empty");
    if (val_samples.empty()) throw IngestError("train: split 'val' is empty");
    const int in_channels = train_samples.front().batch.inputs.front().channels();

    std::ofstream log;
    if (!config.log_path.empty()) {
        log.open(config.log_path);
        if (!log) throw IoError("cannot open training log " + config.log_path.string());
    }

    std::optional<SegModel<float>> best;
    double best_f1 = -1.0;
    int best_epoch = 0;
    double best_lr = 0.0;

    // Every candidate starts from the same seeded initialization so the
    // grid compares learning rates, not draws.
    for (std::size_t li = 0; li < config.learning_rates.size(); ++li) {
        const double lr = config.learning_rates[li];
        Rng init_rng(derive_seed(config.seed, 0xA11CE));
        SegModel<float> model(in_channels, config.base_channels, init_rng);
        auto params = model.params();
        nn::Adam<float> adam(static_cast<float>(lr));

        write_log_line(log, {{"lr", lr},
                             {"epoch", 0},
                             {"val_f1", validation_f1(model, val_samples, config.threshold)}});

        bool diverged = false;
        for (int epoch = 1; epoch <= config.epochs && !diverged; ++epoch) {
            std::vector<std::size_t> order(train_samples.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            Rng shuffle_rng(derive_seed(config.seed, 0x0D0E, static_cast<std::uint64_t>(epoch)));
            shuffle_indices(order, shuffle_rng);

            double loss_sum = 0.0;
            std::size_t seen = 0;
            for (std::size_t i = 0; i < order.size();) {
                const std::size_t group =
                    std::min<std::size_t>(config.batch_size, order.size() - i);
                model.zero_grad();
                double group_loss = 0.0;
                for (std::size_t k = 0; k < group; ++k) {
                    Sample& s = train_samples[order[i + k]];
                    group_loss += static_cast<double>(
                        temporal_step<float>(model, s.batch, s.up.get(), true));
                }
                if (!std::isfinite(group_loss)) {
                    diverged = true;
                    break;
                }
                adam.step(params);
                loss_sum += group_loss;
                seen += group;
                i += group;
            }
            if (diverged) {
                write_log_line(log, {{"lr", lr}, {"epoch", epoch}, {"status", "diverged"}});
                log_warn("training diverged at lr " + std::to_string(lr) + ", epoch " +
                         std::to_string(epoch) + "; dropping this candidate");
                break;
            }
            const double val_f1 = validation_f1(model, val_samples, config.threshold);
            write_log_line(log, {{"lr", lr},
                                 {"epoch", epoch},
                                 {"train_loss", loss_sum / static_cast<double>(seen)},
                                 {"val_f1", val_f1}});
            if (val_f1 > best_f1) {
                best = model;
                best_f1 = val_f1;
                best_epoch = epoch;
                best_lr = lr;
            }
        }
    }

    if (!best) throw TrainingError("train: every learning-rate candidate diverged");
    Checkpoint ckpt{std::move(*best), config, best_f1, best_epoch, best_lr, config.seed,
                    in_channels};
    return ckpt;
}

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const DatasetManifest& manifest,
                               const std::string& split) {
    const auto entries = manifest.split(split);
    EvalReport report;
    report.method = method_label(ckpt.config);
    report.split = split;
    report.config = {{"checkpoint", train_config_to_json(ckpt.config)},
                     {"split", split},
                     {"best_val_f1", ckpt.best_val_f1},
                     {"best_epoch", ckpt.epoch},
                     {"learning_rate", ckpt.learning_rate}};
    report.scenes.resize(entries.size());
    if (entries.empty()) {
        log_warn("evaluate: split '" + split + "' is empty");
        report.recompute();
        return report;
    }

    NaiveMeanSr sr_op;
    parallel_for(entries.size(), [&](std::size_t i) {
        const SceneEntry& e = entries[i];
        const auto dir = manifest.scene_dir(e);
        const LoadedScene scene = load_scene(dir, e.scene_id, ckpt.config.m, e.anchor);
        const SceneSeries& series = scene.series;
        const GeoGrid& hr = series.hr_label.grid;

        SceneEval se;
        se.scene_id = e.scene_id;
        se.padded = scene.padded;

        FusionStrategy strategy{ckpt.config.strategy, &ckpt.model, &sr_op,
                                ckpt.config.threshold};
        BinaryMask temporal_mask(hr);
        switch (ckpt.config.regime) {
            case Regime::superrivolution:
                temporal_mask =
                    binarize(predict_logits(strategy, series.frames, hr), ckpt.config.threshold);
                break;
            case Regime::lr_baseline:
                temporal_mask = binarize(
                    predict_output_upsampling(ckpt.model, series.frames, hr),
                    ckpt.config.threshold);
                break;
            case Regime::hr_oracle:
                temporal_mask = binarize(forward(ckpt.model, load_scene_hr_image(dir)),
                                         ckpt.config.threshold);
                break;
        }

        // Single-frame arm: one seeded frame through the same checkpoint.
        const std::size_t pick = static_cast<std::size_t>(
            derive_seed(ckpt.config.seed, 0x517E, static_cast<std::uint64_t>(i)) %
            series.frames.size());
        const std::vector<Frame> one{series.frames[pick]};
        BinaryMask single_mask(hr);
        switch (ckpt.config.regime) {
            case Regime::superrivolution:
                single_mask =
                    binarize(predict_logits(strategy, one, hr), ckpt.config.threshold);
                break;
            case Regime::lr_baseline:
                single_mask = binarize(predict_output_upsampling(ckpt.model, one, hr),
                                       ckpt.config.threshold);
                break;
            case Regime::hr_oracle:
                single_mask = temporal_mask;  // no frame axis to ablate
                break;
        }
        se.cloud_fraction = series.frames[pick].meta.cloud_fraction;

        se.temporal = seg_metrics(temporal_mask, series.hr_label);
        se.single = seg_metrics(single_mask, series.hr_label);
        se.widths_temporal = widths_for_scene(temporal_mask, scene.transects);
        se.widths_single = widths_for_scene(single_mask, scene.transects);
        report.scenes[i] = std::move(se);
    });

    report.recompute();
    return report;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    nlohmann::json j;
    j["format"] = "rivolution-checkpoint-v1";
    j["in_channels"] = ckpt.in_channels;
    j["base_channels"] = ckpt.config.base_channels;
    j["best_val_f1"] = ckpt.best_val_f1;
    j["epoch"] = ckpt.epoch;
    j["learning_rate"] = ckpt.learning_rate;
    j["seed"] = ckpt.seed;
    j["config"] = train_config_to_json(ckpt.config);
    nlohmann::json params = nlohmann::json::array();
    SegModel<float> model_copy = ckpt.model;  // params() hands out mutable views
    for (const auto& p : model_copy.params()) {
        nlohmann::json entry;
        entry["name"] = p.name;
        entry["rows"] = static_cast<std::int64_t>(p.value->rows());
        entry["cols"] = static_cast<std::int64_t>(p.value->cols());
        std::vector<float> data(p.value->data(), p.value->data() + p.value->size());
        entry["data"] = data;
        params.push_back(std::move(entry));
    }
    j["params"] = std::move(params);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << j.dump(1) << "\n";
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "rivolution-checkpoint-v1")
            throw IoError("checkpoint " + path.string() + ": unknown format tag");
        const int in_channels = j.at("in_channels").get<int>();
        const TrainConfig config = train_config_from_json(j.at("config"));
        Rng rng(0);
        Checkpoint ckpt{SegModel<float>(in_channels, config.base_channels, rng),
                        config,
                        j.at("best_val_f1").get<double>(),
                        j.at("epoch").get<int>(),
                        j.at("learning_rate").get<double>(),
                        j.at("seed").get<std::uint64_t>(),
                        in_channels};
        auto params = ckpt.model.params();
        const auto& stored = j.at("params");
        if (stored.size() != params.size())
            throw IoError("checkpoint " + path.string() + ": parameter count mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& entry = stored.at(i);
            if (entry.at("name").get<std::string>() != params[i].name ||
                entry.at("rows").get<std::int64_t>() != params[i].value->rows() ||
                entry.at("cols").get<std::int64_t>() != params[i].value->cols())
                throw IoError("checkpoint " + path.string() + ": parameter layout mismatch at " +
                              params[i].name);
            const auto data = entry.at("data").get<std::vector<float>>();
            if (static_cast<Eigen::Index>(data.size()) != params[i].value->size())
                throw IoError("checkpoint " + path.string() + ": parameter size mismatch at " +
                              params[i].name);
            std::copy(data.begin(), data.end(), params[i].value->data());
        }
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace rivo
