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

// The three temporal fusion strategies over a frame stack:
//   input upsampling   y = (1/m) sum_j f(Up(x_j))
//   output upsampling  y = (1/m) sum_j Up(f(x_j))
//   super resolution   y = f(g(X))          (g owns the temporal fusion)
// Raw logits are averaged (sigmoid applies once, after fusion), and the
// summation always runs in ascending timestamp order so results do not
// depend on scheduling.

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rivo/ingest.hpp"
#include "rivo/resample.hpp"
#include "rivo/seg_model.hpp"

namespace rivo {

enum class StrategyKind { input_upsampling, output_upsampling, super_resolution };

inline std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::input_upsampling: return "input-up";
        case StrategyKind::output_upsampling: return "output-up";
        case StrategyKind::super_resolution: return "sr";
    }
    return "?";
}

inline StrategyKind parse_strategy(const std::string& s) {
    if (s == "input-up" || s == "input_upsampling") return StrategyKind::input_upsampling;
    if (s == "output-up" || s == "output_upsampling") return StrategyKind::output_upsampling;
    if (s == "sr" || s == "super_resolution") return StrategyKind::super_resolution;
    throw ContractError("unknown strategy '" + s + "' (expected input-up, output-up, or sr)");
}

// Pluggable multi-frame super-resolution front end: frame stack on the LR
// grid to one C-channel image on the HR grid.
class SrModel {
  public:
    virtual ~SrModel() = default;
    virtual MultibandImage fuse(const std::vector<Frame>& frames, const GeoGrid& hr_grid) const = 0;
    virtual std::string name() const = 0;
};

// Per-pixel mean of bilinearly upsampled frames, nodata-aware: a pixel is
// averaged over the frames valid there; all-invalid pixels become 0 with
// the nodata flag set. The reference SrModel.
MultibandImage naive_mfsr(const std::vector<Frame>& frames, const GeoGrid& hr_grid);

class NaiveMeanSr final : public SrModel {
  public:
    MultibandImage fuse(const std::vector<Frame>& frames, const GeoGrid& hr_grid) const override {
        return naive_mfsr(frames, hr_grid);
    }
    std::string name() const override { return "naive-mean"; }
};

struct FusionStrategy {
    StrategyKind kind = StrategyKind::input_upsampling;
    const SegModel<float>* model = nullptr;
    const SrModel* sr = nullptr;  // required when kind == super_resolution
    double threshold = 0.5;
};

// Observability hook for dispatch tests.
struct PredictTrace {
    StrategyKind dispatched = StrategyKind::input_upsampling;
    int frames_used = 0;
};

LogitMap predict_input_upsampling(const SegModel<float>& model, const std::vector<Frame>& frames,
                                  const GeoGrid& hr_grid);
LogitMap predict_output_upsampling(const SegModel<float>& model, const std::vector<Frame>& frames,
                                   const GeoGrid& hr_grid);
LogitMap predict_super_resolution(const SegModel<float>& model, const SrModel& sr,
                                  const std::vector<Frame>& frames, const GeoGrid& hr_grid);

LogitMap predict_logits(const FusionStrategy& strategy, const std::vector<Frame>& frames,
                        const GeoGrid& hr_grid, PredictTrace* trace = nullptr);

std::pair<LogitMap, BinaryMask> predict(const FusionStrategy& strategy, const SceneSeries& scene,
                                        PredictTrace* trace = nullptr);

}  // namespace rivo
