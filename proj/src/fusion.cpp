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

#include "rivo/fusion.hpp"

#include <algorithm>

namespace rivo {

namespace {

void require_stack(const std::vector<Frame>& frames) {
    if (frames.empty()) throw ContractError("fusion: empty frame stack");
    const GeoGrid& g = frames.front().image.grid;
    for (const Frame& f : frames)
        if (!(f.image.grid == g))
            throw AlignmentError("fusion: frames on mixed grids (" + f.image.grid.describe() +
                                 " vs " + g.describe() + ")");
}

// Canonical ascending acquisition order. Accumulating in this order makes
// every fusion symmetric in the input order bit for bit; float sums are
// not associative, so iterating the caller's order would leak it into the
// logits.
std::vector<const Frame*> ascending_stack(const std::vector<Frame>& frames) {
    std::vector<const Frame*> order;
    order.reserve(frames.size());
    for (const Frame& f : frames) order.push_back(&f);
    std::stable_sort(order.begin(), order.end(), [](const Frame* a, const Frame* b) {
        if (a->meta.timestamp != b->meta.timestamp) return a->meta.timestamp < b->meta.timestamp;
        return a->meta.source_id < b->meta.source_id;
    });
    return order;
}

}  // namespace

MultibandImage naive_mfsr(const std::vector<Frame>& frames, const GeoGrid& hr_grid) {
    require_stack(frames);
    const int channels = frames.front().image.channels();
    MultibandImage out(hr_grid, channels);
    Plane<int> count = Plane<int>::Zero(hr_grid.height, hr_grid.width);
    for (const Frame* f : ascending_stack(frames)) {
        // Upsampled nodata pixels carry zeros, so the running sums stay
        // untouched where a frame is invalid.
        const MultibandImage up = bilinear_upsample(f->image, hr_grid);
        count += (up.nodata == std::uint8_t{0}).cast<int>();
        for (int b = 0; b < channels; ++b)
            out.bands[static_cast<std::size_t>(b)] += up.bands[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < channels; ++b) {
        auto& band = out.bands[static_cast<std::size_t>(b)];
        band = (count > 0).select(band / count.cast<float>().max(1.0f), 0.0f);
    }
    out.nodata = (count == 0).cast<std::uint8_t>();
    return out;
}

LogitMap predict_input_upsampling(const SegModel<float>& model, const std::vector<Frame>& frames,
                                  const GeoGrid& hr_grid) {
    require_stack(frames);
    LogitMap fused(hr_grid);
    for (const Frame* f : ascending_stack(frames)) {
        const MultibandImage up = bilinear_upsample(f->image, hr_grid);
        fused.values += forward(model, up).values;
    }
    fused.values /= static_cast<float>(frames.size());
    fused.validate();
    return fused;
}

LogitMap predict_output_upsampling(const SegModel<float>& model, const std::vector<Frame>& frames,
                                   const GeoGrid& hr_grid) {
    require_stack(frames);
    LogitMap fused(hr_grid);
    for (const Frame* f : ascending_stack(frames)) {
        const LogitMap lr_logits = forward(model, f->image);
        fused.values += bilinear_upsample(lr_logits, hr_grid).values;
    }
    fused.values /= static_cast<float>(frames.size());
    fused.validate();
    return fused;
}

LogitMap predict_super_resolution(const SegModel<float>& model, const SrModel& sr,
                                  const std::vector<Frame>& frames, const GeoGrid& hr_grid) {
    require_stack(frames);
    const MultibandImage fused = sr.fuse(frames, hr_grid);
    if (!(fused.grid == hr_grid))
        throw ContractError("SR model '" + sr.name() + "' returned grid " +
                            fused.grid.describe() + ", expected " + hr_grid.describe());
    if (fused.channels() != frames.front().image.channels())
        throw ContractError("SR model '" + sr.name() + "' changed the channel count");
    return forward(model, fused);
}

LogitMap predict_logits(const FusionStrategy& strategy, const std::vector<Frame>& frames,
                        const GeoGrid& hr_grid, PredictTrace* trace) {
    if (!strategy.model) throw ContractError("fusion: strategy has no model");
    if (trace) {
        trace->dispatched = strategy.kind;
        trace->frames_used = static_cast<int>(frames.size());
    }
    switch (strategy.kind) {
        case StrategyKind::input_upsampling:
            return predict_input_upsampling(*strategy.model, frames, hr_grid);
        case StrategyKind::output_upsampling:
            return predict_output_upsampling(*strategy.model, frames, hr_grid);
        case StrategyKind::super_resolution:
            if (!strategy.sr)
                throw ContractError("super_resolution strategy requires an SR model");
            return predict_super_resolution(*strategy.model, *strategy.sr, frames, hr_grid);
    }
    throw ContractError("fusion: bad strategy kind");
}

std::pair<LogitMap, BinaryMask> predict(const FusionStrategy& strategy, const SceneSeries& scene,
                                        PredictTrace* trace) {
    LogitMap logits = predict_logits(strategy, scene.frames, scene.hr_label.grid, trace);
    BinaryMask mask = binarize(logits, strategy.threshold);
    return {std::move(logits), std::move(mask)};
}

}  // namespace rivo
