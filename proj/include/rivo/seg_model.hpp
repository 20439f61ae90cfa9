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

// The trainable segmentation model: a linear spectral adaptor projecting
// C input bands to 3 channels, followed by the compact U-shaped net with
// a single-logit head. Same-resolution contract: logits share the input
// grid.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rivo/nn/unet.hpp"
#include "rivo/raster.hpp"

namespace rivo {

template <typename S>
struct SegModel {
    int in_channels = 3;
    int base = 8;
    nn::Conv1x1<S> adaptor;  // C -> 3, trainable
    nn::UNet<S> net;         // 3 -> 1

    SegModel() = default;
    SegModel(int in_channels_, int base_, Rng& rng)
        : in_channels(in_channels_),
          base(base_),
          adaptor(in_channels_, 3, rng),
          net(3, base_, rng) {}

    struct Trace {
        nn::Mat<S> adaptor_in;
        nn::UNetTrace<S> net;
    };

    nn::Fmap<S> forward_fmap(const nn::Fmap<S>& x, Trace* trace) const {
        if (x.channels() != in_channels)
            throw ShapeError("SegModel: input has " + std::to_string(x.channels()) +
                             " channels, adaptor expects " + std::to_string(in_channels));
        const nn::Fmap<S> adapted =
            adaptor.forward(x, trace ? &trace->adaptor_in : nullptr);
        return net.forward(adapted, trace ? &trace->net : nullptr);
    }

    void backward_fmap(const nn::Fmap<S>& dlogits, Trace& trace) {
        const nn::Fmap<S> dadapted = net.backward(dlogits, trace.net);
        (void)adaptor.backward(dadapted, trace.adaptor_in);
    }

    void zero_grad() {
        adaptor.zero_grad();
        net.zero_grad();
    }

    std::vector<nn::ParamRef<S>> params() {
        std::vector<nn::ParamRef<S>> out;
        adaptor.collect("adaptor", out);
        net.collect("net", out);
        return out;
    }

    std::int64_t param_count() {
        std::int64_t n = 0;
        for (const auto& p : params()) n += p.value->size();
        return n;
    }

    // Copies parameters across scalar types (float training checkpoints
    // replayed in double for gradient checks and vice versa).
    template <typename T>
    void copy_params_from(SegModel<T>& other) {
        auto mine = params();
        auto theirs = other.params();
        if (mine.size() != theirs.size())
            throw ContractError("SegModel: parameter structure mismatch");
        for (std::size_t i = 0; i < mine.size(); ++i)
            *mine[i].value = theirs[i].value->template cast<S>();
    }
};

// Per-pixel affine projection of a full image; nodata pixels are filled
// with 0 before projection and stay flagged in the output.
template <typename S>
MultibandImage adapt(const SegModel<S>& model, const MultibandImage& x) {
    if (x.channels() != model.in_channels)
        throw ShapeError("adapt: channel mismatch (" + std::to_string(x.channels()) + " vs " +
                         std::to_string(model.in_channels) + ")");
    const nn::Fmap<S> f = nn::to_fmap<S>(x);
    const nn::Fmap<S> y = model.adaptor.forward(f, nullptr);
    MultibandImage out(x.grid, 3);
    for (int b = 0; b < 3; ++b)
        for (Eigen::Index i = 0; i < y.pixels(); ++i)
            out.bands[static_cast<std::size_t>(b)].data()[i] = static_cast<float>(y.m(i, b));
    out.nodata = x.nodata;
    return out;
}

// Full-model logits on the image's own grid.
template <typename S>
LogitMap forward(const SegModel<S>& model, const MultibandImage& image) {
    const nn::Fmap<S> x = nn::to_fmap<S>(image);
    const nn::Fmap<S> logits = model.forward_fmap(x, nullptr);
    LogitMap out = nn::to_logit_map(logits, image.grid);
    out.validate();
    return out;
}

// Water iff sigmoid(logit) >= threshold.
inline BinaryMask binarize(const LogitMap& logits, double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ContractError("binarize: threshold must be inside (0,1)");
    BinaryMask out(logits.grid);
    for (Eigen::Index i = 0; i < logits.values.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-static_cast<double>(logits.values.data()[i])));
        out.values.data()[i] = p >= threshold ? 1 : 0;
    }
    return out;
}

}  // namespace rivo
