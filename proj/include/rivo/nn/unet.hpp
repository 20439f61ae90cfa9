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

// Compact 3-level U-shaped encoder-decoder with skip connections and a
// single-logit head. Spatial dims are padded (replicate) to a multiple of
// 4 internally and cropped back, so the output grid always equals the
// input grid.

#pragma once

#include <string>
#include <vector>

#include "rivo/nn/layers.hpp"

namespace rivo::nn {

template <typename S>
struct UNetTrace {
    int in_h = 0, in_w = 0;      // caller dims before padding
    int pad_h = 0, pad_w = 0;    // padded dims
    ConvCache<S> e0a, e0b, e1a, e1b, ba, bb, d1a, d1b, d0a, d0b;
    Mat<S> r_e0a, r_e0b, r_e1a, r_e1b, r_ba, r_bb, r_d1a, r_d1b, r_d0a, r_d0b;
    typename MaxPool2<S>::ArgMat p0, p1;
    Mat<S> head_in;
};

template <typename S>
struct UNet {
    int in_channels = 3;
    int base = 8;  // channel width at the top level

    Conv3x3<S> e0a, e0b;  // in -> F -> F
    Conv3x3<S> e1a, e1b;  // F -> 2F -> 2F
    Conv3x3<S> ba, bb;    // 2F -> 4F -> 4F
    Conv3x3<S> d1a, d1b;  // 4F+2F -> 2F -> 2F
    Conv3x3<S> d0a, d0b;  // 2F+F -> F -> F
    Conv1x1<S> head;      // F -> 1

    UNet() = default;
    UNet(int in_channels_, int base_, Rng& rng)
        : in_channels(in_channels_),
          base(base_),
          e0a(in_channels_, base_, rng),
          e0b(base_, base_, rng),
          e1a(base_, 2 * base_, rng),
          e1b(2 * base_, 2 * base_, rng),
          ba(2 * base_, 4 * base_, rng),
          bb(4 * base_, 4 * base_, rng),
          d1a(6 * base_, 2 * base_, rng),
          d1b(2 * base_, 2 * base_, rng),
          d0a(3 * base_, base_, rng),
          d0b(base_, base_, rng),
          head(base_, 1, rng) {}

    // Single-logit output at the input resolution. The trace may be null
    // for inference.
    Fmap<S> forward(const Fmap<S>& x, UNetTrace<S>* t) const {
        UNetTrace<S> local;
        UNetTrace<S>& tr = t ? *t : local;
        tr.in_h = x.h;
        tr.in_w = x.w;
        tr.pad_h = (x.h + 3) / 4 * 4;
        tr.pad_w = (x.w + 3) / 4 * 4;
        const Fmap<S> xin = pad_replicate(x, tr.pad_h, tr.pad_w);

        auto cv = [&](const Conv3x3<S>& conv, const Fmap<S>& in, ConvCache<S>& cc,
                      Mat<S>& mask) {
            return Relu<S>::forward(conv.forward(in, t ? &cc : nullptr), t ? &mask : nullptr);
        };
        const Fmap<S> s0 = cv(e0b, cv(e0a, xin, tr.e0a, tr.r_e0a), tr.e0b, tr.r_e0b);
        const Fmap<S> x1 = MaxPool2<S>::forward(s0, t ? &tr.p0 : nullptr);
        const Fmap<S> s1 = cv(e1b, cv(e1a, x1, tr.e1a, tr.r_e1a), tr.e1b, tr.r_e1b);
        const Fmap<S> x2 = MaxPool2<S>::forward(s1, t ? &tr.p1 : nullptr);
        const Fmap<S> btm = cv(bb, cv(ba, x2, tr.ba, tr.r_ba), tr.bb, tr.r_bb);
        const Fmap<S> u1 = concat(Upsample2<S>::forward(btm), s1);
        const Fmap<S> y1 = cv(d1b, cv(d1a, u1, tr.d1a, tr.r_d1a), tr.d1b, tr.r_d1b);
        const Fmap<S> u0 = concat(Upsample2<S>::forward(y1), s0);
        const Fmap<S> y0 = cv(d0b, cv(d0a, u0, tr.d0a, tr.r_d0a), tr.d0b, tr.r_d0b);
        const Fmap<S> logits = head.forward(y0, t ? &tr.head_in : nullptr);
        return crop(logits, tr.in_h, tr.in_w);
    }

    // Accumulates parameter gradients; returns the gradient w.r.t. the
    // network input (needed by the adaptor upstream).
    Fmap<S> backward(const Fmap<S>& dlogits, const UNetTrace<S>& tr) {
        const Fmap<S> dpad = crop_adjoint(dlogits, tr.pad_h, tr.pad_w);
        Fmap<S> dy0 = head.backward(dpad, tr.head_in);

        auto bk = [&](Conv3x3<S>& conv, const Fmap<S>& dy, const ConvCache<S>& cc,
                      const Mat<S>& mask) {
            return conv.backward(Relu<S>::backward(dy, mask), cc);
        };
        Fmap<S> du0 = bk(d0a, bk(d0b, dy0, tr.d0b, tr.r_d0b), tr.d0a, tr.r_d0a);
        // Split the concat gradient: first 2F channels went through the
        // upsample, the rest is the skip.
        const int f2 = 2 * base;
        Fmap<S> dup1;
        dup1.h = du0.h;
        dup1.w = du0.w;
        dup1.m = du0.m.leftCols(f2);
        Fmap<S> ds0_skip;
        ds0_skip.h = du0.h;
        ds0_skip.w = du0.w;
        ds0_skip.m = du0.m.rightCols(base);
        Fmap<S> dy1 = Upsample2<S>::backward(dup1, du0.h / 2, du0.w / 2);

        Fmap<S> du1 = bk(d1a, bk(d1b, dy1, tr.d1b, tr.r_d1b), tr.d1a, tr.r_d1a);
        const int f4 = 4 * base;
        Fmap<S> dup2;
        dup2.h = du1.h;
        dup2.w = du1.w;
        dup2.m = du1.m.leftCols(f4);
        Fmap<S> ds1_skip;
        ds1_skip.h = du1.h;
        ds1_skip.w = du1.w;
        ds1_skip.m = du1.m.rightCols(f2);
        Fmap<S> dbtm = Upsample2<S>::backward(dup2, du1.h / 2, du1.w / 2);

        Fmap<S> dx2 = bk(ba, bk(bb, dbtm, tr.bb, tr.r_bb), tr.ba, tr.r_ba);
        Fmap<S> ds1 = MaxPool2<S>::backward(dx2, tr.p1, du1.h, du1.w);
        ds1.m += ds1_skip.m;
        Fmap<S> dx1 = bk(e1a, bk(e1b, ds1, tr.e1b, tr.r_e1b), tr.e1a, tr.r_e1a);
        Fmap<S> ds0 = MaxPool2<S>::backward(dx1, tr.p0, du0.h, du0.w);
        ds0.m += ds0_skip.m;
        Fmap<S> dxin = bk(e0a, bk(e0b, ds0, tr.e0b, tr.r_e0b), tr.e0a, tr.r_e0a);
        return pad_replicate_adjoint(dxin, tr.in_h, tr.in_w);
    }

    void zero_grad() {
        for (Conv3x3<S>* c : {&e0a, &e0b, &e1a, &e1b, &ba, &bb, &d1a, &d1b, &d0a, &d0b})
            c->zero_grad();
        head.zero_grad();
    }

    void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
        e0a.collect(prefix + ".e0a", out);
        e0b.collect(prefix + ".e0b", out);
        e1a.collect(prefix + ".e1a", out);
        e1b.collect(prefix + ".e1b", out);
        ba.collect(prefix + ".ba", out);
        bb.collect(prefix + ".bb", out);
        d1a.collect(prefix + ".d1a", out);
        d1b.collect(prefix + ".d1b", out);
        d0a.collect(prefix + ".d0a", out);
        d0b.collect(prefix + ".d0b", out);
        head.collect(prefix + ".head", out);
    }
};

}  // namespace rivo::nn
