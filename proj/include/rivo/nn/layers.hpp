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

// Network building blocks, each a pure forward with an explicit cache so
// several forward passes can stay alive before their backwards run (the
// temporal strategies backprop through all m frame passes).

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rivo/errors.hpp"
#include "rivo/nn/fmap.hpp"
#include "rivo/rng.hpp"

namespace rivo::nn {

// A named parameter tensor with its gradient accumulator. Collected in a
// fixed order for the optimizer, checkpoints, and gradient checks.
template <typename S>
struct ParamRef {
    std::string name;
    Mat<S>* value;
    Mat<S>* grad;
};

// ---------------------------------------------------------------------
// 3x3 same-padding convolution via im2col. Column order of the patch
// matrix: input channel major, then the 3x3 offset.

template <typename S>
struct ConvCache {
    Mat<S> patches;  // (h*w) x (9*cin)
    int h = 0, w = 0;
};

template <typename S>
struct Conv3x3 {
    int cin = 0, cout = 0;
    Mat<S> weight;  // (9*cin) x cout
    Mat<S> bias;    // cout x 1
    Mat<S> dweight;
    Mat<S> dbias;

    Conv3x3() = default;
    Conv3x3(int cin_, int cout_, Rng& rng) : cin(cin_), cout(cout_) {
        // He initialization for the ReLU blocks.
        const double std = std::sqrt(2.0 / (9.0 * cin_));
        weight.resize(9 * cin_, cout_);
        for (Eigen::Index i = 0; i < weight.rows(); ++i)
            for (Eigen::Index j = 0; j < weight.cols(); ++j)
                weight(i, j) = static_cast<S>(rng.normal(0.0, std));
        bias = Mat<S>::Zero(cout_, 1);
        zero_grad();
    }

    void zero_grad() {
        dweight = Mat<S>::Zero(9 * cin, cout);
        dbias = Mat<S>::Zero(cout, 1);
    }

    static Mat<S> im2col(const Fmap<S>& x) {
        const int h = x.h, w = x.w;
        const int cin = x.channels();
        Mat<S> patches = Mat<S>::Zero(static_cast<Eigen::Index>(h) * w, 9 * cin);
        for (int k = 0; k < cin; ++k) {
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int col = k * 9 + (dr + 1) * 3 + (dc + 1);
                    for (int r = 0; r < h; ++r) {
                        const int rr = r + dr;
                        if (rr < 0 || rr >= h) continue;
                        const int c_lo = dc < 0 ? 1 : 0;
                        const int c_hi = dc > 0 ? w - 1 : w;
                        if (c_hi <= c_lo) continue;
                        patches.block(static_cast<Eigen::Index>(r) * w + c_lo, col,
                                      c_hi - c_lo, 1) =
                            x.m.block(static_cast<Eigen::Index>(rr) * w + c_lo + dc, k,
                                      c_hi - c_lo, 1);
                    }
                }
            }
        }
        return patches;
    }

    Fmap<S> forward(const Fmap<S>& x, ConvCache<S>* cache) const {
        if (x.channels() != cin) throw ShapeError("Conv3x3: channel mismatch");
        Mat<S> patches = im2col(x);
        Fmap<S> y;
        y.h = x.h;
        y.w = x.w;
        y.m.noalias() = patches * weight;
        y.m.rowwise() += bias.col(0).transpose();
        if (cache) {
            cache->patches = std::move(patches);
            cache->h = x.h;
            cache->w = x.w;
        }
        return y;
    }

    Fmap<S> backward(const Fmap<S>& dy, const ConvCache<S>& cache) {
        dweight.noalias() += cache.patches.transpose() * dy.m;
        dbias.col(0).noalias() += dy.m.colwise().sum().transpose();
        const Mat<S> dpatches = dy.m * weight.transpose();
        // col2im: scatter-add each patch column back to its source pixel.
        Fmap<S> dx(cache.h, cache.w, cin);
        const int h = cache.h, w = cache.w;
        for (int k = 0; k < cin; ++k) {
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int col = k * 9 + (dr + 1) * 3 + (dc + 1);
                    for (int r = 0; r < h; ++r) {
                        const int rr = r + dr;
                        if (rr < 0 || rr >= h) continue;
                        const int c_lo = dc < 0 ? 1 : 0;
                        const int c_hi = dc > 0 ? w - 1 : w;
                        if (c_hi <= c_lo) continue;
                        dx.m.block(static_cast<Eigen::Index>(rr) * w + c_lo + dc, k,
                                   c_hi - c_lo, 1) +=
                            dpatches.block(static_cast<Eigen::Index>(r) * w + c_lo, col,
                                           c_hi - c_lo, 1);
                    }
                }
            }
        }
        return dx;
    }

    void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
        out.push_back({prefix + ".weight", &weight, &dweight});
        out.push_back({prefix + ".bias", &bias, &dbias});
    }
};

// ---------------------------------------------------------------------
// 1x1 convolution (per-pixel linear map); also the spectral adaptor.

template <typename S>
struct Conv1x1 {
    int cin = 0, cout = 0;
    Mat<S> weight;  // cin x cout
    Mat<S> bias;    // cout x 1
    Mat<S> dweight;
    Mat<S> dbias;

    Conv1x1() = default;
    Conv1x1(int cin_, int cout_, Rng& rng) : cin(cin_), cout(cout_) {
        const double std = std::sqrt(2.0 / cin_);
        weight.resize(cin_, cout_);
        for (Eigen::Index i = 0; i < weight.rows(); ++i)
            for (Eigen::Index j = 0; j < weight.cols(); ++j)
                weight(i, j) = static_cast<S>(rng.normal(0.0, std));
        bias = Mat<S>::Zero(cout_, 1);
        zero_grad();
    }

    void zero_grad() {
        dweight = Mat<S>::Zero(cin, cout);
        dbias = Mat<S>::Zero(cout, 1);
    }

    Fmap<S> forward(const Fmap<S>& x, Mat<S>* cache_input) const {
        if (x.channels() != cin) throw ShapeError("Conv1x1: channel mismatch");
        Fmap<S> y;
        y.h = x.h;
        y.w = x.w;
        y.m.noalias() = x.m * weight;
        y.m.rowwise() += bias.col(0).transpose();
        if (cache_input) *cache_input = x.m;
        return y;
    }

    Fmap<S> backward(const Fmap<S>& dy, const Mat<S>& cached_input) {
        dweight.noalias() += cached_input.transpose() * dy.m;
        dbias.col(0).noalias() += dy.m.colwise().sum().transpose();
        Fmap<S> dx;
        dx.h = dy.h;
        dx.w = dy.w;
        dx.m.noalias() = dy.m * weight.transpose();
        return dx;
    }

    void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
        out.push_back({prefix + ".weight", &weight, &dweight});
        out.push_back({prefix + ".bias", &bias, &dbias});
    }
};

// ---------------------------------------------------------------------

template <typename S>
struct Relu {
    static Fmap<S> forward(const Fmap<S>& x, Mat<S>* mask) {
        Fmap<S> y = x;
        y.m = y.m.cwiseMax(S{0});
        if (mask) *mask = (x.m.array() > S{0}).template cast<S>().matrix();
        return y;
    }
    static Fmap<S> backward(const Fmap<S>& dy, const Mat<S>& mask) {
        Fmap<S> dx = dy;
        dx.m = dx.m.cwiseProduct(mask);
        return dx;
    }
};

// 2x2 max pooling, stride 2. Input dims must be even (the net pads).
template <typename S>
struct MaxPool2 {
    using ArgMat = Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic>;

    static Fmap<S> forward(const Fmap<S>& x, ArgMat* argmax) {
        if (x.h % 2 != 0 || x.w % 2 != 0) throw ShapeError("MaxPool2: odd input dims");
        const int oh = x.h / 2, ow = x.w / 2;
        const int cc = x.channels();
        Fmap<S> y(oh, ow, cc);
        ArgMat arg(static_cast<Eigen::Index>(oh) * ow, cc);
        for (int r = 0; r < oh; ++r) {
            for (int c = 0; c < ow; ++c) {
                const Eigen::Index i00 = static_cast<Eigen::Index>(2 * r) * x.w + 2 * c;
                const Eigen::Index idx[4] = {i00, i00 + 1, i00 + x.w, i00 + x.w + 1};
                const Eigen::Index o = static_cast<Eigen::Index>(r) * ow + c;
                for (int k = 0; k < cc; ++k) {
                    Eigen::Index best = idx[0];
                    S v = x.m(idx[0], k);
                    for (int q = 1; q < 4; ++q) {
                        if (x.m(idx[q], k) > v) {
                            v = x.m(idx[q], k);
                            best = idx[q];
                        }
                    }
                    y.m(o, k) = v;
                    arg(o, k) = best;
                }
            }
        }
        if (argmax) *argmax = std::move(arg);
        return y;
    }

    static Fmap<S> backward(const Fmap<S>& dy, const ArgMat& argmax, int in_h, int in_w) {
        Fmap<S> dx(in_h, in_w, dy.channels());
        for (Eigen::Index o = 0; o < dy.pixels(); ++o)
            for (int k = 0; k < dy.channels(); ++k) dx.m(argmax(o, k), k) += dy.m(o, k);
        return dx;
    }
};

// Nearest-neighbor 2x upsampling.
template <typename S>
struct Upsample2 {
    static Fmap<S> forward(const Fmap<S>& x) {
        const int oh = x.h * 2, ow = x.w * 2;
        Fmap<S> y(oh, ow, x.channels());
        for (int r = 0; r < oh; ++r) {
            const Eigen::Index src_row = static_cast<Eigen::Index>(r / 2) * x.w;
            for (int c = 0; c < ow; ++c)
                y.m.row(static_cast<Eigen::Index>(r) * ow + c) = x.m.row(src_row + c / 2);
        }
        return y;
    }
    static Fmap<S> backward(const Fmap<S>& dy, int in_h, int in_w) {
        Fmap<S> dx(in_h, in_w, dy.channels());
        for (int r = 0; r < dy.h; ++r) {
            const Eigen::Index src_row = static_cast<Eigen::Index>(r / 2) * in_w;
            for (int c = 0; c < dy.w; ++c)
                dx.m.row(src_row + c / 2) += dy.m.row(static_cast<Eigen::Index>(r) * dy.w + c);
        }
        return dx;
    }
};

// Channel concatenation for skip connections.
template <typename S>
Fmap<S> concat(const Fmap<S>& a, const Fmap<S>& b) {
    if (a.h != b.h || a.w != b.w) throw ShapeError("concat: spatial dims differ");
    Fmap<S> y(a.h, a.w, a.channels() + b.channels());
    y.m << a.m, b.m;
    return y;
}

// Replicate-padding to target dims (bottom/right), matching the
// clamp-to-border convention used by the resamplers.
template <typename S>
Fmap<S> pad_replicate(const Fmap<S>& x, int th, int tw) {
    if (th == x.h && tw == x.w) return x;
    Fmap<S> y(th, tw, x.channels());
    for (int r = 0; r < th; ++r) {
        const int sr = std::min(r, x.h - 1);
        for (int c = 0; c < tw; ++c) {
            const int sc = std::min(c, x.w - 1);
            y.m.row(static_cast<Eigen::Index>(r) * tw + c) =
                x.m.row(static_cast<Eigen::Index>(sr) * x.w + sc);
        }
    }
    return y;
}

template <typename S>
Fmap<S> crop(const Fmap<S>& x, int th, int tw) {
    if (th == x.h && tw == x.w) return x;
    Fmap<S> y(th, tw, x.channels());
    for (int r = 0; r < th; ++r)
        y.m.middleRows(static_cast<Eigen::Index>(r) * tw, tw) =
            x.m.middleRows(static_cast<Eigen::Index>(r) * x.w, tw);
    return y;
}

// Adjoint of crop: embed the gradient into the larger padded dims with
// zeros outside the kept top-left block.
template <typename S>
Fmap<S> crop_adjoint(const Fmap<S>& dy, int th, int tw) {
    if (th == dy.h && tw == dy.w) return dy;
    Fmap<S> dx(th, tw, dy.channels());
    for (int r = 0; r < dy.h; ++r)
        dx.m.middleRows(static_cast<Eigen::Index>(r) * tw, dy.w) =
            dy.m.middleRows(static_cast<Eigen::Index>(r) * dy.w, dy.w);
    return dx;
}

// Adjoint of pad_replicate: route padded-region gradients back to their
// clamped source pixels.
template <typename S>
Fmap<S> pad_replicate_adjoint(const Fmap<S>& dpadded, int sh, int sw) {
    if (dpadded.h == sh && dpadded.w == sw) return dpadded;
    Fmap<S> dx(sh, sw, dpadded.channels());
    for (int r = 0; r < dpadded.h; ++r) {
        const int sr = std::min(r, sh - 1);
        for (int c = 0; c < dpadded.w; ++c) {
            const int sc = std::min(c, sw - 1);
            dx.m.row(static_cast<Eigen::Index>(sr) * sw + sc) +=
                dpadded.m.row(static_cast<Eigen::Index>(r) * dpadded.w + c);
        }
    }
    return dx;
}

}  // namespace rivo::nn
