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

// Feature maps for the network: pixels as rows (row-major order r*w + c),
// channels as columns, so convolutions become im2col + GEMM.

#pragma once

#include <Eigen/Core>

#include "rivo/raster.hpp"

namespace rivo::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct Fmap {
    int h = 0;
    int w = 0;
    Mat<S> m;  // (h*w) x channels

    Fmap() = default;
    Fmap(int h_, int w_, int channels) : h(h_), w(w_), m(Mat<S>::Zero(h_ * w_, channels)) {}

    int channels() const { return static_cast<int>(m.cols()); }
    Eigen::Index pixels() const { return static_cast<Eigen::Index>(h) * w; }
};

// nodata pixels enter the network as zeros in every band.
template <typename S>
Fmap<S> to_fmap(const MultibandImage& img) {
    Fmap<S> f(img.height(), img.width(), img.channels());
    for (int b = 0; b < img.channels(); ++b) {
        const PlaneF& plane = img.bands[static_cast<std::size_t>(b)];
        for (Eigen::Index i = 0; i < f.pixels(); ++i)
            f.m(i, b) = static_cast<S>(plane.data()[i]);
    }
    if (img.any_nodata()) {
        for (Eigen::Index i = 0; i < f.pixels(); ++i)
            if (img.nodata.data()[i] != 0) f.m.row(i).setZero();
    }
    return f;
}

template <typename S>
LogitMap to_logit_map(const Fmap<S>& f, const GeoGrid& grid) {
    if (f.h != grid.height || f.w != grid.width || f.channels() != 1)
        throw ShapeError("to_logit_map: feature map is not a single-channel grid match");
    LogitMap out(grid);
    for (Eigen::Index i = 0; i < f.pixels(); ++i)
        out.values.data()[i] = static_cast<float>(f.m(i, 0));
    return out;
}

}  // namespace rivo::nn
