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

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "rivo/errors.hpp"
#include "rivo/geo_grid.hpp"

namespace rivo {

/// One raster band. Row-major so that (r, c) indexing matches the on-disk
/// row-major layout and Eigen expressions stay available.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneF = Plane<float>;
using PlaneD = Plane<double>;
using PlaneU8 = Plane<std::uint8_t>;

/// C-band reflectance-like image with a per-pixel nodata mask.
/// Values are finite wherever the mask is 0.
struct MultibandImage {
    GeoGrid grid;
    std::vector<PlaneF> bands;
    PlaneU8 nodata;  // 1 = nodata

    MultibandImage() = default;
    MultibandImage(GeoGrid g, int band_count) : grid(std::move(g)) {
        if (band_count < 1) throw ShapeError("MultibandImage: need at least one band");
        bands.assign(static_cast<std::size_t>(band_count),
                     PlaneF::Zero(grid.height, grid.width));
        nodata = PlaneU8::Zero(grid.height, grid.width);
    }

    int channels() const { return static_cast<int>(bands.size()); }
    int height() const { return grid.height; }
    int width() const { return grid.width; }

    bool any_nodata() const { return (nodata != 0).any(); }
    std::int64_t nodata_count() const {
        return (nodata != std::uint8_t{0}).count();
    }

    void validate() const {
        grid.validate();
        if (bands.empty()) throw ShapeError("MultibandImage: no bands");
        for (const auto& b : bands)
            if (b.rows() != grid.height || b.cols() != grid.width)
                throw ShapeError("MultibandImage: band shape does not match grid");
        if (nodata.rows() != grid.height || nodata.cols() != grid.width)
            throw ShapeError("MultibandImage: nodata mask shape does not match grid");
        for (const auto& b : bands) {
            if (!((nodata != std::uint8_t{0}) || b.isFinite()).all())
                throw NumericError("MultibandImage: non-finite value outside nodata mask");
        }
    }
};

/// Binary water mask; values strictly in {0, 1}.
struct BinaryMask {
    GeoGrid grid;
    PlaneU8 values;

    BinaryMask() = default;
    explicit BinaryMask(GeoGrid g) : grid(std::move(g)) {
        values = PlaneU8::Zero(grid.height, grid.width);
    }

    int height() const { return grid.height; }
    int width() const { return grid.width; }
    std::int64_t water_count() const { return (values != std::uint8_t{0}).count(); }

    void validate() const {
        grid.validate();
        if (values.rows() != grid.height || values.cols() != grid.width)
            throw ShapeError("BinaryMask: shape does not match grid");
        if (!((values == std::uint8_t{0}) || (values == std::uint8_t{1})).all())
            throw ShapeError("BinaryMask: values must be 0 or 1");
    }
};

/// Pre-sigmoid model output on a grid.
struct LogitMap {
    GeoGrid grid;
    PlaneF values;

    LogitMap() = default;
    explicit LogitMap(GeoGrid g) : grid(std::move(g)) {
        values = PlaneF::Zero(grid.height, grid.width);
    }

    void validate() const {
        grid.validate();
        if (values.rows() != grid.height || values.cols() != grid.width)
            throw ShapeError("LogitMap: shape does not match grid");
        if (!values.isFinite().all())
            throw NumericError("LogitMap: non-finite logit");
    }
};

}  // namespace rivo
