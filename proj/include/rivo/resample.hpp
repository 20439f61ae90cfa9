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
#include <cmath>
#include <vector>

#include "rivo/raster.hpp"

namespace rivo {

enum class ResampleMode { bilinear, nearest };

namespace detail {

/// Per-axis bilinear support: dst index i reads src indices (lo, hi) with
/// weights (1-f, f). Clamp-to-border at both ends; hi == lo at the border
/// with f == 0, so border samples never invent data.
struct AxisTap {
    int lo;
    int hi;
    double f;
};

inline std::vector<AxisTap> bilinear_taps(const GeoGrid& src, const GeoGrid& dst, bool x_axis) {
    const int n_src = x_axis ? src.width : src.height;
    const int n_dst = x_axis ? dst.width : dst.height;
    const double src_origin = x_axis ? src.origin_x : src.origin_y;
    std::vector<AxisTap> taps(static_cast<std::size_t>(n_dst));
    for (int i = 0; i < n_dst; ++i) {
        const double center = (x_axis ? dst.center_x(i) : dst.center_y(i));
        double u = (center - src_origin) / src.pixel_size - 0.5;
        if (u < 0.0) u = 0.0;
        if (u > n_src - 1) u = n_src - 1;
        const int lo = static_cast<int>(std::floor(u));
        const double f = u - lo;
        taps[i] = AxisTap{lo, (f > 0.0 && lo + 1 < n_src) ? lo + 1 : lo, f};
    }
    return taps;
}

/// Nearest source index for a dst center; exact half-way ties resolve to
/// the lower index.
inline int nearest_index(double coord, double src_origin, double pixel_size, int n_src) {
    const double u = (coord - src_origin) / pixel_size - 0.5;
    int i = static_cast<int>(std::ceil(u - 0.5));
    if (i < 0) i = 0;
    if (i > n_src - 1) i = n_src - 1;
    return i;
}

template <typename Scalar>
Plane<Scalar> bilinear_plane(const Plane<Scalar>& src, const std::vector<AxisTap>& rows,
                             const std::vector<AxisTap>& cols) {
    Plane<Scalar> out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const AxisTap& tr = rows[r];
        const Scalar fr = static_cast<Scalar>(tr.f);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const AxisTap& tc = cols[c];
            const Scalar fc = static_cast<Scalar>(tc.f);
            const Scalar top = src(tr.lo, tc.lo) * (Scalar{1} - fc) + src(tr.lo, tc.hi) * fc;
            const Scalar bot = src(tr.hi, tc.lo) * (Scalar{1} - fc) + src(tr.hi, tc.hi) * fc;
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                top * (Scalar{1} - fr) + bot * fr;
        }
    }
    return out;
}

/// Nodata propagation for bilinear sampling: a dst pixel is nodata iff any
/// source sample with nonzero weight is nodata.
inline PlaneU8 bilinear_nodata(const PlaneU8& src, const std::vector<AxisTap>& rows,
                               const std::vector<AxisTap>& cols) {
    PlaneU8 out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const AxisTap& tr = rows[r];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const AxisTap& tc = cols[c];
            bool bad = src(tr.lo, tc.lo) != 0;
            if (tc.f > 0.0) bad = bad || src(tr.lo, tc.hi) != 0;
            if (tr.f > 0.0) {
                bad = bad || src(tr.hi, tc.lo) != 0;
                if (tc.f > 0.0) bad = bad || src(tr.hi, tc.hi) != 0;
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = bad ? 1 : 0;
        }
    }
    return out;
}

}  // namespace detail

/// Dense per-axis interpolation operator: dst_plane = R * src_plane * C^T
/// where R = interp_matrix(rows) and C = interp_matrix(cols). This is the
/// same bilinear map as bilinear_upsample expressed as matrices, which the
/// training path uses so its adjoint is just the transpose.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> interp_matrix(const GeoGrid& src,
                                                                    const GeoGrid& dst,
                                                                    bool x_axis) {
    const auto taps = detail::bilinear_taps(src, dst, x_axis);
    const int n_src = x_axis ? src.width : src.height;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            static_cast<Eigen::Index>(taps.size()), n_src);
    for (std::size_t i = 0; i < taps.size(); ++i) {
        m(static_cast<Eigen::Index>(i), taps[i].lo) += static_cast<Scalar>(1.0 - taps[i].f);
        m(static_cast<Eigen::Index>(i), taps[i].hi) += static_cast<Scalar>(taps[i].f);
    }
    return m;
}

/// Bilinear upsampling onto a finer grid covering the same extent.
/// Output samples sit at target pixel centers; edges clamp to the border.
inline MultibandImage bilinear_upsample(const MultibandImage& img, const GeoGrid& target) {
    require_aligned(img.grid, target, "bilinear_upsample");
    if (target.pixel_size > img.grid.pixel_size + 1e-12)
        throw AlignmentError("bilinear_upsample: target is coarser than the input");
    const auto rows = detail::bilinear_taps(img.grid, target, /*x_axis=*/false);
    const auto cols = detail::bilinear_taps(img.grid, target, /*x_axis=*/true);
    MultibandImage out(target, img.channels());
    for (int b = 0; b < img.channels(); ++b)
        out.bands[static_cast<std::size_t>(b)] =
            detail::bilinear_plane(img.bands[static_cast<std::size_t>(b)], rows, cols);
    if (img.any_nodata()) {
        out.nodata = detail::bilinear_nodata(img.nodata, rows, cols);
        for (auto& band : out.bands)
            band = (out.nodata != std::uint8_t{0}).select(PlaneF::Zero(band.rows(), band.cols()), band);
    }
    return out;
}

inline LogitMap bilinear_upsample(const LogitMap& lm, const GeoGrid& target) {
    require_aligned(lm.grid, target, "bilinear_upsample");
    if (target.pixel_size > lm.grid.pixel_size + 1e-12)
        throw AlignmentError("bilinear_upsample: target is coarser than the input");
    const auto rows = detail::bilinear_taps(lm.grid, target, false);
    const auto cols = detail::bilinear_taps(lm.grid, target, true);
    LogitMap out(target);
    out.values = detail::bilinear_plane(lm.values, rows, cols);
    return out;
}

/// Mean over factor x factor blocks; the output pixel size grows by the
/// factor. A block is nodata iff strictly more than half its pixels are;
/// otherwise its value is the mean of the valid pixels.
inline MultibandImage block_downsample(const MultibandImage& img, int factor) {
    if (factor < 1) throw ShapeError("block_downsample: factor must be >= 1");
    if (img.grid.width % factor != 0 || img.grid.height % factor != 0)
        throw ShapeError("block_downsample: factor " + std::to_string(factor) +
                         " does not divide " + std::to_string(img.grid.width) + "x" +
                         std::to_string(img.grid.height));
    if (factor == 1) return img;

    GeoGrid out_grid(img.grid.origin_x, img.grid.origin_y, img.grid.pixel_size * factor,
                     img.grid.width / factor, img.grid.height / factor);
    MultibandImage out(out_grid, img.channels());
    const int half = factor * factor / 2;
    for (int r = 0; r < out_grid.height; ++r) {
        for (int c = 0; c < out_grid.width; ++c) {
            int invalid = 0;
            for (int dr = 0; dr < factor; ++dr)
                for (int dc = 0; dc < factor; ++dc)
                    invalid += img.nodata(r * factor + dr, c * factor + dc) != 0;
            const int valid = factor * factor - invalid;
            if (invalid > half || valid == 0) {
                out.nodata(r, c) = 1;
                continue;
            }
            for (int b = 0; b < img.channels(); ++b) {
                double sum = 0.0;
                for (int dr = 0; dr < factor; ++dr)
                    for (int dc = 0; dc < factor; ++dc)
                        if (img.nodata(r * factor + dr, c * factor + dc) == 0)
                            sum += img.bands[static_cast<std::size_t>(b)](r * factor + dr,
                                                                          c * factor + dc);
                out.bands[static_cast<std::size_t>(b)](r, c) = static_cast<float>(sum / valid);
            }
        }
    }
    return out;
}

/// Samples img at the target's pixel centers. Centers outside img's extent
/// become nodata. This is the affine co-registration stand-in: both grids
/// must live on the same planar frame.
inline MultibandImage resample_to_grid(const MultibandImage& img, const GeoGrid& target,
                                       ResampleMode mode) {
    if (!extents_overlap(img.grid, target))
        throw AlignmentError("resample_to_grid: grids do not overlap (" + img.grid.describe() +
                             " vs " + target.describe() + ")");
    MultibandImage out(target, img.channels());
    const auto rows = detail::bilinear_taps(img.grid, target, false);
    const auto cols = detail::bilinear_taps(img.grid, target, true);
    for (int r = 0; r < target.height; ++r) {
        const double y = target.center_y(r);
        const bool y_in = y >= img.grid.origin_y && y < img.grid.max_y();
        const int sr = detail::nearest_index(y, img.grid.origin_y, img.grid.pixel_size,
                                             img.grid.height);
        for (int c = 0; c < target.width; ++c) {
            const double x = target.center_x(c);
            if (!y_in || x < img.grid.origin_x || x >= img.grid.max_x()) {
                out.nodata(r, c) = 1;
                continue;
            }
            if (mode == ResampleMode::nearest) {
                const int sc = detail::nearest_index(x, img.grid.origin_x, img.grid.pixel_size,
                                                     img.grid.width);
                for (int b = 0; b < img.channels(); ++b)
                    out.bands[static_cast<std::size_t>(b)](r, c) =
                        img.bands[static_cast<std::size_t>(b)](sr, sc);
                out.nodata(r, c) = img.nodata(sr, sc);
            } else {
                const auto& tr = rows[static_cast<std::size_t>(r)];
                const auto& tc = cols[static_cast<std::size_t>(c)];
                bool bad = img.nodata(tr.lo, tc.lo) != 0;
                if (tc.f > 0.0) bad = bad || img.nodata(tr.lo, tc.hi) != 0;
                if (tr.f > 0.0) {
                    bad = bad || img.nodata(tr.hi, tc.lo) != 0;
                    if (tc.f > 0.0) bad = bad || img.nodata(tr.hi, tc.hi) != 0;
                }
                if (bad) {
                    out.nodata(r, c) = 1;
                    continue;
                }
                const float fr = static_cast<float>(tr.f);
                const float fc = static_cast<float>(tc.f);
                for (int b = 0; b < img.channels(); ++b) {
                    const auto& p = img.bands[static_cast<std::size_t>(b)];
                    const float top = p(tr.lo, tc.lo) * (1.0f - fc) + p(tr.lo, tc.hi) * fc;
                    const float bot = p(tr.hi, tc.lo) * (1.0f - fc) + p(tr.hi, tc.hi) * fc;
                    out.bands[static_cast<std::size_t>(b)](r, c) = top * (1.0f - fr) + bot * fr;
                }
            }
        }
    }
    return out;
}

}  // namespace rivo
