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

#include "rivo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "rivo/errors.hpp"
#include "rivo/resample.hpp"
#include "rivo/rng.hpp"

namespace rivo {

namespace fs = std::filesystem;

GeoGrid SceneParams::hr_grid() const { return GeoGrid(0.0, 0.0, hr_pixel_size, hr_size, hr_size); }

GeoGrid SceneParams::lr_grid() const {
    return GeoGrid(0.0, 0.0, hr_pixel_size * downsample_factor, hr_size / downsample_factor,
                   hr_size / downsample_factor);
}

void SceneParams::validate() const {
    if (hr_size < 1 || downsample_factor < 1 || hr_size % downsample_factor != 0)
        throw ContractError("SceneParams: downsample_factor must divide hr_size");
    if (!(hr_pixel_size > 0)) throw ContractError("SceneParams: hr_pixel_size must be > 0");
    if (river_width_m < hr_pixel_size)
        throw ContractError("SceneParams: river_width_m must be >= one HR pixel");
    const std::size_t c = water_mean.size();
    if (c < 1 || water_std.size() != c || land_mean.size() != c || land_std.size() != c)
        throw ContractError("SceneParams: spectral vectors must share one band count >= 1");
    for (const auto* v : {&water_std, &land_std})
        for (const double s : *v)
            if (s < 0) throw ContractError("SceneParams: spectral std must be >= 0");
    if (noise_std < 0) throw ContractError("SceneParams: noise_std must be >= 0");
    if (cloud_probability < 0 || cloud_probability > 1)
        throw ContractError("SceneParams: cloud_probability outside [0,1]");
    if (cloud_radius_min_m > cloud_radius_max_m)
        throw ContractError("SceneParams: cloud radius range inverted");
    if (frame_count < 1) throw ContractError("SceneParams: frame_count must be >= 1");
    if (curvature_period_m <= 0) throw ContractError("SceneParams: curvature period must be > 0");
    if (max_subpixel_shift < 0) throw ContractError("SceneParams: max_subpixel_shift negative");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Centerline parametrized by u, the run-axis coordinate in meters from
// the grid origin. The cross-axis deflection is the sinusoid.
struct Centerline {
    const SceneParams& p;
    GeoGrid grid;

    double cross_center() const {
        const double extent = p.vertical ? grid.extent_x() : grid.extent_y();
        const double origin = p.vertical ? grid.origin_x : grid.origin_y;
        return origin + 0.5 * extent + p.center_offset_m;
    }
    double deflection(double u) const {
        return p.curvature_amplitude_m * std::sin(kTwoPi * u / p.curvature_period_m +
                                                  p.curvature_phase);
    }
    std::array<double, 2> point(double u) const {
        const double cross = cross_center() + deflection(u);
        const double run_origin = p.vertical ? grid.origin_y : grid.origin_x;
        return p.vertical ? std::array<double, 2>{cross, run_origin + u}
                          : std::array<double, 2>{run_origin + u, cross};
    }
    std::array<double, 2> tangent(double u) const {
        const double slope = p.curvature_amplitude_m * (kTwoPi / p.curvature_period_m) *
                             std::cos(kTwoPi * u / p.curvature_period_m + p.curvature_phase);
        const double norm = std::sqrt(1.0 + slope * slope);
        return p.vertical ? std::array<double, 2>{slope / norm, 1.0 / norm}
                          : std::array<double, 2>{1.0 / norm, slope / norm};
    }
    double run_extent() const { return p.vertical ? grid.extent_y() : grid.extent_x(); }
};

double point_segment_dist2(double px, double py, const std::array<double, 2>& a,
                           const std::array<double, 2>& b) {
    const double abx = b[0] - a[0], aby = b[1] - a[1];
    const double apx = px - a[0], apy = py - a[1];
    const double len2 = abx * abx + aby * aby;
    double t = len2 > 0 ? (apx * abx + apy * aby) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = apx - t * abx, dy = apy - t * aby;
    return dx * dx + dy * dy;
}

}  // namespace

HrScene generate_hr_scene(const SceneParams& params, std::uint64_t seed) {
    params.validate();
    const GeoGrid grid = params.hr_grid();
    const Centerline line{params, grid};
    const double ps = grid.pixel_size;
    const double step = ps / 4.0;
    const double pad = params.river_width_m + 4.0 * ps + params.curvature_amplitude_m;

    // Polyline sampled beyond the extent so no end-cap shows inside it.
    std::vector<std::array<double, 2>> poly;
    const double u_lo = -pad, u_hi = line.run_extent() + pad;
    const int n_seg = static_cast<int>(std::ceil((u_hi - u_lo) / step));
    poly.reserve(static_cast<std::size_t>(n_seg) + 1);
    for (int i = 0; i <= n_seg; ++i) poly.push_back(line.point(u_lo + i * step));

    const double half_w = params.river_width_m / 2.0;
    const double half_w2 = half_w * half_w;
    HrScene scene{MultibandImage(grid, params.bands()), BinaryMask(grid), {}};
    for (const auto& pt : poly) {
        if (pt[0] >= grid.origin_x && pt[0] <= grid.max_x() && pt[1] >= grid.origin_y &&
            pt[1] <= grid.max_y())
            scene.centerline.push_back(pt);
    }

    for (int r = 0; r < grid.height; ++r) {
        const double py = grid.center_y(r);
        for (int c = 0; c < grid.width; ++c) {
            const double px = grid.center_x(c);
            // Only polyline segments near the pixel's run coordinate can
            // be the closest: |u* - u_pixel| <= distance <= half_w.
            const double u_pix = (params.vertical ? py - grid.origin_y : px - grid.origin_x);
            const int i_lo = std::max(
                0, static_cast<int>(std::floor((u_pix - half_w - 2 * step - u_lo) / step)));
            const int i_hi = std::min(
                n_seg - 1, static_cast<int>(std::ceil((u_pix + half_w + 2 * step - u_lo) / step)));
            bool water = false;
            for (int i = i_lo; i <= i_hi && !water; ++i)
                water = point_segment_dist2(px, py, poly[static_cast<std::size_t>(i)],
                                            poly[static_cast<std::size_t>(i) + 1]) <= half_w2;
            scene.mask.values(r, c) = water ? 1 : 0;
        }
    }

    Rng rng(seed);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const bool water = scene.mask.values(r, c) != 0;
            const auto& mean = water ? params.water_mean : params.land_mean;
            const auto& std_ = water ? params.water_std : params.land_std;
            for (int b = 0; b < params.bands(); ++b) {
                double v = mean[static_cast<std::size_t>(b)];
                if (std_[static_cast<std::size_t>(b)] > 0)
                    v += rng.normal(0.0, std_[static_cast<std::size_t>(b)]);
                scene.image.bands[static_cast<std::size_t>(b)](r, c) = static_cast<float>(v);
            }
        }
    }
    return scene;
}

std::vector<Frame> degrade_to_lr_stack(const MultibandImage& hr_img, const SceneParams& params,
                                       std::uint64_t seed) {
    params.validate();
    const GeoGrid lr = params.lr_grid();
    const double lr_ps = lr.pixel_size;
    Rng rng(seed);
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(params.frame_count));

    for (int j = 0; j < params.frame_count; ++j) {
        MultibandImage shifted = hr_img;
        if (params.max_subpixel_shift > 0) {
            const double sx =
                rng.uniform(-params.max_subpixel_shift, params.max_subpixel_shift) * lr_ps;
            const double sy =
                rng.uniform(-params.max_subpixel_shift, params.max_subpixel_shift) * lr_ps;
            // Clamped bilinear resample at centers displaced by the shift.
            GeoGrid moved = hr_img.grid;
            moved.origin_x -= sx;
            moved.origin_y -= sy;
            const auto rows = detail::bilinear_taps(hr_img.grid, moved, false);
            const auto cols = detail::bilinear_taps(hr_img.grid, moved, true);
            for (int b = 0; b < hr_img.channels(); ++b)
                shifted.bands[static_cast<std::size_t>(b)] =
                    detail::bilinear_plane(hr_img.bands[static_cast<std::size_t>(b)], rows, cols);
        }
        Frame f{block_downsample(shifted, params.downsample_factor), {}};

        if (params.noise_std > 0) {
            for (auto& band : f.image.bands)
                for (Eigen::Index r = 0; r < band.rows(); ++r)
                    for (Eigen::Index c = 0; c < band.cols(); ++c)
                        band(r, c) += static_cast<float>(rng.normal(0.0, params.noise_std));
        }

        double cloud_fraction = 0.0;
        if (params.cloud_probability > 0 && rng.bernoulli(params.cloud_probability)) {
            PlaneU8 clouded = PlaneU8::Zero(lr.height, lr.width);
            const int disks = static_cast<int>(rng.uniform_int(1, params.max_cloud_disks));
            for (int d = 0; d < disks; ++d) {
                const double cx = rng.uniform(lr.origin_x, lr.max_x());
                const double cy = rng.uniform(lr.origin_y, lr.max_y());
                const double radius =
                    rng.uniform(params.cloud_radius_min_m, params.cloud_radius_max_m);
                const double r2 = radius * radius;
                for (int r = 0; r < lr.height; ++r) {
                    const double dy = lr.center_y(r) - cy;
                    for (int c = 0; c < lr.width; ++c) {
                        const double dx = lr.center_x(c) - cx;
                        if (dx * dx + dy * dy <= r2) clouded(r, c) = 1;
                    }
                }
            }
            for (auto& band : f.image.bands)
                band = (clouded != std::uint8_t{0})
                           .select(PlaneF::Constant(lr.height, lr.width,
                                                    static_cast<float>(params.cloud_value)),
                                   band);
            cloud_fraction = static_cast<double>((clouded != std::uint8_t{0}).count()) /
                             static_cast<double>(lr.pixel_count());
        }

        // 5-day cadence centered on the anchor.
        const double offset_days = (j - (params.frame_count - 1) / 2.0) * 5.0;
        f.meta.timestamp =
            params.anchor_time + static_cast<UtcTime>(std::llround(offset_days * kSecondsPerDay));
        f.meta.cloud_fraction = cloud_fraction;
        f.meta.nodata_count = f.image.nodata_count();
        char sid[32];
        std::snprintf(sid, sizeof(sid), "synth_%02d", j);
        f.meta.source_id = sid;
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<Transect> make_transects(const SceneParams& params, int count) {
    params.validate();
    const GeoGrid grid = params.hr_grid();
    const Centerline line{params, grid};
    const double extent = line.run_extent();
    const double half_length =
        params.river_width_m * 0.75 + 4.0 * params.hr_pixel_size;

    std::vector<Transect> out;
    for (int k = 0; k < count; ++k) {
        const double frac =
            count == 1 ? 0.5 : 0.2 + 0.6 * static_cast<double>(k) / (count - 1);
        const double u = frac * extent;
        const auto center = line.point(u);
        const auto tan = line.tangent(u);
        Transect t;
        char tid[16];
        std::snprintf(tid, sizeof(tid), "t%02d", k);
        t.id = tid;
        t.center_x = center[0];
        t.center_y = center[1];
        t.normal_x = tan[1];
        t.normal_y = -tan[0];
        t.half_length = half_length;
        t.truth_width_m = params.river_width_m;
        // Stations whose segment leaves the extent are dropped rather
        // than clipped; a clipped transect would undercount.
        const double xs[2] = {t.x0(), t.x1()};
        const double ys[2] = {t.y0(), t.y1()};
        bool inside = true;
        for (int e = 0; e < 2; ++e)
            inside = inside && xs[e] >= grid.origin_x && xs[e] <= grid.max_x() &&
                     ys[e] >= grid.origin_y && ys[e] <= grid.max_y();
        if (inside) out.push_back(std::move(t));
    }
    return out;
}

std::vector<double> analytic_widths(const SceneParams& params,
                                    const std::vector<Transect>& transects) {
    params.validate();
    const GeoGrid grid = params.hr_grid();
    const Centerline line{params, grid};
    const double step = params.hr_pixel_size / 8.0;
    const double extent = line.run_extent();

    std::vector<double> widths;
    widths.reserve(transects.size());
    for (const Transect& t : transects) {
        t.validate();
        // Locate the nearest centerline station, then check the transect
        // is perpendicular there.
        const auto d2_at = [&](double u) {
            const auto pt = line.point(u);
            const double dx = pt[0] - t.center_x, dy = pt[1] - t.center_y;
            return dx * dx + dy * dy;
        };
        double best_u = 0.0, best_d2 = std::numeric_limits<double>::infinity();
        for (double u = 0.0; u <= extent; u += step) {
            const double d2 = d2_at(u);
            if (d2 < best_d2) {
                best_d2 = d2;
                best_u = u;
            }
        }
        // Ternary refinement inside the bracketing step so the tangent is
        // taken at the true foot point, not at the scan resolution.
        double lo = std::max(0.0, best_u - step), hi = std::min(extent, best_u + step);
        for (int it = 0; it < 60; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (d2_at(m1) < d2_at(m2)) hi = m2; else lo = m1;
        }
        best_u = 0.5 * (lo + hi);
        const auto tan = line.tangent(best_u);
        const double along = std::abs(t.normal_x * tan[0] + t.normal_y * tan[1]);
        if (along > 1e-3)
            throw ContractError("transect " + t.id +
                                " is not perpendicular to the centerline (|cos| = " +
                                std::to_string(along) + ")");
        widths.push_back(params.river_width_m);
    }
    return widths;
}

namespace {

std::vector<double> band_pattern(const std::vector<double>& base, int channels) {
    std::vector<double> out(static_cast<std::size_t>(channels));
    for (int b = 0; b < channels; ++b)
        out[static_cast<std::size_t>(b)] =
            base[static_cast<std::size_t>(b) % base.size()] + 0.005 * (b / 4);
    return out;
}

}  // namespace

DatasetManifest generate_dataset(const GenerateConfig& config, const fs::path& out_dir) {
    if (config.scenes < 1) throw ContractError("generate_dataset: scenes must be >= 1");
    fs::create_directories(out_dir / "scenes");
    const UtcTime anchor = parse_iso8601("2022-06-15T00:00:00");

    DatasetManifest manifest;
    manifest.window_days = 61;
    manifest.frames_per_scene = config.frames;
    manifest.channels = config.channels;
    manifest.root = out_dir;

    // Split thresholds on i%10 keep splits interleaved and deterministic.
    const int t_train = static_cast<int>(std::lround(config.train_fraction * 10.0));
    const int t_val = t_train + static_cast<int>(std::lround(config.val_fraction * 10.0));

    SceneParams base;
    base.hr_size = config.hr_size;
    base.hr_pixel_size = config.hr_pixel_size;
    base.downsample_factor = config.factor;
    base.frame_count = config.frames;
    base.noise_std = config.noise_std;
    base.cloud_probability = config.cloud_probability;
    base.max_subpixel_shift = config.max_subpixel_shift;
    base.anchor_time = anchor;
    base.water_mean = band_pattern(base.water_mean, config.channels);
    base.water_std = band_pattern(std::vector<double>(4, 0.02), config.channels);
    base.land_mean = band_pattern(base.land_mean, config.channels);
    base.land_std = band_pattern(std::vector<double>(4, 0.02), config.channels);

    for (int i = 0; i < config.scenes; ++i) {
        SceneParams p = base;
        p.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i), 0);
        Rng geom(derive_seed(config.seed, static_cast<std::uint64_t>(i), 1));
        p.river_width_m = geom.uniform(config.width_min_m, config.width_max_m);
        p.curvature_amplitude_m = geom.uniform(0.0, config.amplitude_max_m);
        p.curvature_period_m = geom.uniform(config.period_min_m, config.period_max_m);
        p.curvature_phase = geom.uniform(0.0, kTwoPi);
        p.vertical = geom.bernoulli(0.5);
        const double extent = config.hr_size * config.hr_pixel_size;
        p.center_offset_m = geom.uniform(-0.15, 0.15) * extent;

        const HrScene hr =
            generate_hr_scene(p, derive_seed(config.seed, static_cast<std::uint64_t>(i), 2));
        SceneSeries series;
        char sid[32];
        std::snprintf(sid, sizeof(sid), "scene_%04d", i);
        series.scene_id = sid;
        series.anchor_time = anchor;
        series.hr_label = hr.mask;
        series.frames = degrade_to_lr_stack(
            hr.image, p, derive_seed(config.seed, static_cast<std::uint64_t>(i), 3));
        series.validate();

        const std::vector<Transect> transects =
            make_transects(p, config.transects_per_scene);
        const fs::path dir = out_dir / "scenes" / sid;
        save_scene(dir, series, &hr.image, transects);

        SceneEntry entry;
        entry.scene_id = sid;
        entry.split = i % 10 < t_train ? "train" : (i % 10 < t_val ? "val" : "test");
        entry.dir = (fs::path("scenes") / sid).generic_string();
        entry.anchor = anchor;
        manifest.scenes.push_back(std::move(entry));
    }
    save_manifest(out_dir / "manifest.json", manifest);
    manifest.validate();
    return manifest;
}

}  // namespace rivo
