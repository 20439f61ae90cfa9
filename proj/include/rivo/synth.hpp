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

// Parametric river-scene generator with known HR ground truth, degraded
// LR frame stacks, and analytic widths. The desk-scale oracle standing
// in for real satellite acquisitions.
//
// Geometry: a sinusoidal centerline runs edge to edge (vertically or
// horizontally); water is every pixel whose center lies within
// river_width_m/2 of the centerline. Degradations: sub-pixel shifts,
// block downsampling, per-band sensor noise, and opaque bright cloud
// disks. All randomness derives from a single seed.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rivo/ingest.hpp"
#include "rivo/raster.hpp"
#include "rivo/riverwidth.hpp"
#include "rivo/time_utils.hpp"

namespace rivo {

struct SceneParams {
    int hr_size = 64;            // square HR raster
    double hr_pixel_size = 3.0;  // meters per pixel
    int downsample_factor = 4;   // HR -> LR

    double river_width_m = 36.0;
    double curvature_amplitude_m = 12.0;  // sinusoid amplitude, 0 = straight
    double curvature_period_m = 150.0;
    double curvature_phase = 0.0;  // radians
    bool vertical = true;          // river runs along +y when true
    double center_offset_m = 0.0;  // centerline offset from the image center

    // Per-band class spectra (mean and std per band, equal lengths).
    std::vector<double> water_mean{0.10, 0.15, 0.12, 0.05};
    std::vector<double> water_std{0.02, 0.02, 0.02, 0.02};
    std::vector<double> land_mean{0.18, 0.22, 0.25, 0.45};
    std::vector<double> land_std{0.02, 0.02, 0.02, 0.02};

    int frame_count = 8;
    double noise_std = 0.02;          // per-frame sensor noise
    double cloud_probability = 0.0;   // chance a frame carries clouds
    double cloud_value = 0.9;         // opaque cloud reflectance, all bands
    double cloud_radius_min_m = 18.0;
    double cloud_radius_max_m = 72.0;
    int max_cloud_disks = 3;
    double max_subpixel_shift = 0.5;  // LR pixels

    UtcTime anchor_time = 0;
    std::uint64_t seed = 0;

    int bands() const { return static_cast<int>(water_mean.size()); }
    GeoGrid hr_grid() const;
    GeoGrid lr_grid() const;
    void validate() const;
};

struct HrScene {
    MultibandImage image;
    BinaryMask mask;
    std::vector<std::array<double, 2>> centerline;  // map points along the river
};

// Deterministic per (params, seed).
HrScene generate_hr_scene(const SceneParams& params, std::uint64_t seed);

// Per frame: sub-pixel shift (clamped bilinear), block downsample, sensor
// noise, cloud disks. cloud_fraction in the metadata is the exact clouded
// pixel fraction; timestamps are spaced 5 days around the anchor.
std::vector<Frame> degrade_to_lr_stack(const MultibandImage& hr_img, const SceneParams& params,
                                       std::uint64_t seed);

// Evenly spaced stations along the centerline, normals perpendicular to
// it, truth width attached. Deterministic in params.
std::vector<Transect> make_transects(const SceneParams& params, int count);

// The true band width along each transect normal: river_width_m for every
// transect. Transects not perpendicular to the local centerline are a
// contract error.
std::vector<double> analytic_widths(const SceneParams& params,
                                    const std::vector<Transect>& transects);

struct GenerateConfig {
    int scenes = 200;
    int hr_size = 64;
    double hr_pixel_size = 3.0;
    int factor = 4;
    int frames = 8;
    int channels = 4;
    double cloud_probability = 0.3;
    double noise_std = 0.02;
    double max_subpixel_shift = 0.5;
    int transects_per_scene = 5;
    double width_min_m = 9.0;
    double width_max_m = 33.0;
    double amplitude_max_m = 15.0;
    double period_min_m = 120.0;
    double period_max_m = 260.0;
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
};

// Writes scene directories plus a manifest under out_dir and returns the
// manifest. Scene geometry varies per scene; splits interleave
// deterministically.
DatasetManifest generate_dataset(const GenerateConfig& config,
                                 const std::filesystem::path& out_dir);

}  // namespace rivo
