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

// Scene assembly: pair an HR label with its LR time series, apply the
// temporal window, select the least-cloudy frames, and co-register onto
// one LR grid. Also the dataset manifest with split discipline.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rivo/raster.hpp"
#include "rivo/riverwidth.hpp"
#include "rivo/time_utils.hpp"

namespace rivo {

struct FrameMetadata {
    UtcTime timestamp = 0;
    double cloud_fraction = 0.0;  // in [0,1], read from metadata, never computed
    long nodata_count = 0;
    std::string source_id;

    void validate() const;
};

struct Frame {
    MultibandImage image;
    FrameMetadata meta;
};

// One training/eval unit: m LR frames plus one HR binary label over the
// same map extent. Frames are ascending by timestamp; when fewer than m
// real frames existed they are cyclically repeated, so the sequence is
// ascending per cycle.
struct SceneSeries {
    std::string scene_id;
    std::vector<Frame> frames;
    BinaryMask hr_label;
    UtcTime anchor_time = 0;

    int channels() const { return frames.empty() ? 0 : frames.front().image.channels(); }
    const GeoGrid& lr_grid() const;
    void validate() const;
};

// Frames with |timestamp - anchor| <= half_window, order preserved.
std::vector<FrameMetadata> window_filter(const std::vector<FrameMetadata>& candidates,
                                         UtcTime anchor, std::int64_t half_window_seconds);
std::vector<Frame> window_filter(std::vector<Frame> candidates, UtcTime anchor,
                                 std::int64_t half_window_seconds);

// The m frames with the smallest nodata_count (ties to the earlier
// timestamp), returned in ascending timestamp order. Fewer than m frames
// are cyclically repeated earliest-first up to length m; *padded is set
// and a warning logged. Empty input is an ingestion error.
std::vector<Frame> select_frames(std::vector<Frame> series, int m, bool* padded = nullptr);

// Majority vote of HR label pixels within each LR cell footprint; exact
// ties resolve to water.
BinaryMask make_lr_label(const BinaryMask& hr_label, const GeoGrid& lr_grid);

struct BuildConfig {
    int half_window_days = 61;  // "two months"
    int frames = 8;             // m
    std::optional<double> lr_pixel_size;  // default: first windowed frame's
    std::string scene_id;
};

// Windows, selects, and co-registers raw frames against the HR label.
// The LR grid shares the label's origin and extent.
SceneSeries build_scene(const std::filesystem::path& hr_label_path,
                        const std::vector<std::filesystem::path>& lr_frame_paths, UtcTime anchor,
                        const BuildConfig& config);

struct SceneEntry {
    std::string scene_id;
    std::string split;  // train | val | test
    std::string dir;    // relative to the manifest file
    UtcTime anchor = 0;
};

struct DatasetManifest {
    int window_days = 61;
    int frames_per_scene = 8;
    int channels = 0;
    std::vector<SceneEntry> scenes;
    std::filesystem::path root;  // directory of the manifest file, not serialized

    std::vector<SceneEntry> split(const std::string& name) const;
    std::filesystem::path scene_dir(const SceneEntry& e) const { return root / e.dir; }
    // Duplicate scene_ids across entries or missing scene dirs are errors.
    void validate() const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// Scene directory layout:
//   hr_label.{bin,meta}        binary label, HR grid
//   hr_image.{bin,meta,mask}   clean HR multispectral image (synthetic
//                              scenes only; required by the hr_oracle
//                              training regime)
//   frame_NNN.{bin,meta,mask}  LR frames; .mask is the nodata bitmap
//   transects.txt              width measurement sites with truth widths
struct LoadedScene {
    SceneSeries series;
    std::vector<Transect> transects;
    bool padded = false;
};

// Anchor defaults to the median frame timestamp when absent.
LoadedScene load_scene(const std::filesystem::path& dir, const std::string& scene_id, int m,
                       std::optional<UtcTime> anchor = std::nullopt);
MultibandImage load_scene_hr_image(const std::filesystem::path& dir);

void save_scene(const std::filesystem::path& dir, const SceneSeries& series,
                const MultibandImage* hr_image, const std::vector<Transect>& transects);

}  // namespace rivo
