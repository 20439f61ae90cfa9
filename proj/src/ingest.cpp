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

#include "rivo/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "rivo/errors.hpp"
#include "rivo/log.hpp"
#include "rivo/raster_io.hpp"
#include "rivo/resample.hpp"

namespace rivo {

namespace fs = std::filesystem;
using nlohmann::json;

void FrameMetadata::validate() const {
    if (cloud_fraction < 0.0 || cloud_fraction > 1.0)
        throw IngestError("frame " + source_id + ": cloud_fraction outside [0,1]: " +
                          std::to_string(cloud_fraction));
    if (nodata_count < 0)
        throw IngestError("frame " + source_id + ": negative nodata_count");
}

const GeoGrid& SceneSeries::lr_grid() const {
    if (frames.empty()) throw ContractError("scene " + scene_id + ": no frames");
    return frames.front().image.grid;
}

void SceneSeries::validate() const {
    if (frames.empty()) throw IngestError("scene " + scene_id + ": no frames");
    const GeoGrid& grid = frames.front().image.grid;
    for (const Frame& f : frames) {
        f.image.validate();
        f.meta.validate();
        if (!(f.image.grid == grid))
            throw AlignmentError("scene " + scene_id + ": frames on mixed grids");
    }
    hr_label.validate();
    if (!extents_aligned(hr_label.grid, grid))
        throw AlignmentError("scene " + scene_id + ": HR label extent differs from LR frames");
    // Ascending timestamps, except that a short series is cyclically
    // repeated: detect the cycle at the first decrease and require exact
    // repetition afterwards.
    std::size_t cycle = frames.size();
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].meta.timestamp < frames[i - 1].meta.timestamp) {
            cycle = i;
            break;
        }
    }
    for (std::size_t i = cycle; i < frames.size(); ++i) {
        if (frames[i].meta.timestamp != frames[i % cycle].meta.timestamp ||
            frames[i].meta.source_id != frames[i % cycle].meta.source_id)
            throw IngestError("scene " + scene_id + ": frames not ascending by timestamp");
    }
}

std::vector<FrameMetadata> window_filter(const std::vector<FrameMetadata>& candidates,
                                         UtcTime anchor, std::int64_t half_window_seconds) {
    std::vector<FrameMetadata> out;
    for (const FrameMetadata& m : candidates)
        if (std::llabs(m.timestamp - anchor) <= half_window_seconds) out.push_back(m);
    return out;
}

std::vector<Frame> window_filter(std::vector<Frame> candidates, UtcTime anchor,
                                 std::int64_t half_window_seconds) {
    std::vector<Frame> out;
    for (Frame& f : candidates)
        if (std::llabs(f.meta.timestamp - anchor) <= half_window_seconds)
            out.push_back(std::move(f));
    return out;
}

std::vector<Frame> select_frames(std::vector<Frame> series, int m, bool* padded) {
    if (padded) *padded = false;
    if (series.empty()) throw IngestError("select_frames: empty frame list");
    if (m < 1) throw ContractError("select_frames: m must be >= 1");

    // Priority: least nodata, then earlier timestamp, then input order.
    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const FrameMetadata& fa = series[a].meta;
        const FrameMetadata& fb = series[b].meta;
        if (fa.nodata_count != fb.nodata_count) return fa.nodata_count < fb.nodata_count;
        return fa.timestamp < fb.timestamp;
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(m), series.size());
    std::vector<std::size_t> chosen(order.begin(), order.begin() + take);
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
        if (series[a].meta.timestamp != series[b].meta.timestamp)
            return series[a].meta.timestamp < series[b].meta.timestamp;
        return a < b;
    });

    std::vector<Frame> out;
    out.reserve(static_cast<std::size_t>(m));
    for (const std::size_t idx : chosen) out.push_back(std::move(series[idx]));
    if (out.size() < static_cast<std::size_t>(m)) {
        if (padded) *padded = true;
        log_warn("select_frames: only " + std::to_string(out.size()) + " frames available, " +
                 "cyclically repeating up to m=" + std::to_string(m));
        const std::size_t base = out.size();
        for (std::size_t i = base; i < static_cast<std::size_t>(m); ++i)
            out.push_back(out[i % base]);
    }
    return out;
}

BinaryMask make_lr_label(const BinaryMask& hr_label, const GeoGrid& lr_grid) {
    require_aligned(hr_label.grid, lr_grid, "make_lr_label");
    if (hr_label.grid.height % lr_grid.height != 0 || hr_label.grid.width % lr_grid.width != 0)
        throw ShapeError("make_lr_label: HR dims not an integer multiple of LR dims");
    const int fy = hr_label.grid.height / lr_grid.height;
    const int fx = hr_label.grid.width / lr_grid.width;
    BinaryMask out(lr_grid);
    for (int r = 0; r < lr_grid.height; ++r) {
        for (int c = 0; c < lr_grid.width; ++c) {
            const long water = hr_label.values.block(r * fy, c * fx, fy, fx)
                                   .cast<long>()
                                   .sum();
            // Majority vote, exact tie resolves to water.
            out.values(r, c) = 2 * water >= fy * fx ? 1 : 0;
        }
    }
    return out;
}

namespace {

Frame read_frame(const fs::path& base) {
    FrameInfo info;
    Frame f{read_multiband(base, &info), {}};
    if (!info.timestamp)
        throw IngestError("frame " + base.string() + ": missing timestamp metadata");
    f.meta.timestamp = *info.timestamp;
    f.meta.cloud_fraction = info.cloud_fraction.value_or(0.0);
    f.meta.source_id = info.source_id.empty() ? base.stem().string() : info.source_id;
    f.meta.nodata_count = f.image.nodata_count();
    f.meta.validate();
    return f;
}

GeoGrid derive_lr_grid(const GeoGrid& hr, double lr_pixel_size) {
    const double wf = hr.extent_x() / lr_pixel_size;
    const double hf = hr.extent_y() / lr_pixel_size;
    const int w = static_cast<int>(std::lround(wf));
    const int h = static_cast<int>(std::lround(hf));
    if (w < 1 || h < 1 || std::abs(wf - w) > 1e-6 || std::abs(hf - h) > 1e-6)
        throw AlignmentError("LR pixel size " + std::to_string(lr_pixel_size) +
                             " does not tile the HR extent " + hr.describe());
    return GeoGrid(hr.origin_x, hr.origin_y, lr_pixel_size, w, h);
}

}  // namespace

SceneSeries build_scene(const fs::path& hr_label_path,
                        const std::vector<fs::path>& lr_frame_paths, UtcTime anchor,
                        const BuildConfig& config) {
    SceneSeries scene;
    scene.scene_id =
        config.scene_id.empty() ? hr_label_path.stem().string() : config.scene_id;
    scene.anchor_time = anchor;
    scene.hr_label = read_mask(hr_label_path);

    std::vector<Frame> raw;
    raw.reserve(lr_frame_paths.size());
    for (const fs::path& p : lr_frame_paths) raw.push_back(read_frame(p));
    raw = window_filter(std::move(raw), anchor,
                        static_cast<std::int64_t>(config.half_window_days) * kSecondsPerDay);
    if (raw.empty())
        throw IngestError("scene " + scene.scene_id + ": no frames within +-" +
                          std::to_string(config.half_window_days) + " days of anchor");
    std::stable_sort(raw.begin(), raw.end(), [](const Frame& a, const Frame& b) {
        return a.meta.timestamp < b.meta.timestamp;
    });
    raw = select_frames(std::move(raw), config.frames);

    const GeoGrid target =
        derive_lr_grid(scene.hr_label.grid,
                       config.lr_pixel_size.value_or(raw.front().image.grid.pixel_size));
    for (Frame& f : raw) {
        if (!(f.image.grid == target)) {
            f.image = resample_to_grid(f.image, target, ResampleMode::bilinear);
            f.meta.nodata_count = f.image.nodata_count();
        }
    }
    scene.frames = std::move(raw);
    scene.validate();
    return scene;
}

std::vector<SceneEntry> DatasetManifest::split(const std::string& name) const {
    std::vector<SceneEntry> out;
    for (const SceneEntry& e : scenes)
        if (e.split == name) out.push_back(e);
    return out;
}

void DatasetManifest::validate() const {
    std::set<std::string> seen;
    for (const SceneEntry& e : scenes) {
        if (!seen.insert(e.scene_id).second)
            throw IngestError("manifest: scene_id appears in more than one split: " + e.scene_id);
        if (e.split != "train" && e.split != "val" && e.split != "test")
            throw IngestError("manifest: unknown split '" + e.split + "' for " + e.scene_id);
        if (!fs::exists(scene_dir(e)))
            throw IngestError("manifest: scene directory missing: " + scene_dir(e).string());
    }
    if (frames_per_scene < 1) throw IngestError("manifest: frames_per_scene must be >= 1");
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("manifest parse error in " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != std::string("rivolution-manifest-v1"))
        throw IoError("manifest " + path.string() + ": unknown format tag");
    DatasetManifest m;
    m.window_days = j.value("window_days", 61);
    m.frames_per_scene = j.value("frames_per_scene", 8);
    m.channels = j.value("channels", 0);
    m.root = path.parent_path();
    for (const json& s : j.at("scenes")) {
        SceneEntry e;
        e.scene_id = s.at("scene_id").get<std::string>();
        e.split = s.at("split").get<std::string>();
        e.dir = s.at("dir").get<std::string>();
        e.anchor = parse_iso8601(s.at("anchor").get<std::string>());
        m.scenes.push_back(std::move(e));
    }
    m.validate();
    return m;
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
    json j;
    j["format"] = "rivolution-manifest-v1";
    j["window_days"] = manifest.window_days;
    j["frames_per_scene"] = manifest.frames_per_scene;
    j["channels"] = manifest.channels;
    j["scenes"] = json::array();
    for (const SceneEntry& e : manifest.scenes) {
        j["scenes"].push_back({{"scene_id", e.scene_id},
                               {"split", e.split},
                               {"dir", e.dir},
                               {"anchor", format_iso8601(e.anchor)}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

LoadedScene load_scene(const fs::path& dir, const std::string& scene_id, int m,
                       std::optional<UtcTime> anchor) {
    LoadedScene loaded;
    SceneSeries& s = loaded.series;
    s.scene_id = scene_id;
    s.hr_label = read_mask(dir / "hr_label");

    std::vector<fs::path> frame_bases;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const fs::path& p = entry.path();
        if (p.extension() == ".meta" && p.stem().string().rfind("frame_", 0) == 0)
            frame_bases.push_back(dir / p.stem());
    }
    if (frame_bases.empty()) throw IngestError("scene " + scene_id + ": no frames in " + dir.string());
    std::sort(frame_bases.begin(), frame_bases.end());
    std::vector<Frame> frames;
    frames.reserve(frame_bases.size());
    for (const fs::path& base : frame_bases) frames.push_back(read_frame(base));
    std::stable_sort(frames.begin(), frames.end(), [](const Frame& a, const Frame& b) {
        return a.meta.timestamp < b.meta.timestamp;
    });
    if (anchor) {
        s.anchor_time = *anchor;
    } else {
        s.anchor_time = frames[frames.size() / 2].meta.timestamp;
    }
    s.frames = select_frames(std::move(frames), m, &loaded.padded);
    s.validate();

    const fs::path transects = dir / "transects.txt";
    if (fs::exists(transects)) loaded.transects = read_transects(transects);
    return loaded;
}

MultibandImage load_scene_hr_image(const fs::path& dir) {
    const fs::path base = dir / "hr_image";
    if (!fs::exists(base.string() + ".meta"))
        throw IngestError("scene directory lacks hr_image (required by the hr_oracle regime): " +
                          dir.string());
    return read_multiband(base, nullptr);
}

void save_scene(const fs::path& dir, const SceneSeries& series, const MultibandImage* hr_image,
                const std::vector<Transect>& transects) {
    fs::create_directories(dir);
    write_raster(dir / "hr_label", series.hr_label);
    if (hr_image) write_raster(dir / "hr_image", *hr_image, nullptr);
    char name[32];
    for (std::size_t i = 0; i < series.frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%03zu", i);
        const Frame& f = series.frames[i];
        FrameInfo info;
        info.timestamp = f.meta.timestamp;
        info.cloud_fraction = f.meta.cloud_fraction;
        info.source_id = f.meta.source_id;
        write_raster(dir / name, f.image, &info);
    }
    if (!transects.empty()) write_transects(dir / "transects.txt", transects);
}

}  // namespace rivo
