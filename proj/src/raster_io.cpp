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

#include "rivo/raster_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace rivo {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + p.string());
}

void write_bin(const fs::path& p, const std::vector<float>& data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + p.string());
}

std::vector<char> read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open: " + p.string());
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<char> data(static_cast<std::size_t>(size));
    in.read(data.data(), size);
    if (!in) throw IoError("read failed: " + p.string());
    return data;
}

std::map<std::string, std::string> parse_meta(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open: " + p.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw IoError("bad meta line '" + line + "' in " + p.string());
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 1);
        const auto ltrim = value.find_first_not_of(" \t");
        value = ltrim == std::string::npos ? "" : value.substr(ltrim);
        while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
        kv[key] = value;
    }
    return kv;
}

const std::string& require_key(const std::map<std::string, std::string>& kv,
                               const std::string& key, const fs::path& p) {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("missing key '" + key + "' in " + p.string());
    return it->second;
}

struct MetaCore {
    GeoGrid grid;
    int bands;
    std::string kind;
};

MetaCore read_meta_core(const fs::path& meta_path,
                        std::map<std::string, std::string>& kv) {
    kv = parse_meta(meta_path);
    MetaCore core;
    core.kind = require_key(kv, "kind", meta_path);
    core.grid = GeoGrid(std::stod(require_key(kv, "origin_x", meta_path)),
                        std::stod(require_key(kv, "origin_y", meta_path)),
                        std::stod(require_key(kv, "pixel_size", meta_path)),
                        std::stoi(require_key(kv, "width", meta_path)),
                        std::stoi(require_key(kv, "height", meta_path)));
    core.bands = std::stoi(require_key(kv, "bands", meta_path));
    if (core.bands < 1) throw IoError("bad band count in " + meta_path.string());
    return core;
}

std::string meta_text(const GeoGrid& g, int bands, const std::string& kind,
                      const FrameInfo* info) {
    std::ostringstream out;
    out << "format: rivolution-raster-v1\n";
    out << "kind: " << kind << "\n";
    out << "width: " << g.width << "\n";
    out << "height: " << g.height << "\n";
    out << "bands: " << bands << "\n";
    out << "origin_x: " << fmt_double(g.origin_x) << "\n";
    out << "origin_y: " << fmt_double(g.origin_y) << "\n";
    out << "pixel_size: " << fmt_double(g.pixel_size) << "\n";
    if (info) {
        if (info->timestamp) out << "timestamp: " << format_iso8601(*info->timestamp) << "\n";
        if (info->cloud_fraction)
            out << "cloud_fraction: " << fmt_double(*info->cloud_fraction) << "\n";
        if (!info->source_id.empty()) out << "source_id: " << info->source_id << "\n";
    }
    return out.str();
}

std::vector<float> collect_planes(const std::vector<PlaneF>& planes) {
    std::vector<float> data;
    const std::size_t plane_size =
        planes.empty() ? 0 : static_cast<std::size_t>(planes[0].size());
    data.reserve(planes.size() * plane_size);
    for (const auto& p : planes)
        data.insert(data.end(), p.data(), p.data() + p.size());
    return data;
}

void write_mask_bitmap(const fs::path& p, const PlaneU8& nodata) {
    const std::size_t n = static_cast<std::size_t>(nodata.size());
    std::string bytes((n + 7) / 8, '\0');
    const std::uint8_t* src = nodata.data();  // row-major
    for (std::size_t i = 0; i < n; ++i)
        if (src[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
    write_file(p, bytes);
}

PlaneU8 read_mask_bitmap(const fs::path& p, int height, int width) {
    const auto bytes = read_all(p);
    const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    if (bytes.size() != (n + 7) / 8)
        throw IoError("nodata bitmap size mismatch in " + p.string());
    PlaneU8 out(height, width);
    std::uint8_t* dst = out.data();
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (7 - i % 8)) & 1u;
    return out;
}

std::vector<PlaneF> read_planes(const fs::path& bin_path, int bands, int height, int width) {
    const auto raw = read_all(bin_path);
    const std::size_t expect = static_cast<std::size_t>(bands) * height * width * sizeof(float);
    if (raw.size() != expect)
        throw IoError("array size mismatch in " + bin_path.string() + ": got " +
                      std::to_string(raw.size()) + " bytes, expected " + std::to_string(expect));
    std::vector<PlaneF> planes;
    planes.reserve(static_cast<std::size_t>(bands));
    const float* src = reinterpret_cast<const float*>(raw.data());
    for (int b = 0; b < bands; ++b) {
        PlaneF p(height, width);
        std::copy(src, src + static_cast<std::size_t>(height) * width, p.data());
        src += static_cast<std::size_t>(height) * width;
        planes.push_back(std::move(p));
    }
    return planes;
}

}  // namespace

void write_raster(const fs::path& base, const MultibandImage& img, const FrameInfo* info) {
    img.validate();
    write_file(fs::path(base).concat(".meta"),
               meta_text(img.grid, img.channels(), "multiband", info));
    write_bin(fs::path(base).concat(".bin"), collect_planes(img.bands));
    write_mask_bitmap(fs::path(base).concat(".mask"), img.nodata);
}

void write_raster(const fs::path& base, const BinaryMask& mask) {
    mask.validate();
    write_file(fs::path(base).concat(".meta"), meta_text(mask.grid, 1, "mask", nullptr));
    PlaneF values = mask.values.cast<float>();
    write_bin(fs::path(base).concat(".bin"), collect_planes({values}));
}

void write_raster(const fs::path& base, const LogitMap& logits) {
    logits.validate();
    write_file(fs::path(base).concat(".meta"), meta_text(logits.grid, 1, "logit", nullptr));
    write_bin(fs::path(base).concat(".bin"), collect_planes({logits.values}));
}

MultibandImage read_multiband(const fs::path& base, FrameInfo* info) {
    std::map<std::string, std::string> kv;
    const fs::path meta_path = fs::path(base).concat(".meta");
    const MetaCore core = read_meta_core(meta_path, kv);
    if (core.kind != "multiband")
        throw IoError("expected kind multiband, got '" + core.kind + "' in " + meta_path.string());
    MultibandImage img;
    img.grid = core.grid;
    img.bands = read_planes(fs::path(base).concat(".bin"), core.bands, core.grid.height,
                            core.grid.width);
    img.nodata = read_mask_bitmap(fs::path(base).concat(".mask"), core.grid.height,
                                  core.grid.width);
    if (info) {
        if (auto it = kv.find("timestamp"); it != kv.end())
            info->timestamp = parse_iso8601(it->second);
        if (auto it = kv.find("cloud_fraction"); it != kv.end())
            info->cloud_fraction = std::stod(it->second);
        if (auto it = kv.find("source_id"); it != kv.end()) info->source_id = it->second;
    }
    img.validate();
    return img;
}

BinaryMask read_mask(const fs::path& base) {
    std::map<std::string, std::string> kv;
    const fs::path meta_path = fs::path(base).concat(".meta");
    const MetaCore core = read_meta_core(meta_path, kv);
    if (core.kind != "mask")
        throw IoError("expected kind mask, got '" + core.kind + "' in " + meta_path.string());
    const auto planes = read_planes(fs::path(base).concat(".bin"), 1, core.grid.height,
                                    core.grid.width);
    BinaryMask mask(core.grid);
    mask.values = (planes[0] != 0.0f).cast<std::uint8_t>();
    mask.validate();
    return mask;
}

LogitMap read_logits(const fs::path& base) {
    std::map<std::string, std::string> kv;
    const fs::path meta_path = fs::path(base).concat(".meta");
    const MetaCore core = read_meta_core(meta_path, kv);
    if (core.kind != "logit")
        throw IoError("expected kind logit, got '" + core.kind + "' in " + meta_path.string());
    LogitMap lm(core.grid);
    lm.values = read_planes(fs::path(base).concat(".bin"), 1, core.grid.height,
                            core.grid.width)[0];
    lm.validate();
    return lm;
}

std::string read_raster_kind(const fs::path& base) {
    std::map<std::string, std::string> kv;
    return read_meta_core(fs::path(base).concat(".meta"), kv).kind;
}

}  // namespace rivo
