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

// Minimal GeoTIFF import. Convenience reader only: little-endian,
// uncompressed, striped, chunky planar configuration, float32 or
// uint8/uint16 samples. The canonical raster format is the .bin/.meta/.mask
// triple in raster_io.cpp.

#include <cstring>
#include <fstream>
#include <vector>

#include "rivo/raster_io.hpp"

namespace rivo {

namespace {

struct Reader {
    std::vector<char> data;

    template <typename T>
    T at(std::size_t offset) const {
        if (offset + sizeof(T) > data.size()) throw IoError("TIFF: truncated file");
        T v;
        std::memcpy(&v, data.data() + offset, sizeof(T));
        return v;
    }
};

struct Entry {
    std::uint16_t tag = 0;
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint32_t value_or_offset = 0;
};

constexpr std::size_t type_size(std::uint16_t type) {
    switch (type) {
        case 1: return 1;   // BYTE
        case 3: return 2;   // SHORT
        case 4: return 4;   // LONG
        case 12: return 8;  // DOUBLE
        default: return 0;
    }
}

std::vector<double> entry_values(const Reader& r, const Entry& e) {
    const std::size_t sz = type_size(e.type);
    if (sz == 0) throw IoError("TIFF: unsupported tag type " + std::to_string(e.type));
    const std::size_t total = sz * e.count;
    std::size_t offset;
    if (total <= 4) {
        // Inline values live in the value field itself.
        offset = 0;
    } else {
        offset = e.value_or_offset;
    }
    std::vector<double> out(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
        const std::size_t pos = offset + i * sz;
        if (total <= 4) {
            char raw[4];
            std::memcpy(raw, &e.value_or_offset, 4);
            if (e.type == 3) {
                std::uint16_t v;
                std::memcpy(&v, raw + pos, 2);
                out[i] = v;
            } else if (e.type == 4) {
                std::uint32_t v;
                std::memcpy(&v, raw + pos, 4);
                out[i] = v;
            } else if (e.type == 1) {
                out[i] = static_cast<unsigned char>(raw[pos]);
            } else {
                throw IoError("TIFF: inline double not supported");
            }
        } else {
            if (e.type == 3) out[i] = r.at<std::uint16_t>(pos);
            else if (e.type == 4) out[i] = r.at<std::uint32_t>(pos);
            else if (e.type == 12) out[i] = r.at<double>(pos);
            else if (e.type == 1) out[i] = r.at<std::uint8_t>(pos);
        }
    }
    return out;
}

}  // namespace

MultibandImage read_geotiff(const std::filesystem::path& path) {
    Reader r;
    {
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        if (!in) throw IoError("cannot open: " + path.string());
        r.data.resize(static_cast<std::size_t>(in.tellg()));
        in.seekg(0);
        in.read(r.data.data(), static_cast<std::streamsize>(r.data.size()));
    }
    if (r.data.size() < 8) throw IoError("TIFF: file too small: " + path.string());
    if (r.data[0] == 'M' && r.data[1] == 'M')
        throw IoError("TIFF: big-endian files not supported: " + path.string());
    if (!(r.data[0] == 'I' && r.data[1] == 'I' && r.at<std::uint16_t>(2) == 42))
        throw IoError("TIFF: bad magic: " + path.string());

    const std::uint32_t ifd = r.at<std::uint32_t>(4);
    const std::uint16_t n_entries = r.at<std::uint16_t>(ifd);
    std::uint32_t width = 0, height = 0, samples = 1, compression = 1, planar = 1;
    std::uint32_t rows_per_strip = 0xffffffffu;
    std::uint32_t bits = 0, sample_format = 1;
    std::vector<double> strip_offsets, strip_counts, pixel_scale, tiepoint;

    for (std::uint16_t i = 0; i < n_entries; ++i) {
        const std::size_t pos = ifd + 2 + i * 12u;
        Entry e{r.at<std::uint16_t>(pos), r.at<std::uint16_t>(pos + 2),
                r.at<std::uint32_t>(pos + 4), r.at<std::uint32_t>(pos + 8)};
        switch (e.tag) {
            case 256: width = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 257: height = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 258: bits = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 259: compression = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 273: strip_offsets = entry_values(r, e); break;
            case 277: samples = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 278: rows_per_strip = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 279: strip_counts = entry_values(r, e); break;
            case 284: planar = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 339: sample_format = static_cast<std::uint32_t>(entry_values(r, e)[0]); break;
            case 33550: pixel_scale = entry_values(r, e); break;
            case 33922: tiepoint = entry_values(r, e); break;
            default: break;
        }
    }
    if (width == 0 || height == 0) throw IoError("TIFF: missing dimensions: " + path.string());
    if (compression != 1) throw IoError("TIFF: compressed files not supported: " + path.string());
    if (planar != 1) throw IoError("TIFF: planar configuration 2 not supported: " + path.string());
    if (strip_offsets.empty()) throw IoError("TIFF: missing strip offsets: " + path.string());
    const bool is_float = sample_format == 3 && bits == 32;
    const bool is_u8 = sample_format == 1 && bits == 8;
    const bool is_u16 = sample_format == 1 && bits == 16;
    if (!is_float && !is_u8 && !is_u16)
        throw IoError("TIFF: only float32/uint8/uint16 samples supported: " + path.string());

    GeoGrid grid;
    if (pixel_scale.size() >= 2 && tiepoint.size() >= 6) {
        if (std::abs(pixel_scale[0] - pixel_scale[1]) > 1e-9 * pixel_scale[0])
            throw IoError("TIFF: non-square pixels not supported: " + path.string());
        grid = GeoGrid(tiepoint[3], tiepoint[4], pixel_scale[0], static_cast<int>(width),
                       static_cast<int>(height));
    } else {
        grid = GeoGrid(0.0, 0.0, 1.0, static_cast<int>(width), static_cast<int>(height));
    }

    MultibandImage img(grid, static_cast<int>(samples));
    const std::size_t bytes_per_sample = bits / 8;
    std::uint32_t row = 0;
    for (std::size_t s = 0; s < strip_offsets.size() && row < height; ++s) {
        const std::uint32_t strip_rows =
            std::min<std::uint32_t>(rows_per_strip, height - row);
        std::size_t pos = static_cast<std::size_t>(strip_offsets[s]);
        const std::size_t need = static_cast<std::size_t>(strip_rows) * width * samples * bytes_per_sample;
        if (s < strip_counts.size() && static_cast<std::size_t>(strip_counts[s]) < need)
            throw IoError("TIFF: strip shorter than expected: " + path.string());
        for (std::uint32_t sr = 0; sr < strip_rows; ++sr, ++row) {
            for (std::uint32_t c = 0; c < width; ++c) {
                for (std::uint32_t b = 0; b < samples; ++b) {
                    float v;
                    if (is_float) v = r.at<float>(pos);
                    else if (is_u8) v = r.at<std::uint8_t>(pos);
                    else v = r.at<std::uint16_t>(pos);
                    pos += bytes_per_sample;
                    img.bands[b](static_cast<int>(row), static_cast<int>(c)) = v;
                }
            }
        }
    }
    if (row != height) throw IoError("TIFF: strips cover only " + std::to_string(row) + " of " +
                                     std::to_string(height) + " rows: " + path.string());
    return img;
}

}  // namespace rivo
