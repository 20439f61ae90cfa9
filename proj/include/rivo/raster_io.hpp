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

#include <filesystem>
#include <optional>
#include <string>

#include "rivo/raster.hpp"
#include "rivo/time_utils.hpp"

namespace rivo {

// Canonical on-disk raster format (documented in docs/FORMATS.md):
//   <base>.bin   raw little-endian float32, band-major C x H x W, each band
//                row-major
//   <base>.meta  UTF-8 "key: value" lines (grid, band count, kind, optional
//                acquisition metadata)
//   <base>.mask  packed nodata bitmap, bit i = pixel (i / W, i % W), MSB
//                first within each byte, plane zero-padded to a whole byte;
//                written for kind multiband only
// GeoTIFF import (read_geotiff) is a convenience reader, never canonical.

/// Acquisition metadata carried in a frame's .meta sidecar.
struct FrameInfo {
    std::optional<UtcTime> timestamp;
    std::optional<double> cloud_fraction;
    std::string source_id;
};

void write_raster(const std::filesystem::path& base, const MultibandImage& img,
                  const FrameInfo* info = nullptr);
void write_raster(const std::filesystem::path& base, const BinaryMask& mask);
void write_raster(const std::filesystem::path& base, const LogitMap& logits);

MultibandImage read_multiband(const std::filesystem::path& base, FrameInfo* info = nullptr);
BinaryMask read_mask(const std::filesystem::path& base);
LogitMap read_logits(const std::filesystem::path& base);

/// Kind recorded in a .meta sidecar ("multiband", "mask", "logit").
std::string read_raster_kind(const std::filesystem::path& base);

/// Minimal GeoTIFF import: uncompressed striped TIFF, one or more samples
/// per pixel, 32-bit float or 8/16-bit unsigned, grid taken from the
/// ModelPixelScale + ModelTiepoint tags when present. Anything else is
/// rejected with IoError.
MultibandImage read_geotiff(const std::filesystem::path& path);

}  // namespace rivo
