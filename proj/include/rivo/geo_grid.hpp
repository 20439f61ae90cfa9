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

#include <cmath>
#include <string>

#include "rivo/errors.hpp"

namespace rivo {

/// Raster geometry on a shared planar frame (meters). Square pixels.
/// Pixel (r, c) has its center at
///   (origin_x + (c + 0.5) * pixel_size, origin_y + (r + 0.5) * pixel_size),
/// so y grows with the row index and the grid's extent is
/// [origin, origin + size * pixel_size) per axis.
struct GeoGrid {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size = 1.0;  // meters per pixel
    int width = 0;            // columns
    int height = 0;           // rows

    GeoGrid() = default;
    GeoGrid(double ox, double oy, double ps, int w, int h)
        : origin_x(ox), origin_y(oy), pixel_size(ps), width(w), height(h) {
        validate();
    }

    void validate() const {
        if (!(pixel_size > 0.0)) throw ShapeError("GeoGrid: pixel_size must be > 0");
        if (width < 1 || height < 1) throw ShapeError("GeoGrid: width/height must be >= 1");
    }

    double extent_x() const { return width * pixel_size; }
    double extent_y() const { return height * pixel_size; }
    double max_x() const { return origin_x + extent_x(); }
    double max_y() const { return origin_y + extent_y(); }

    double center_x(int c) const { return origin_x + (c + 0.5) * pixel_size; }
    double center_y(int r) const { return origin_y + (r + 0.5) * pixel_size; }

    std::int64_t pixel_count() const {
        return static_cast<std::int64_t>(width) * height;
    }

    bool operator==(const GeoGrid& o) const {
        return origin_x == o.origin_x && origin_y == o.origin_y &&
               pixel_size == o.pixel_size && width == o.width && height == o.height;
    }

    std::string describe() const {
        return std::to_string(width) + "x" + std::to_string(height) + " @ " +
               std::to_string(pixel_size) + " m/px, origin (" + std::to_string(origin_x) +
               ", " + std::to_string(origin_y) + ")";
    }
};

/// Two grids are aligned iff they share the origin and cover the same
/// extent in meters (resolutions may differ).
inline bool extents_aligned(const GeoGrid& a, const GeoGrid& b, double tol_m = 1e-6) {
    return std::abs(a.origin_x - b.origin_x) <= tol_m &&
           std::abs(a.origin_y - b.origin_y) <= tol_m &&
           std::abs(a.extent_x() - b.extent_x()) <= tol_m &&
           std::abs(a.extent_y() - b.extent_y()) <= tol_m;
}

inline bool extents_overlap(const GeoGrid& a, const GeoGrid& b) {
    return a.origin_x < b.max_x() && b.origin_x < a.max_x() &&
           a.origin_y < b.max_y() && b.origin_y < a.max_y();
}

inline void require_aligned(const GeoGrid& a, const GeoGrid& b, const std::string& what) {
    if (!extents_aligned(a, b))
        throw AlignmentError(what + ": extents differ (" + a.describe() + " vs " + b.describe() + ")");
}

}  // namespace rivo
