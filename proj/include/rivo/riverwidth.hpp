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

// Transect-based river width estimation from a binary water mask.
//
// A transect is a line segment perpendicular to the river centerline at a
// predefined station. Width = (number of water pixels the open segment
// crosses) x pixel_size. All water cells along the transect count, so
// braided channels sum.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rivo/raster.hpp"

namespace rivo {

struct Transect {
    std::string id;
    double center_x = 0.0;  // map meters
    double center_y = 0.0;
    double normal_x = 0.0;  // unit vector along the transect
    double normal_y = 0.0;
    double half_length = 0.0;  // meters
    std::optional<double> truth_width_m;

    // ContractError unless the normal is unit length (1e-9) and
    // half_length > 0.
    void validate() const;

    // Segment endpoints center -+ half_length * normal.
    double x0() const { return center_x - half_length * normal_x; }
    double y0() const { return center_y - half_length * normal_y; }
    double x1() const { return center_x + half_length * normal_x; }
    double y1() const { return center_y + half_length * normal_y; }
};

struct WidthMeasurement {
    std::string transect_id;
    double predicted_width_m = 0.0;
    std::optional<double> truth_width_m;
    long water_pixel_count = 0;
    // False when the transect misses the grid entirely. Invalid
    // measurements are excluded from aggregate metrics.
    bool valid = true;
};

// One traversed cell with the parameter interval [t_in, t_out] of the
// segment (t in [0,1] from endpoint 0 to endpoint 1) spent inside the
// cell's closed square footprint.
struct CellSpan {
    int row = 0;
    int col = 0;
    double t_in = 0.0;
    double t_out = 0.0;
};

// Cells whose closed square footprint intersects the open transect
// segment, each listed once, ordered along the segment. Exact footprint
// intersection: a cell grazed at a single corner point still counts, a
// cell touched only at a segment endpoint does not. Off-grid transects
// return an empty list.
std::vector<CellSpan> traverse_spans(const Transect& t, const GeoGrid& grid);
std::vector<std::pair<int, int>> traverse_cells(const Transect& t, const GeoGrid& grid);

// Counts water cells along the transect and multiplies by pixel_size.
// With geometric_correction the in-cell chord lengths are summed instead
// of counting whole pixels; this removes the up-to-sqrt(2) bias on
// diagonal transects at the cost of departing from the plain
// count-times-resolution rule.
WidthMeasurement estimate_width(const BinaryMask& mask, const Transect& t,
                                bool geometric_correction = false);

// Maps estimate_width over the transects, attaching truth widths.
// Per-transect failures mark the measurement invalid, never abort the
// batch.
std::vector<WidthMeasurement> widths_for_scene(const BinaryMask& mask,
                                               const std::vector<Transect>& transects,
                                               bool geometric_correction = false);

// Line-oriented transects file:
//   id center_x center_y normal_x normal_y half_length_m [truth_width_m]
// Whitespace separated, '#' starts a comment, blank lines ignored.
std::vector<Transect> read_transects(const std::filesystem::path& path);
void write_transects(const std::filesystem::path& path, const std::vector<Transect>& transects);

// Measurements as CSV with a header row.
void write_width_csv(const std::filesystem::path& path,
                     const std::vector<WidthMeasurement>& measurements);

}  // namespace rivo
