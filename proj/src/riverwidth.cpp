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

#include "rivo/riverwidth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "rivo/errors.hpp"
#include "rivo/strings.hpp"

namespace rivo {

void Transect::validate() const {
    const double norm = std::sqrt(normal_x * normal_x + normal_y * normal_y);
    if (std::abs(norm - 1.0) > 1e-9)
        throw ContractError("transect " + id + ": normal is not unit length (|n| = " +
                            fmt_g(norm) + ")");
    if (!(half_length > 0.0))
        throw ContractError("transect " + id + ": half_length must be > 0");
}

namespace {

// Parameter interval of the segment p0 + t*d inside the slab [lo, hi]
// along one axis. Degenerate axis (d == 0) yields the full line or
// nothing.
bool slab_interval(double p0, double d, double lo, double hi, double& a, double& b) {
    if (d == 0.0) {
        if (p0 < lo || p0 > hi) return false;
        a = -std::numeric_limits<double>::infinity();
        b = std::numeric_limits<double>::infinity();
        return true;
    }
    a = (lo - p0) / d;
    b = (hi - p0) / d;
    if (a > b) std::swap(a, b);
    return true;
}

}  // namespace

std::vector<CellSpan> traverse_spans(const Transect& t, const GeoGrid& grid) {
    t.validate();
    grid.validate();
    const double p0x = t.x0(), p0y = t.y0();
    const double dx = t.x1() - p0x, dy = t.y1() - p0y;
    const double ps = grid.pixel_size;

    // Candidate cells: segment bounding box padded by one cell, clipped
    // to the grid. The interval test rejects non-intersecting cells.
    const auto cell_of = [&](double coord, double origin) {
        return static_cast<long>(std::floor((coord - origin) / ps));
    };
    long c_lo = cell_of(std::min(p0x, p0x + dx), grid.origin_x) - 1;
    long c_hi = cell_of(std::max(p0x, p0x + dx), grid.origin_x) + 1;
    long r_lo = cell_of(std::min(p0y, p0y + dy), grid.origin_y) - 1;
    long r_hi = cell_of(std::max(p0y, p0y + dy), grid.origin_y) + 1;
    c_lo = std::max(c_lo, 0L);
    r_lo = std::max(r_lo, 0L);
    c_hi = std::min(c_hi, static_cast<long>(grid.width) - 1);
    r_hi = std::min(r_hi, static_cast<long>(grid.height) - 1);

    std::vector<CellSpan> spans;
    for (long r = r_lo; r <= r_hi; ++r) {
        const double ylo = grid.origin_y + static_cast<double>(r) * ps;
        const double yhi = grid.origin_y + static_cast<double>(r + 1) * ps;
        double ay, by;
        if (!slab_interval(p0y, dy, ylo, yhi, ay, by)) continue;
        for (long c = c_lo; c <= c_hi; ++c) {
            const double xlo = grid.origin_x + static_cast<double>(c) * ps;
            const double xhi = grid.origin_x + static_cast<double>(c + 1) * ps;
            double ax, bx;
            if (!slab_interval(p0x, dx, xlo, xhi, ax, bx)) continue;
            const double a = std::max(ax, ay);
            const double b = std::min(bx, by);
            if (a > b) continue;
            const double lo = std::max(a, 0.0);
            const double hi = std::min(b, 1.0);
            // Intersect with the open segment (0,1): either a proper
            // sub-interval or a single interior graze point.
            const bool proper = lo < hi;
            const bool graze = lo == hi && lo > 0.0 && lo < 1.0;
            if (!proper && !graze) continue;
            spans.push_back({static_cast<int>(r), static_cast<int>(c), lo, hi});
        }
    }
    std::sort(spans.begin(), spans.end(), [](const CellSpan& u, const CellSpan& v) {
        const double mu = 0.5 * (u.t_in + u.t_out);
        const double mv = 0.5 * (v.t_in + v.t_out);
        if (mu != mv) return mu < mv;
        if (u.row != v.row) return u.row < v.row;
        return u.col < v.col;
    });
    return spans;
}

std::vector<std::pair<int, int>> traverse_cells(const Transect& t, const GeoGrid& grid) {
    std::vector<std::pair<int, int>> cells;
    for (const CellSpan& s : traverse_spans(t, grid)) cells.emplace_back(s.row, s.col);
    return cells;
}

WidthMeasurement estimate_width(const BinaryMask& mask, const Transect& t,
                                bool geometric_correction) {
    WidthMeasurement m;
    m.transect_id = t.id;
    m.truth_width_m = t.truth_width_m;
    const std::vector<CellSpan> spans = traverse_spans(t, mask.grid);
    if (spans.empty()) {
        m.valid = false;
        return m;
    }
    const double segment_length = 2.0 * t.half_length;
    double chord_sum = 0.0;
    for (const CellSpan& s : spans) {
        if (mask.values(s.row, s.col) == 0) continue;
        ++m.water_pixel_count;
        chord_sum += (s.t_out - s.t_in) * segment_length;
    }
    m.predicted_width_m = geometric_correction
                              ? chord_sum
                              : static_cast<double>(m.water_pixel_count) * mask.grid.pixel_size;
    return m;
}

std::vector<WidthMeasurement> widths_for_scene(const BinaryMask& mask,
                                               const std::vector<Transect>& transects,
                                               bool geometric_correction) {
    std::vector<WidthMeasurement> out;
    out.reserve(transects.size());
    for (const Transect& t : transects) {
        try {
            out.push_back(estimate_width(mask, t, geometric_correction));
        } catch (const std::exception&) {
            WidthMeasurement bad;
            bad.transect_id = t.id;
            bad.truth_width_m = t.truth_width_m;
            bad.valid = false;
            out.push_back(bad);
        }
    }
    return out;
}

std::vector<Transect> read_transects(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transects file: " + path.string());
    std::vector<Transect> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::vector<std::string> tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 6 && tok.size() != 7)
            throw IoError(path.string() + ":" + std::to_string(lineno) +
                          ": expected 6 or 7 fields, got " + std::to_string(tok.size()));
        Transect t;
        try {
            t.id = tok[0];
            t.center_x = std::stod(tok[1]);
            t.center_y = std::stod(tok[2]);
            t.normal_x = std::stod(tok[3]);
            t.normal_y = std::stod(tok[4]);
            t.half_length = std::stod(tok[5]);
            if (tok.size() == 7) t.truth_width_m = std::stod(tok[6]);
        } catch (const std::exception&) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
        t.validate();
        out.push_back(std::move(t));
    }
    return out;
}

void write_transects(const std::filesystem::path& path, const std::vector<Transect>& transects) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write transects file: " + path.string());
    out << "# id center_x center_y normal_x normal_y half_length_m [truth_width_m]\n";
    for (const Transect& t : transects) {
        out << t.id << ' ' << fmt_g(t.center_x) << ' ' << fmt_g(t.center_y) << ' '
            << fmt_g(t.normal_x) << ' ' << fmt_g(t.normal_y) << ' ' << fmt_g(t.half_length);
        if (t.truth_width_m) out << ' ' << fmt_g(*t.truth_width_m);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_width_csv(const std::filesystem::path& path,
                     const std::vector<WidthMeasurement>& measurements) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write width csv: " + path.string());
    out << "transect_id,predicted_width_m,truth_width_m,water_pixel_count,valid\n";
    for (const WidthMeasurement& m : measurements) {
        out << m.transect_id << ',' << fmt_g(m.predicted_width_m) << ',';
        if (m.truth_width_m) out << fmt_g(*m.truth_width_m);
        out << ',' << m.water_pixel_count << ',' << (m.valid ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace rivo
