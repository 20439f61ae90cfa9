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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rivo/riverwidth.hpp"
#include "rivo/rng.hpp"
#include "support/width_oracle.hpp"

using namespace rivo;

namespace {

Transect make_transect(double cx, double cy, double nx, double ny, double half,
                       std::string id = "t") {
    Transect t;
    t.id = std::move(id);
    t.center_x = cx;
    t.center_y = cy;
    const double n = std::hypot(nx, ny);
    t.normal_x = nx / n;
    t.normal_y = ny / n;
    t.half_length = half;
    return t;
}

BinaryMask random_mask(const GeoGrid& grid, double water_prob, Rng& rng) {
    BinaryMask mask(grid);
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c)
            mask.values(r, c) = rng.bernoulli(water_prob) ? 1 : 0;
    return mask;
}

}  // namespace

TEST_CASE("transect validation") {
    Transect t = make_transect(0, 0, 1, 0, 5);
    t.validate();
    t.normal_x = 0.5;  // no longer unit length
    CHECK_THROWS_AS(t.validate(), ContractError);
    t = make_transect(0, 0, 3, 4, 5);
    t.validate();
    t.half_length = 0.0;
    CHECK_THROWS_AS(t.validate(), ContractError);
}

TEST_CASE("axis-aligned transect with endpoints on pixel centers") {
    // Endpoints land on the centers of the outermost cells, which are
    // therefore crossed: half_length k*ps spans exactly 2k+1 cells.
    GeoGrid grid{0.0, 0.0, 1.0, 11, 11};
    BinaryMask water(grid);
    water.values.setConstant(1);
    for (int k = 1; k <= 4; ++k) {
        const auto m = estimate_width(water, make_transect(5.5, 5.5, 1, 0, k));
        CHECK(m.valid);
        CHECK(m.water_pixel_count == 2 * k + 1);
        CHECK(m.predicted_width_m == static_cast<double>(2 * k + 1));
    }
}

TEST_CASE("braided channels sum along the transect") {
    // Water runs of 3 and 2 cells along the row; everything else land.
    GeoGrid grid{0.0, 0.0, 2.0, 10, 10};
    BinaryMask mask(grid);
    for (int c = 1; c <= 3; ++c) mask.values(4, c) = 1;
    for (int c = 6; c <= 7; ++c) mask.values(4, c) = 1;
    const auto m = estimate_width(mask, make_transect(10.0, 9.0, 1, 0, 10.0));
    CHECK(m.valid);
    CHECK(m.water_pixel_count == 5);
    CHECK(m.predicted_width_m == 5 * grid.pixel_size);
}

TEST_CASE("cells grazed at a single corner are counted") {
    // Segment (0,0)->(6,8) passes exactly through the lattice corner
    // (3,4). Cells (3,3) and (4,2) touch the segment only at that point;
    // both count. Proper crossings: x = 1..5 and y = 1..7 give 11
    // distinct interior crossings (t = 1/2 shared), so 12 cells, plus
    // the 2 corner grazes.
    GeoGrid grid{0.0, 0.0, 1.0, 10, 10};
    BinaryMask water(grid);
    water.values.setConstant(1);
    const Transect t = make_transect(3.0, 4.0, 0.6, 0.8, 5.0);
    const auto cells = traverse_cells(t, grid);
    CHECK(cells.size() == 14);
    const auto has = [&](int r, int c) {
        return std::find(cells.begin(), cells.end(), std::make_pair(r, c)) != cells.end();
    };
    CHECK(has(3, 3));
    CHECK(has(4, 2));
    CHECK(estimate_width(water, t).water_pixel_count == 14);
    CHECK(rivo_test::brute_force_count(water, t) == 14);
}

TEST_CASE("cells touched only at a segment endpoint do not count") {
    // Endpoint at the lattice corner (4,4): the four cells meeting there
    // are touched at t=1 only, which the open segment excludes. The
    // segment runs from (0,4) to (4,4) along the row boundary y=4,
    // crossing the two cell rows on both sides of it.
    GeoGrid grid{0.0, 0.0, 1.0, 10, 10};
    const Transect t = make_transect(2.0, 4.0, 1, 0, 2.0);
    const auto cells = traverse_cells(t, grid);
    for (const auto& [r, c] : cells) CHECK(c <= 3);
    BinaryMask water(grid);
    water.values.setConstant(1);
    CHECK(estimate_width(water, t).water_pixel_count ==
          rivo_test::brute_force_count(water, t));
}

TEST_CASE("all-land transect is valid with zero width") {
    GeoGrid grid{0.0, 0.0, 1.0, 8, 8};
    BinaryMask mask(grid);  // all land
    const auto m = estimate_width(mask, make_transect(4.0, 4.0, 0, 1, 3.0));
    CHECK(m.valid);
    CHECK(m.predicted_width_m == 0.0);
}

TEST_CASE("off-image transects are flagged invalid, not fatal") {
    GeoGrid grid{0.0, 0.0, 1.0, 8, 8};
    BinaryMask water(grid);
    water.values.setConstant(1);
    std::vector<Transect> transects;
    for (int i = 0; i < 9; ++i)
        transects.push_back(make_transect(4.0, 0.5 + 0.8 * i, 1, 0, 2.0, "t" + std::to_string(i)));
    transects.push_back(make_transect(100.0, 100.0, 1, 0, 2.0, "off"));
    const auto measurements = widths_for_scene(water, transects);
    REQUIRE(measurements.size() == 10);
    int valid = 0;
    for (const auto& m : measurements) valid += m.valid ? 1 : 0;
    CHECK(valid == 9);
    CHECK_FALSE(measurements.back().valid);
    CHECK(measurements.back().water_pixel_count == 0);
}

TEST_CASE("width never decreases when water is added") {
    Rng rng(123);
    GeoGrid grid{0.0, 0.0, 1.0, 16, 16};
    for (int trial = 0; trial < 50; ++trial) {
        BinaryMask base = random_mask(grid, 0.3, rng);
        BinaryMask more = base;
        for (int r = 0; r < grid.height; ++r)
            for (int c = 0; c < grid.width; ++c)
                if (rng.bernoulli(0.2)) more.values(r, c) = 1;
        const Transect t = make_transect(rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0),
                                         rng.normal(), rng.normal(), rng.uniform(1.0, 12.0));
        const auto a = estimate_width(base, t);
        const auto b = estimate_width(more, t);
        CHECK(b.predicted_width_m >= a.predicted_width_m);
    }
}

TEST_CASE("oracle equivalence on random masks and transects") {
    // Smaller-N version of the exhaustive acceptance property.
    Rng rng(2026);
    const double pixel_sizes[] = {0.5, 1.0, 3.0, 12.0};
    const double water_probs[] = {0.1, 0.5, 0.9};
    int checked = 0;
    for (int trial = 0; trial < 250; ++trial) {
        const double ps = pixel_sizes[trial % 4];
        const int w = static_cast<int>(rng.uniform_int(6, 20));
        const int h = static_cast<int>(rng.uniform_int(6, 20));
        const GeoGrid grid{rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0), ps, w, h};
        BinaryMask mask = random_mask(grid, water_probs[trial % 3], rng);
        // Centers mostly inside, sometimes near or past the border.
        const double cx = grid.origin_x + rng.uniform(-0.2, 1.2) * grid.extent_x();
        const double cy = grid.origin_y + rng.uniform(-0.2, 1.2) * grid.extent_y();
        double nx = rng.normal(), ny = rng.normal();
        if (nx == 0.0 && ny == 0.0) nx = 1.0;
        const Transect t = make_transect(cx, cy, nx, ny,
                                         rng.uniform(0.3, 1.5) * grid.extent_x(),
                                         "p" + std::to_string(trial));
        const auto m = estimate_width(mask, t);
        CHECK(m.water_pixel_count == rivo_test::brute_force_count(mask, t));
        CHECK(m.valid == !rivo_test::oracle_cells(t, grid).empty());
        ++checked;
    }
    CHECK(checked == 250);
}

TEST_CASE("axis-aligned transects on rational grids stay exact") {
    // Pixel size 1/3 exercises parameters that are not machine numbers.
    Rng rng(77);
    GeoGrid grid{0.25, -1.0 / 3.0, 1.0 / 3.0, 15, 15};
    for (int trial = 0; trial < 60; ++trial) {
        BinaryMask mask = random_mask(grid, 0.5, rng);
        const bool horizontal = trial % 2 == 0;
        const Transect t = make_transect(
            grid.origin_x + rng.uniform(0.0, grid.extent_x()),
            grid.origin_y + rng.uniform(0.0, grid.extent_y()),
            horizontal ? 1.0 : 0.0, horizontal ? 0.0 : 1.0, rng.uniform(0.5, 4.0));
        CHECK(estimate_width(mask, t).water_pixel_count ==
              rivo_test::brute_force_count(mask, t));
    }
}

TEST_CASE("coarser grids measure within one coarse pixel per edge") {
    // Solid vertical river of width 24 m on a 3 m grid, majority-voted
    // down to 12 m. The same transect agrees within factor * ps_hr.
    const int factor = 4;
    GeoGrid hr{0.0, 0.0, 3.0, 32, 32};
    BinaryMask mask_hr(hr);
    const double left = 36.0, right = 60.0;
    for (int r = 0; r < hr.height; ++r)
        for (int c = 0; c < hr.width; ++c) {
            const double x = hr.center_x(c);
            if (x > left && x < right) mask_hr.values(r, c) = 1;
        }
    GeoGrid lr{0.0, 0.0, 12.0, 8, 8};
    BinaryMask mask_lr(lr);
    for (int r = 0; r < lr.height; ++r)
        for (int c = 0; c < lr.width; ++c) {
            int water = 0;
            for (int dr = 0; dr < factor; ++dr)
                for (int dc = 0; dc < factor; ++dc)
                    water += mask_hr.values(r * factor + dr, c * factor + dc);
            mask_lr.values(r, c) = water * 2 >= factor * factor ? 1 : 0;
        }
    const Transect t = make_transect(48.0, 50.0, 1, 0, 45.0);
    const auto wide = estimate_width(mask_hr, t);
    const auto coarse = estimate_width(mask_lr, t);
    CHECK(wide.predicted_width_m == 24.0);
    CHECK(std::abs(coarse.predicted_width_m - wide.predicted_width_m) <=
          factor * hr.pixel_size);
}

TEST_CASE("geometric correction removes the diagonal bias") {
    GeoGrid grid{0.0, 0.0, 1.0, 10, 10};
    BinaryMask water(grid);
    water.values.setConstant(1);
    const Transect t = make_transect(3.0, 4.0, 0.6, 0.8, 5.0);
    const auto counted = estimate_width(water, t, false);
    const auto geometric = estimate_width(water, t, true);
    // Count-based overshoots the 10 m chord on a diagonal; chord-summed
    // length equals the in-grid portion exactly.
    CHECK(counted.predicted_width_m == 14.0);
    CHECK(geometric.predicted_width_m == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("transect file round-trip and width csv") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rivo_width_io_test";
    fs::create_directories(dir);
    const fs::path tf = dir / "transects.txt";
    {
        std::ofstream out(tf);
        out << "# station list\n";
        out << "a 10.5 20.25 1 0 30\n";
        out << "\n";
        out << "b 4 4 0.6 0.8 12.5 21.75\n";
    }
    const auto transects = read_transects(tf);
    REQUIRE(transects.size() == 2);
    CHECK(transects[0].id == "a");
    CHECK(transects[0].half_length == 30.0);
    CHECK_FALSE(transects[0].truth_width_m.has_value());
    CHECK(transects[1].truth_width_m == doctest::Approx(21.75));
    CHECK(transects[1].normal_x == doctest::Approx(0.6));

    const fs::path back = dir / "again.txt";
    write_transects(back, transects);
    const auto reread = read_transects(back);
    REQUIRE(reread.size() == 2);
    CHECK(reread[1].truth_width_m == doctest::Approx(21.75));
    CHECK(reread[0].center_y == transects[0].center_y);

    GeoGrid grid{0.0, 0.0, 1.0, 40, 40};
    BinaryMask water(grid);
    water.values.setConstant(1);
    const auto ms = widths_for_scene(water, transects);
    const fs::path csv = dir / "widths.csv";
    write_width_csv(csv, ms);
    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);  // header + 2 measurements

    CHECK_THROWS_AS(read_transects(dir / "missing.txt"), IoError);
    {
        std::ofstream bad(dir / "bad.txt");
        bad << "x 0 0 1 0\n";  // missing half_length
    }
    CHECK_THROWS_AS(read_transects(dir / "bad.txt"), IoError);
    fs::remove_all(dir);
}
