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

#include "rivo/resample.hpp"
#include "rivo/riverwidth.hpp"
#include "rivo/synth.hpp"

using namespace rivo;
namespace fs = std::filesystem;

namespace {

SceneParams straight_params() {
    SceneParams p;
    p.hr_size = 64;
    p.hr_pixel_size = 3.0;
    p.downsample_factor = 4;
    p.river_width_m = 36.0;
    p.curvature_amplitude_m = 0.0;
    p.vertical = true;
    p.frame_count = 4;
    return p;
}

}  // namespace

TEST_CASE("straight vertical river matches the analytic column band") {
    const SceneParams p = straight_params();
    const HrScene scene = generate_hr_scene(p, 7);
    const GeoGrid g = p.hr_grid();
    const double cross_center = g.origin_x + 0.5 * g.extent_x();
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
            const bool expected =
                std::abs(g.center_x(c) - cross_center) <= p.river_width_m / 2.0;
            CHECK(scene.mask.values(r, c) == (expected ? 1 : 0));
        }
    }
    // 36 m at 3 m/px: every row carries exactly 12 water pixels.
    for (int r = 0; r < g.height; ++r) {
        CHECK(scene.mask.values.row(r).cast<int>().sum() == 12);
    }
    CHECK_FALSE(scene.centerline.empty());
}

TEST_CASE("center offset moves the river sideways") {
    SceneParams p = straight_params();
    p.center_offset_m = 12.0;  // 4 HR pixels
    const HrScene moved = generate_hr_scene(p, 7);
    const HrScene centered = generate_hr_scene(straight_params(), 7);
    for (int r = 0; r < moved.mask.grid.height; ++r)
        for (int c = 4; c < moved.mask.grid.width; ++c)
            CHECK(moved.mask.values(r, c) == centered.mask.values(r, c - 4));
}

TEST_CASE("scene generation is deterministic in the seed") {
    SceneParams p = straight_params();
    p.curvature_amplitude_m = 10.0;
    const HrScene a = generate_hr_scene(p, 11);
    const HrScene b = generate_hr_scene(p, 11);
    CHECK((a.mask.values == b.mask.values).all());
    for (int band = 0; band < p.bands(); ++band)
        CHECK((a.image.bands[static_cast<std::size_t>(band)] ==
               b.image.bands[static_cast<std::size_t>(band)])
                  .all());
    const HrScene c = generate_hr_scene(p, 12);
    bool any_diff = false;
    for (int band = 0; band < p.bands(); ++band)
        any_diff = any_diff || !(a.image.bands[static_cast<std::size_t>(band)] ==
                                 c.image.bands[static_cast<std::size_t>(band)])
                                    .all();
    CHECK(any_diff);

    const auto stack_a = degrade_to_lr_stack(a.image, p, 21);
    const auto stack_b = degrade_to_lr_stack(a.image, p, 21);
    REQUIRE(stack_a.size() == stack_b.size());
    for (std::size_t j = 0; j < stack_a.size(); ++j) {
        CHECK((stack_a[j].image.bands[0] == stack_b[j].image.bands[0]).all());
        CHECK(stack_a[j].meta.cloud_fraction == stack_b[j].meta.cloud_fraction);
    }
}

TEST_CASE("degenerate degradation is exactly block downsampling") {
    SceneParams p = straight_params();
    p.max_subpixel_shift = 0.0;
    p.noise_std = 0.0;
    p.cloud_probability = 0.0;
    const HrScene scene = generate_hr_scene(p, 3);
    const auto frames = degrade_to_lr_stack(scene.image, p, 5);
    REQUIRE(frames.size() == 4);
    const MultibandImage reference = block_downsample(scene.image, p.downsample_factor);
    for (const Frame& f : frames) {
        CHECK(f.image.grid == p.lr_grid());
        for (int b = 0; b < p.bands(); ++b)
            CHECK((f.image.bands[static_cast<std::size_t>(b)] ==
                   reference.bands[static_cast<std::size_t>(b)])
                      .all());
        CHECK(f.meta.cloud_fraction == 0.0);
    }
    // 5-day cadence centered on the anchor, ascending.
    CHECK(frames[1].meta.timestamp - frames[0].meta.timestamp == 5 * kSecondsPerDay);
    CHECK(frames[3].meta.timestamp - frames[0].meta.timestamp == 15 * kSecondsPerDay);
}

TEST_CASE("cloud metadata records the exact clouded fraction") {
    SceneParams p = straight_params();
    p.cloud_probability = 1.0;
    p.noise_std = 0.0;
    p.max_subpixel_shift = 0.0;
    const HrScene scene = generate_hr_scene(p, 13);
    const auto frames = degrade_to_lr_stack(scene.image, p, 17);
    const float cloud = static_cast<float>(p.cloud_value);
    for (const Frame& f : frames) {
        CHECK(f.meta.cloud_fraction > 0.0);
        // Clouds overwrite every band with the constant cloud value, so a
        // recount from band 0 reproduces the stored fraction exactly.
        const auto clouded = (f.image.bands[0] == cloud);
        const double recount = static_cast<double>(clouded.count()) /
                               static_cast<double>(f.image.grid.pixel_count());
        CHECK(f.meta.cloud_fraction == recount);
        CHECK(f.image.nodata_count() == 0);  // clouds are values, not nodata
    }
}

TEST_CASE("transects are perpendicular stations with the true width attached") {
    SceneParams p = straight_params();
    p.curvature_amplitude_m = 9.0;
    p.curvature_period_m = 150.0;
    const auto transects = make_transects(p, 5);
    REQUIRE(transects.size() == 5);
    for (const Transect& t : transects) {
        t.validate();
        CHECK(t.truth_width_m == p.river_width_m);
        CHECK(t.half_length >= p.river_width_m);
    }
    const auto widths = analytic_widths(p, transects);
    REQUIRE(widths.size() == 5);
    for (const double w : widths) CHECK(w == p.river_width_m);

    SUBCASE("non-perpendicular transects violate the contract") {
        auto skewed = transects;
        skewed[0].normal_x = 0.0;
        skewed[0].normal_y = 1.0;  // along a vertical river, not across it
        CHECK_THROWS_AS(analytic_widths(p, skewed), ContractError);
    }
}

TEST_CASE("measured width on the generated mask approaches the analytic width") {
    SceneParams p = straight_params();
    p.curvature_amplitude_m = 6.0;
    const HrScene scene = generate_hr_scene(p, 19);
    const auto transects = make_transects(p, 5);
    for (const Transect& t : transects) {
        // Chord length through the water: one rasterized pixel per bank.
        const auto geo = estimate_width(scene.mask, t, /*geometric_correction=*/true);
        CHECK(geo.valid);
        CHECK(std::abs(geo.predicted_width_m - p.river_width_m) <= 2.0 * p.hr_pixel_size);
        // Cell counting pays the supercover obliquity factor |nx| + |ny|.
        const auto cells = estimate_width(scene.mask, t);
        CHECK(cells.valid);
        const double l1 = std::abs(t.normal_x) + std::abs(t.normal_y);
        CHECK(std::abs(cells.predicted_width_m - p.river_width_m * l1) <=
              2.0 * p.hr_pixel_size);
    }
}

TEST_CASE("parameter validation rejects degenerate scenes") {
    SceneParams p = straight_params();
    p.river_width_m = 0.0;
    CHECK_THROWS_AS(p.validate(), ContractError);
    p = straight_params();
    p.downsample_factor = 3;  // 64 not divisible
    CHECK_THROWS_AS(p.validate(), ContractError);
    p = straight_params();
    p.water_std.pop_back();
    CHECK_THROWS_AS(p.validate(), ContractError);
}

TEST_CASE("generate_dataset writes an interleaved, loadable corpus") {
    const fs::path out = fs::temp_directory_path() / "rivo_synth_dataset_test";
    fs::remove_all(out);

    GenerateConfig config;
    config.scenes = 20;
    config.hr_size = 32;
    config.frames = 3;
    config.channels = 4;
    config.transects_per_scene = 3;
    config.cloud_probability = 0.5;
    config.seed = 123;

    const DatasetManifest manifest = generate_dataset(config, out);
    manifest.validate();
    CHECK(manifest.scenes.size() == 20);
    CHECK(manifest.split("train").size() == 12);
    CHECK(manifest.split("val").size() == 4);
    CHECK(manifest.split("test").size() == 4);
    CHECK(manifest.channels == 4);
    CHECK(fs::exists(out / "manifest.json"));

    const SceneEntry& e = manifest.scenes.front();
    const LoadedScene scene = load_scene(manifest.scene_dir(e), e.scene_id, 3, e.anchor);
    CHECK(scene.series.frames.size() == 3);
    CHECK(scene.series.channels() == 4);
    CHECK(scene.series.hr_label.grid.width == 32);
    CHECK(scene.series.lr_grid().width == 8);
    CHECK(scene.transects.size() == 3);
    for (const auto& t : scene.transects) CHECK(t.truth_width_m.has_value());

    // Same config, fresh directory: identical masks (generation is pure).
    const fs::path out2 = fs::temp_directory_path() / "rivo_synth_dataset_test2";
    fs::remove_all(out2);
    const DatasetManifest again = generate_dataset(config, out2);
    const LoadedScene scene2 =
        load_scene(again.scene_dir(again.scenes.front()), again.scenes.front().scene_id, 3,
                   again.scenes.front().anchor);
    CHECK((scene2.series.hr_label.values == scene.series.hr_label.values).all());
    CHECK((scene2.series.frames[0].image.bands[0] ==
           scene.series.frames[0].image.bands[0])
              .all());
    fs::remove_all(out);
    fs::remove_all(out2);
}
