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

#include <algorithm>

#include "rivo/fusion.hpp"
#include "rivo/rng.hpp"

using namespace rivo;

namespace {

const GeoGrid kLr{0.0, 0.0, 12.0, 8, 8};
const GeoGrid kHr{0.0, 0.0, 3.0, 32, 32};

Frame random_frame(const GeoGrid& grid, int channels, UtcTime ts, Rng& rng) {
    Frame f;
    f.image = MultibandImage(grid, channels);
    for (auto& b : f.image.bands)
        for (int r = 0; r < grid.height; ++r)
            for (int c = 0; c < grid.width; ++c) b(r, c) = static_cast<float>(rng.normal());
    f.meta.timestamp = ts;
    f.meta.source_id = "synthetic";
    return f;
}

std::vector<Frame> random_stack(int m, Rng& rng) {
    std::vector<Frame> frames;
    for (int j = 0; j < m; ++j) frames.push_back(random_frame(kLr, 3, 1000 * (j + 1), rng));
    return frames;
}

double max_rel_diff(const PlaneF& a, const PlaneF& b) {
    const double scale = std::max({1e-12, static_cast<double>(a.cwiseAbs().maxCoeff()),
                                   static_cast<double>(b.cwiseAbs().maxCoeff())});
    return static_cast<double>((a - b).cwiseAbs().maxCoeff()) / scale;
}

}  // namespace

TEST_CASE("single-frame fusion collapses to the plain pipeline") {
    Rng rng(31);
    SegModel<float> model(3, 2, rng);
    const std::vector<Frame> one = {random_frame(kLr, 3, 42, rng)};

    SUBCASE("input upsampling equals model(Up(x)) bitwise") {
        const LogitMap fused = predict_input_upsampling(model, one, kHr);
        const LogitMap direct = forward(model, bilinear_upsample(one[0].image, kHr));
        CHECK((fused.values == direct.values).all());
    }
    SUBCASE("output upsampling equals Up(model(x)) bitwise") {
        const LogitMap fused = predict_output_upsampling(model, one, kHr);
        const LogitMap direct = bilinear_upsample(forward(model, one[0].image), kHr);
        CHECK((fused.values == direct.values).all());
    }
    SUBCASE("super resolution equals model(g(X)) bitwise") {
        const NaiveMeanSr sr;
        const LogitMap fused = predict_super_resolution(model, sr, one, kHr);
        const LogitMap direct = forward(model, naive_mfsr(one, kHr));
        CHECK((fused.values == direct.values).all());
    }
}

TEST_CASE("fused logits are invariant to frame order") {
    Rng rng(32);
    SegModel<float> model(3, 2, rng);
    std::vector<Frame> frames = random_stack(6, rng);
    const NaiveMeanSr sr;
    const FusionStrategy strategies[] = {
        {StrategyKind::input_upsampling, &model, nullptr, 0.5},
        {StrategyKind::output_upsampling, &model, nullptr, 0.5},
        {StrategyKind::super_resolution, &model, &sr, 0.5},
    };
    for (const auto& strategy : strategies) {
        const LogitMap base = predict_logits(strategy, frames, kHr);
        std::vector<Frame> shuffled = frames;
        std::reverse(shuffled.begin(), shuffled.end());
        std::swap(shuffled[1], shuffled[3]);
        const LogitMap again = predict_logits(strategy, shuffled, kHr);
        INFO(to_string(strategy.kind));
        CHECK(max_rel_diff(base.values, again.values) <= 1e-6);
    }
}

TEST_CASE("upsampling commutes with the logit mean") {
    Rng rng(33);
    SegModel<float> model(3, 2, rng);
    const std::vector<Frame> frames = random_stack(5, rng);

    // Up(mean_j f(x_j)) computed by hand.
    LogitMap mean_lr(kLr);
    mean_lr.values.setZero();
    for (const Frame& f : frames) mean_lr.values += forward(model, f.image).values;
    mean_lr.values /= static_cast<float>(frames.size());
    const LogitMap up_of_mean = bilinear_upsample(mean_lr, kHr);

    // mean_j Up(f(x_j)) is what the fusion path computes.
    const LogitMap mean_of_up = predict_output_upsampling(model, frames, kHr);
    CHECK(max_rel_diff(up_of_mean.values, mean_of_up.values) <= 1e-6);
}

TEST_CASE("naive mean super resolution averages valid frames per pixel") {
    std::vector<Frame> frames;
    Frame a, b;
    a.image = MultibandImage(kLr, 2);
    b.image = MultibandImage(kLr, 2);
    for (auto& band : a.image.bands) band.setConstant(1.0f);
    for (auto& band : b.image.bands) band.setConstant(3.0f);
    a.meta.timestamp = 1;
    b.meta.timestamp = 2;
    frames = {a, b};

    SUBCASE("both valid everywhere: the mean") {
        const MultibandImage fused = naive_mfsr(frames, kHr);
        CHECK(fused.grid == kHr);
        CHECK(fused.channels() == 2);
        for (const auto& band : fused.bands) {
            CHECK(band.minCoeff() == 2.0f);
            CHECK(band.maxCoeff() == 2.0f);
        }
        CHECK_FALSE(fused.any_nodata());
    }
    SUBCASE("one frame fully invalid: the other carries the pixel") {
        frames[1].image.nodata.setConstant(1);
        const MultibandImage fused = naive_mfsr(frames, kHr);
        CHECK(fused.bands[0].minCoeff() == 1.0f);
        CHECK(fused.bands[0].maxCoeff() == 1.0f);
        CHECK_FALSE(fused.any_nodata());
    }
    SUBCASE("all frames invalid: zero with the nodata flag") {
        frames[0].image.nodata.setConstant(1);
        frames[1].image.nodata.setConstant(1);
        const MultibandImage fused = naive_mfsr(frames, kHr);
        CHECK((fused.nodata == std::uint8_t{1}).all());
        CHECK(fused.bands[0].cwiseAbs().maxCoeff() == 0.0f);
    }
}

TEST_CASE("predict dispatch records the strategy and frame count") {
    Rng rng(34);
    SegModel<float> model(3, 2, rng);
    const std::vector<Frame> frames = random_stack(4, rng);
    const NaiveMeanSr sr;
    for (const StrategyKind kind : {StrategyKind::input_upsampling,
                                    StrategyKind::output_upsampling,
                                    StrategyKind::super_resolution}) {
        FusionStrategy strategy{kind, &model, &sr, 0.5};
        PredictTrace trace;
        const LogitMap logits = predict_logits(strategy, frames, kHr, &trace);
        CHECK(trace.dispatched == kind);
        CHECK(trace.frames_used == 4);
        CHECK(logits.grid == kHr);
    }
}

TEST_CASE("fusion contract violations") {
    Rng rng(35);
    SegModel<float> model(3, 2, rng);
    const NaiveMeanSr sr;
    std::vector<Frame> frames = random_stack(3, rng);

    CHECK_THROWS_AS(predict_input_upsampling(model, {}, kHr), ContractError);

    FusionStrategy no_model{StrategyKind::input_upsampling, nullptr, nullptr, 0.5};
    CHECK_THROWS_AS(predict_logits(no_model, frames, kHr), ContractError);

    FusionStrategy no_sr{StrategyKind::super_resolution, &model, nullptr, 0.5};
    CHECK_THROWS_AS(predict_logits(no_sr, frames, kHr), ContractError);

    SUBCASE("mixed frame grids") {
        frames[1].image = random_frame(GeoGrid{0, 0, 12.0, 7, 8}, 3, 5, rng).image;
        CHECK_THROWS_AS(predict_input_upsampling(model, frames, kHr), AlignmentError);
    }
    SUBCASE("sr front end must return the requested grid") {
        class WrongGridSr final : public SrModel {
          public:
            MultibandImage fuse(const std::vector<Frame>& frames_,
                                const GeoGrid&) const override {
                return frames_.front().image;  // still on the LR grid
            }
            std::string name() const override { return "wrong-grid"; }
        };
        const WrongGridSr bad;
        CHECK_THROWS_AS(predict_super_resolution(model, bad, frames, kHr), ContractError);
    }
}

TEST_CASE("strategy names round-trip") {
    for (const StrategyKind kind : {StrategyKind::input_upsampling,
                                    StrategyKind::output_upsampling,
                                    StrategyKind::super_resolution}) {
        CHECK(parse_strategy(to_string(kind)) == kind);
    }
    CHECK(parse_strategy("input_upsampling") == StrategyKind::input_upsampling);
    CHECK_THROWS_AS(parse_strategy("bilinear"), ContractError);
}
