#include <doctest.h>

#include <cmath>
#include <limits>

#include "sslt/dataset.hpp"
#include "sslt/tracker.hpp"
#include "support.hpp"

using namespace sslt;

namespace {

SynthConfig moving_target(int frames, MotionStep step) {
    SynthConfig c;
    c.name = "moving";
    c.frame_count = frames;
    c.width = 200;
    c.height = 160;
    c.polygon = {{-18, 0}, {-10, -12}, {10, -12}, {18, 0}, {10, 12}, {-10, 12}};
    c.start_cx = 70;
    c.start_cy = 70;
    c.motion = {step};
    c.noise_sigma = 0.0;
    return c;
}

std::pair<int, int> argmax(const ScalarMap& m) {
    int bx = 0, by = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m(x, y) > m(bx, by)) bx = x, by = y;
    return {bx, by};
}

std::size_t dominant_bin(const std::vector<ScalarMap>& hog) {
    std::vector<double> energy(hog.size(), 0.0);
    for (std::size_t b = 0; b < hog.size(); ++b)
        for (double v : hog[b].data()) energy[b] += v;
    return static_cast<std::size_t>(std::max_element(energy.begin(), energy.end()) - energy.begin());
}

}  // namespace

TEST_CASE("hog of a constant patch is zero") {
    const auto hog = extract_hog(ScalarMap(16, 12, 0.4), 4, 9);
    REQUIRE(hog.size() == 9);
    for (const auto& ch : hog) {
        CHECK(ch.width() == 4);
        CHECK(ch.height() == 3);
        for (double v : ch.data()) CHECK(v == 0.0);
    }
}

TEST_CASE("hog orientation of step edges") {
    ScalarMap vertical_edge(24, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 12; x < 24; ++x) vertical_edge(x, y) = 1.0;
    ScalarMap horizontal_edge(24, 24);
    for (int y = 12; y < 24; ++y)
        for (int x = 0; x < 24; ++x) horizontal_edge(x, y) = 1.0;

    const auto hv = extract_hog(vertical_edge, 4, 8);
    const auto hh = extract_hog(horizontal_edge, 4, 8);
    CHECK(dominant_bin(hv) == 0);
    CHECK(dominant_bin(hh) == 4);
}

TEST_CASE("rotating a patch by 90 degrees shifts the dominant bin by half the bins") {
    ScalarMap p(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) p(x, y) = 0.5 + 0.5 * std::sin(0.6 * x + 0.25 * y);
    ScalarMap r(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) r(x, y) = p(y, 19 - x);
    const std::size_t a = dominant_bin(extract_hog(p, 4, 8));
    const std::size_t b = dominant_bin(extract_hog(r, 4, 8));
    CHECK((a + 4) % 8 == b);
}

TEST_CASE("hog argument checks") {
    CHECK_THROWS(extract_hog(ScalarMap(8, 8), 0, 9));
    CHECK_THROWS(extract_hog(ScalarMap(8, 8), 4, 0));
}

TEST_CASE("training response peaks at the target center") {
    const auto [seq, gt] = render_synthetic(moving_target(2, {}));
    const TrackerState st = track_init(seq.frames[0], gt.boxes[0]);
    const auto [px, py] = argmax(response_map(st, seq.frames[0]));
    CHECK(std::abs(px - st.cells_x / 2) <= 1);
    CHECK(std::abs(py - st.cells_y / 2) <= 1);
}

TEST_CASE("huge regularization drives the response to zero") {
    const auto [seq, gt] = render_synthetic(moving_target(2, {}));
    TrackerConfig cfg;
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-2, 1e4, 1e10}) {
        cfg.lambda = lambda;
        const ScalarMap r = response_map(track_init(seq.frames[0], gt.boxes[0], cfg), seq.frames[0]);
        double peak = 0.0;
        for (double v : r.data()) peak = std::max(peak, std::abs(v));
        CHECK(peak < previous);
        previous = peak;
    }
    CHECK(previous < 1e-6);
}

TEST_CASE("tracker init is deterministic") {
    const auto [seq, gt] = render_synthetic(moving_target(2, {}));
    const TrackerState a = track_init(seq.frames[0], gt.boxes[0]);
    const TrackerState b = track_init(seq.frames[0], gt.boxes[0]);
    REQUIRE(a.numerator.size() == b.numerator.size());
    for (std::size_t i = 0; i < a.numerator.size(); ++i) CHECK(a.numerator[i] == b.numerator[i]);
    CHECK(a.denominator == b.denominator);
}

TEST_CASE("stepping on the training frame stays put") {
    const auto [seq, gt] = render_synthetic(moving_target(2, {}));
    TrackerState st = track_init(seq.frames[0], gt.boxes[0]);
    const Box b = track_step(st, seq.frames[0]);
    CHECK(center_distance(b, gt.boxes[0]) <= 1.0);
}

TEST_CASE("translation is followed") {
    const auto [seq, gt] = render_synthetic(moving_target(40, {1.5, 0.75, 0.0, 1.0}));
    TrackerState st = track_init(seq.frames[0], gt.boxes[0]);
    double err = 0.0;
    for (std::size_t t = 1; t < seq.size(); ++t) err += center_distance(track_step(st, seq.frames[t]), gt.boxes[t]);
    CHECK(err / (seq.size() - 1) < 3.0);
}

TEST_CASE("a single-entry scale pool freezes the box size") {
    SynthConfig c = moving_target(20, {0.0, 0.0, 0.0, 1.02});
    const auto [seq, gt] = render_synthetic(c);
    TrackerConfig cfg;
    cfg.scale_pool = {1.0};
    TrackerState st = track_init(seq.frames[0], gt.boxes[0], cfg);
    for (std::size_t t = 1; t < seq.size(); ++t) {
        const Box b = track_step(st, seq.frames[t]);
        CHECK(b.w == doctest::Approx(gt.boxes[0].w).epsilon(1e-12));
        CHECK(b.h == doctest::Approx(gt.boxes[0].h).epsilon(1e-12));
    }
}

TEST_CASE("tracker input errors") {
    Image frame(100, 80, 3, 0.5);
    CHECK_THROWS_AS(track_init(frame, {10, 10, 2, 20}), std::invalid_argument);
    CHECK_THROWS_AS(track_init(frame, {150, 10, 20, 20}), std::invalid_argument);

    TrackerConfig bad;
    bad.padding = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.scale_pool = {};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("non-finite frames raise a tracker error") {
    const auto [seq, gt] = render_synthetic(moving_target(2, {}));
    TrackerState st = track_init(seq.frames[0], gt.boxes[0]);
    Image poisoned = seq.frames[1];
    for (auto& v : poisoned.data()) v = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(track_step(st, poisoned), TrackerError);
}

TEST_CASE("refine_peak recovers a quadratic peak") {
    ScalarMap r(9, 9);
    const double px = 4.3, py = 3.8;
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) r(x, y) = 5.0 - (x - px) * (x - px) - 0.5 * (y - py) * (y - py);
    const auto [sx, sy] = refine_peak(r, 4, 4);
    CHECK(sx == doctest::Approx(px).epsilon(1e-9));
    CHECK(sy == doctest::Approx(py).epsilon(1e-9));
}
