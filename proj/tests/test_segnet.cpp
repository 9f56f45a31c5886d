#include <doctest.h>

#include <cmath>
#include <limits>

#include "gradcheck.hpp"
#include "sslt/segnet.hpp"
#include "support.hpp"

using namespace sslt;

namespace {

SegModel zero_model(int input_size) {
    SegModel m = init_model(1, input_size);
    for (auto& l : m.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return m;
}

PseudoLabel label_for(const Mask& m) {
    PseudoLabel p;
    p.label = m;
    p.salient_area = m.count();
    return p;
}

}  // namespace

TEST_CASE("initialization law") {
    const SegModel a = init_model(5), b = init_model(5), c = init_model(6);
    REQUIRE(a.layers.size() == 3);
    CHECK(a.layers[0].in_channels == 5);
    CHECK(a.layers[0].out_channels == 16);
    CHECK(a.layers[1].out_channels == 16);
    CHECK(a.layers[2].out_channels == 1);
    CHECK_FALSE(a.layers[2].relu);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(a.layers[l].weights == b.layers[l].weights);
        const double bound = std::sqrt(6.0 / (9.0 * a.layers[l].in_channels));
        for (double w : a.layers[l].weights) CHECK(std::abs(w) <= bound);
        for (double v : a.layers[l].bias) CHECK(v == 0.0);
    }
    CHECK(a.layers[0].weights != c.layers[0].weights);
    CHECK(a.parameter_count() == 16 * 5 * 9 + 16 + 16 * 16 * 9 + 16 + 16 * 9 + 1);
}

TEST_CASE("zero-weight model predicts one half") {
    const SegModel m = zero_model(16);
    const Image crop = test::blob_crop(30, 20, 15, 10, 6, 4);
    const ScalarMap p = forward(m, crop);
    CHECK(p.width() == 30);
    CHECK(p.height() == 20);
    for (double v : p.data()) CHECK(v == 0.5);

    CHECK(segment_crop(m, crop, 0.5).count() == 0);
    CHECK(segment_crop(m, crop, 1e-9).count() == crop.width() * static_cast<std::size_t>(crop.height()));
    CHECK_THROWS(segment_crop(m, crop, 0.0));
}

TEST_CASE("probabilities lie strictly inside the unit interval") {
    const SegModel m = init_model(3, 24);
    const Image crop = test::blob_crop(24, 24, 12, 12, 7, 5);
    const ScalarMap p = forward(m, crop);
    for (double v : p.data()) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("network is translation equivariant once the coordinate planes are ignored") {
    SegModel m = init_model(4, 8);
    for (int o = 0; o < m.layers[0].out_channels; ++o)
        for (int c = 3; c < 5; ++c)
            for (int k = 0; k < 9; ++k) m.layers[0].weights[m.layers[0].weight_index(o, c, k / 3, k % 3)] = 0.0;
    const int W = 24, H = 20, dx = 2, dy = 1;
    Image a(W, H, 3), b(W, H, 3);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) a.at(x, y, c) = 0.5 + 0.4 * std::sin(0.7 * x + 1.1 * y + c);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) b.at(x, y, c) = a.at(std::max(0, x - dx), std::max(0, y - dy), c);
    const ScalarMap pa = forward_at(m, a, W, H), pb = forward_at(m, b, W, H);
    // three stacked 3x3 layers: 3 px of padding influence plus the shift
    for (int y = 3 + dy; y < H - 3; ++y)
        for (int x = 3 + dx; x < W - 3; ++x) CHECK(pb(x, y) == doctest::Approx(pa(x - dx, y - dy)).epsilon(1e-12));
}

TEST_CASE("loss of a uniform one-half prediction has a closed form") {
    const SegModel m = zero_model(8);
    const Image crop(8, 8, 3, 0.3);
    const Mask label = test::rect_mask(8, 8, 0, 0, 8, 2);  // p = 1/4
    const double p = 0.25, beta = 1.0 - p;
    const LossAndGrad lg = loss_and_grad(m, crop, label);
    CHECK(lg.loss == doctest::Approx(std::log(2.0) * (beta * p + (1 - beta) * (1 - p))).epsilon(1e-14));
    CHECK_FALSE(lg.unbalanced_fallback);
}

TEST_CASE("one-class labels fall back to unweighted cross-entropy") {
    SegModel m = zero_model(8);
    const Image crop(8, 8, 3, 0.3);
    const Mask all_fg(8, 8, 1);
    LossAndGrad lg = loss_and_grad(m, crop, all_fg);
    CHECK(lg.unbalanced_fallback);
    CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    m.layers[2].bias[0] = 60.0;
    lg = loss_and_grad(m, crop, all_fg);
    CHECK(lg.loss < 1e-20);
}

TEST_CASE("analytic gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u}) {
        const auto [m, crop, label] = test::gradcheck_fixture(seed);
        const test::GradCheck gc = test::gradient_check(m, crop, label);
        INFO("seed " << seed << " worst " << gc.worst);
        CHECK(gc.checked == m.parameter_count());
        CHECK(gc.max_rel_error < 1e-4);
    }
}

TEST_CASE("zero learning rate leaves the weights unchanged") {
    const SegModel m = init_model(2, 16);
    const Image crop = test::blob_crop(16, 16, 8, 8, 5, 4);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.iterations = 5;
    const SegModel out = fine_tune(m, label_for(test::disk_mask(16, 16, 8, 8, 4)), crop, cfg);
    for (std::size_t l = 0; l < 3; ++l) CHECK(out.layers[l].weights == m.layers[l].weights);
}

TEST_CASE("fine-tuning is deterministic and overfits a clean label") {
    const SegModel m = init_model(7, 32);
    const Image crop = test::blob_crop(40, 40, 20, 21, 11, 8);
    Mask label(40, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            const double u = (x - 20) / 11.0, v = (y - 21) / 8.0;
            label(x, y) = u * u + v * v <= 1.0;
        }
    TrainConfig cfg;
    cfg.seed = 3;
    std::vector<double> trace;
    const SegModel a = fine_tune(m, label_for(label), crop, cfg, &trace);
    const SegModel b = fine_tune(m, label_for(label), crop, cfg);
    for (std::size_t l = 0; l < 3; ++l) CHECK(a.layers[l].weights == b.layers[l].weights);
    REQUIRE(trace.size() == static_cast<std::size_t>(cfg.iterations));
    CHECK(trace.back() < trace.front());
    CHECK(test::mask_iou_of(segment_crop(a, crop, cfg.threshold), label) >= 0.9);
}

TEST_CASE("non-finite inputs stop training with the loss trace") {
    const SegModel m = init_model(2, 8);
    Image crop(8, 8, 3, 0.5);
    crop.at(3, 3, 1) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.iterations = 3;
    try {
        fine_tune(m, label_for(test::disk_mask(8, 8, 4, 4, 2)), crop, cfg);
        FAIL("expected an error");
    } catch (const SegmentationError& e) {
        CHECK(e.loss_trace.size() == 1);
    }
}

TEST_CASE("pseudo-label and crop dims must agree") {
    TrainConfig cfg;
    CHECK_THROWS_AS(fine_tune(init_model(1, 8), label_for(Mask(5, 5, 1)), Image(6, 6, 3), cfg), std::invalid_argument);
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("model files round trip exactly") {
    test::TempDir dir("model");
    const SegModel m = init_model(9, 24);
    save_model(dir / "m.bin", m);
    const SegModel r = load_model(dir / "m.bin");
    CHECK(r.input_size == 24);
    CHECK(r.seed == 9);
    REQUIRE(r.layers.size() == m.layers.size());
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(r.layers[l].weights == m.layers[l].weights);
        CHECK(r.layers[l].bias == m.layers[l].bias);
        CHECK(r.layers[l].relu == m.layers[l].relu);
    }

    const std::string bytes = test::slurp(dir / "m.bin");
    std::ofstream(dir / "cut.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 16);
    CHECK_THROWS(load_model(dir / "cut.bin"));
    std::ofstream(dir / "junk.bin") << "not a model\n";
    CHECK_THROWS(load_model(dir / "junk.bin"));
}
