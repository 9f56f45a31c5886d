// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gradcheck.hpp"
#include "metric_fixtures.hpp"
#include "sslt/cli.hpp"
#include "sslt/dataset.hpp"
#include "sslt/metrics.hpp"
#include "sslt/pipeline.hpp"
#include "sslt/tracker.hpp"
#include "support.hpp"

using namespace sslt;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSuiteSeed = 7;

/// Collects failed checks of one criterion.
struct Check {
    std::vector<std::string> failures;
    std::string summary;

    void expect(bool ok, const std::string& what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok) ++failed;
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream s;
        s.precision(17);
        s << what << ": got " << got << ", want " << want;
        expect(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)), s.str());
    }
    std::size_t failed = 0;
};

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

const std::vector<std::pair<Sequence, GroundTruth>>& suite() {
    static const auto rendered = [] {
        std::vector<std::pair<Sequence, GroundTruth>> out;
        for (const auto& c : split_challenge_suite(kSuiteSeed)) out.push_back(render_synthetic(c));
        return out;
    }();
    return rendered;
}

double mean_iou(const std::vector<Box>& pred, const std::vector<Box>& gt) {
    double s = 0.0;
    for (std::size_t t = 0; t < gt.size(); ++t) s += iou(pred[t], gt[t]);
    return s / static_cast<double>(gt.size());
}

// --- 1: box algebra ---------------------------------------------------------
void box_algebra(Check& c) {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> dim(20, 640);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int cases = 10000;
    for (int i = 0; i < cases; ++i) {
        const int W = dim(rng), H = dim(rng);
        const double w = 1.0 + u(rng) * (W - 1), h = 1.0 + u(rng) * (H - 1);
        const Box f0{u(rng) * (W - w), u(rng) * (H - h), w, h};
        const double sigma = 1.0 + 2.0 * u(rng);
        const double tr = 8.0 + 700.0 * u(rng);
        const std::string tag = "case " + std::to_string(i) + " f0 " + to_string(f0);

        c.expect(expand(f0, 1.0) == f0, tag + ": unit expansion is not the identity");
        const Box fe = expand(f0, sigma);
        c.expect(std::abs(fe.cx() - f0.cx()) < 1e-9 && std::abs(fe.cy() - f0.cy()) < 1e-9, tag + ": center moved");
        c.expect(std::abs(fe.w - sigma * w) < 1e-9 && std::abs(fe.h - sigma * h) < 1e-9, tag + ": expansion size");

        const Box ft = clamp_min(fe, W, H, tr);
        c.expect(inside_frame(ft, W, H), tag + ": ft outside frame");
        c.expect(ft.w >= std::min(tr, double(W)) - 1e-9 && ft.h >= std::min(tr, double(H)) - 1e-9,
                 tag + ": side below min(Tr, frame)");
        c.expect(ft.w >= std::min(fe.w, double(W)) - 1e-9 && ft.h >= std::min(fe.h, double(H)) - 1e-9,
                 tag + ": clamping shrank the expanded box");
        c.expect(ft.x <= f0.x + 1e-9 && ft.y <= f0.y + 1e-9 && ft.x + ft.w >= f0.x + f0.w - 1e-9 &&
                     ft.y + ft.h >= f0.y + f0.h - 1e-9,
                 tag + ": ft does not contain f0");
        const RasterRect r = rasterize_clamped(ft, W, H);
        c.expect(!r.empty() && r.x >= 0 && r.y >= 0 && r.right() <= W && r.bottom() <= H, tag + ": raster outside");
        c.expect(is_salient_box(f0, tr) == (w >= tr && h >= tr), tag + ": salient rule");
    }
    c.summary = std::to_string(cases) + " random cases";
}

// --- 2: tight box from mask ---------------------------------------------------
void tight_box(Check& c) {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> side(1, 64), origin(-50, 500);
    std::uniform_real_distribution<double> density(0.002, 0.6);
    int empty = 0;
    const int cases = 10000;
    for (int i = 0; i < cases; ++i) {
        const int w = side(rng), h = side(rng), ox = origin(rng), oy = origin(rng);
        const Mask m = test::random_mask(rng, w, h, density(rng));
        if (m.count() == 0) {
            ++empty;
            bool threw = false;
            try {
                refine_from_mask(m, ox, oy);
            } catch (const std::invalid_argument&) {
                threw = true;
            }
            c.expect(threw, "case " + std::to_string(i) + ": empty mask accepted");
            continue;
        }
        c.expect(refine_from_mask(m, ox, oy) == test::brute_tight_box(m, ox, oy),
                 "case " + std::to_string(i) + " (" + std::to_string(w) + "x" + std::to_string(h) + ")");
    }
    c.summary = std::to_string(cases) + " masks, " + std::to_string(empty) + " empty";
}

// --- 3: metric oracles --------------------------------------------------------
void metric_oracles(Check& c) {
    // box IoU against pixel counting on integer boxes
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> pos(0, 40), len(1, 24);
    for (int i = 0; i < 1000; ++i) {
        const int ax = pos(rng), ay = pos(rng), aw = len(rng), ah = len(rng);
        const int bx = pos(rng), by = pos(rng), bw = len(rng), bh = len(rng);
        const Mask a = test::rect_mask(64, 64, ax, ay, ax + aw, ay + ah);
        const Mask b = test::rect_mask(64, 64, bx, by, bx + bw, by + bh);
        c.near(iou(Box{double(ax), double(ay), double(aw), double(ah)}, Box{double(bx), double(by), double(bw), double(bh)}),
               mask_iou(a, b), 1e-12, "iou pair " + std::to_string(i));
    }

    // mask IoU against an independent intersection/union count
    std::uniform_int_distribution<int> side(1, 48);
    std::uniform_real_distribution<double> density(0.0, 0.7);
    for (int i = 0; i < 1000; ++i) {
        const int w = side(rng), h = side(rng);
        const Mask a = test::random_mask(rng, w, h, density(rng)), b = test::random_mask(rng, w, h, density(rng));
        std::size_t inter = 0, uni = 0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            inter += a.data()[k] && b.data()[k];
            uni += a.data()[k] || b.data()[k];
        }
        const double want = uni == 0 ? 1.0 : double(inter) / double(uni);
        c.near(mask_iou(a, b), want, 0.0, "mask pair " + std::to_string(i));
    }

    // structure measure: fixed points and numpy oracle values
    const Mask gt = test::ellipse_gt();
    c.near(s_measure(test::as_map(gt), gt), 1.0, 1e-9, "S(gt, gt)");
    c.near(s_measure(ScalarMap(12, 9, 0.3), Mask(12, 9)), 0.7, 1e-15, "S with empty gt");
    c.near(s_measure(ScalarMap(12, 9, 0.3), Mask(12, 9, 1)), 0.3, 1e-15, "S with full gt");
    c.near(s_measure(test::wave_map(), gt), 0.30529024287403633, 1e-12, "S oracle (wave)");
    c.near(s_measure(test::ramp_map(), test::rect_mask(16, 10, 9, 1, 14, 7)), 0.41274469989866464, 1e-12,
           "S oracle (ramp)");

    // boundary F
    const Mask g = test::disk_mask(64, 48, 30, 22, 10);
    c.near(boundary_f(g, g).f, 1.0, 0.0, "F(gt, gt)");
    c.near(boundary_f(Mask(64, 48), g).f, 0.0, 0.0, "F(empty, gt)");
    c.near(boundary_f(Mask(64, 48), Mask(64, 48)).f, 1.0, 0.0, "F(empty, empty)");
    c.near(f_stats({g, g}, {g, g}).mean, 1.0, 0.0, "f_stats identical masks");
    c.near(f_stats({Mask(64, 48)}, {g}).mean, 0.0, 0.0, "f_stats empty prediction");
    c.near(f_stats({g}, {Mask(64, 48)}).mean, 0.0, 0.0, "f_stats empty ground truth");
    c.near(boundary_f(test::disk_mask(64, 48, 32.5, 23, 11), g).f, 0.42372881355932196, 1e-14, "F oracle (disks)");

    // DP / OP hand cases
    const std::vector<Box> gt_boxes{{0, 0, 10, 10}, {0, 0, 10, 10}};
    c.near(dp_curve({{0, 0, 10, 10}, {150, 0, 10, 10}}, gt_boxes).score_at_reference, 0.5, 0.0, "DP@100");
    c.near(dp_curve(gt_boxes, gt_boxes).values[0], 0.0, 0.0, "DP at distance 0 is strict");
    const CurveReport op = op_curve({{0, 0, 2, 2}}, {{1, 1, 2, 2}});
    c.near(op.values[14], 1.0, 0.0, "OP at 0.14 for IoU 1/7");
    c.near(op.values[15], 0.0, 0.0, "OP at 0.15 for IoU 1/7");
    c.near(op.auc, 15.0 / 101.0, 1e-15, "OP AUC");
    c.summary = "1000 box and 1000 mask IoU pairs, S/F/DP/OP fixed points and oracles";
}

// --- 4: gradient check --------------------------------------------------------
void gradients(Check& c) {
    double worst = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto [m, crop, label] = test::gradcheck_fixture(seed);
        const test::GradCheck gc = test::gradient_check(m, crop, label);
        worst = std::max(worst, gc.max_rel_error);
        c.expect(gc.max_rel_error < 1e-4, "seed " + std::to_string(seed) + " worst " + gc.worst + " rel " +
                                               std::to_string(gc.max_rel_error));
        c.expect(gc.checked == m.parameter_count(), "not every parameter checked");
    }
    c.summary = fmt("3 seeds, max relative error %.2e", worst);
}

// --- 5: overfit one label -------------------------------------------------------
void overfit(Check& c) {
    const auto& [seq, gt] = suite()[1];
    const Box fe = clamp_min(expand(gt.boxes[0], 1.5), seq.width(), seq.height(), 96.0);
    const RasterRect r = rasterize_clamped(fe, seq.width(), seq.height());
    PseudoLabel pl;
    pl.label = crop((*gt.masks)[0], r);
    pl.salient_area = pl.label.count();
    const Image img = crop(seq.frames[0], r);
    TrainConfig cfg;
    cfg.iterations = 300;
    cfg.input_size = 96;
    cfg.seed = 5;
    const SegModel m = fine_tune(init_model(9, 96), pl, img, cfg);
    const double j = mask_iou(segment_crop(m, img, cfg.threshold), pl.label);
    c.expect(j >= 0.9, "IoU " + std::to_string(j));
    c.summary = fmt("IoU %.4f after 300 iterations on a %gx%g crop", j, r.w, r.h);
}

// --- 6: tracker -----------------------------------------------------------------
void tracker(Check& c) {
    SynthConfig s;
    s.name = "translate";
    s.frame_count = 100;
    s.width = 320;
    s.height = 240;
    s.polygon = {{-22, -6}, {-12, -16}, {14, -14}, {24, 2}, {10, 16}, {-16, 12}};
    s.start_cx = 90;
    s.start_cy = 80;
    s.motion = {MotionStep{1.2, 0.7, 0.0, 1.0}};
    s.background = BackgroundMode::clutter;
    s.noise_sigma = 0.0;
    const auto [seq, gt] = render_synthetic(s);
    const auto boxes = run_tracker(seq, gt.boxes[0], TrackerConfig{});
    double err = 0.0;
    for (std::size_t t = 1; t < seq.size(); ++t) err += center_distance(boxes[t], gt.boxes[t]);
    err /= static_cast<double>(seq.size() - 1);
    c.expect(err < 3.0, "mean center error " + std::to_string(err));

    s.motion = {MotionStep{}};
    s.frame_count = 30;
    const auto [still, still_gt] = render_synthetic(s);
    const auto still_boxes = run_tracker(still, still_gt.boxes[0], TrackerConfig{});
    double drift = 0.0;
    for (std::size_t t = 0; t < still.size(); ++t) drift = std::max(drift, center_distance(still_boxes[t], still_gt.boxes[0]));
    c.expect(drift <= 1.0, "static drift " + std::to_string(drift));
    c.summary = fmt("translation mean error %.3f px, static drift %.3f px", err, drift);
}

// --- 7: refinement gain on spin/deformation rows --------------------------------
void refinement_gain(Check& c) {
    const PipelineConfig cfg;
    double sslt_iou = 0.0, trk_iou = 0.0, sslt_auc = 0.0, trk_auc = 0.0;
    int rows = 0;
    std::string detail;
    for (int row = 1; row <= 7; ++row) {
        const ChallengeFlags f = challenge_flags(row);
        if (!f.spin && !f.deformation) continue;
        const auto& [seq, gt] = suite()[row - 1];
        const SequenceResult r = run_sequence(seq, gt.boxes[0], cfg);
        std::vector<Box> fn, f0;
        for (const auto& fr : r.frames) {
            fn.push_back(fr.final_box);
            f0.push_back(fr.f0);
        }
        const double a = mean_iou(fn, gt.boxes), b = mean_iou(f0, gt.boxes);
        sslt_iou += a;
        trk_iou += b;
        sslt_auc += op_curve(fn, gt.boxes).auc;
        trk_auc += op_curve(f0, gt.boxes).auc;
        ++rows;
        detail += fmt(" %02.0f:%.3f/%.3f", row, a, b);
    }
    sslt_iou /= rows;
    trk_iou /= rows;
    sslt_auc /= rows;
    trk_auc /= rows;
    c.expect(sslt_iou >= trk_iou + 0.05, fmt("mean IoU %.4f vs tracker %.4f", sslt_iou, trk_iou));
    c.expect(sslt_auc > trk_auc, fmt("success AUC %.4f vs tracker %.4f", sslt_auc, trk_auc));
    c.summary = fmt("mean IoU %.3f vs %.3f, AUC %.3f vs %.3f;", sslt_iou, trk_iou, sslt_auc, trk_auc) + detail;
}

// --- 8: crop inference cost -------------------------------------------------------
void crop_speed(Check& c) {
    const PipelineConfig cfg;
    const SegModel m = init_model(1, cfg.train.input_size);
    auto best_of = [](int reps, const std::function<void()>& fn) {
        double best = 1e300;
        for (int i = 0; i < reps; ++i) {
            const auto t0 = Clock::now();
            fn();
            best = std::min(best, elapsed(t0));
        }
        return best;
    };
    double worst = 1e300;
    int measured = 0;
    for (const auto& [seq, gt] : suite()) {
        const Image& frame = seq.frames[0];
        const Box ft = clamp_min(expand(gt.boxes[0], cfg.geometry.expand_factor), seq.width(), seq.height(),
                                 cfg.geometry.min_crop_side);
        const RasterRect r = rasterize_clamped(ft, seq.width(), seq.height());
        if (4.0 * r.w * r.h > double(frame.width()) * frame.height()) continue;
        // full frame at the pixel density the crop is segmented at
        const int fw = static_cast<int>(std::lround(double(frame.width()) * m.input_size / r.w));
        const int fh = static_cast<int>(std::lround(double(frame.height()) * m.input_size / r.h));
        const double t_crop = best_of(3, [&] { (void)segment_crop(m, crop(frame, r), 0.5); });
        const double t_full = best_of(3, [&] { (void)forward_at(m, frame, fw, fh); });
        const double speedup = t_full / t_crop;
        c.expect(speedup >= 2.0, seq.name + fmt(": speedup %.2f", speedup));
        worst = std::min(worst, speedup);
        ++measured;
    }
    c.expect(measured > 0, "no suite sequence has a crop of at most a quarter frame");
    c.summary = std::to_string(measured) + " sequences, minimum speedup " + fmt("%.2fx", worst);
}

// --- 9: non-salient identity ----------------------------------------------------
void nonsalient_identity(Check& c) {
    PipelineConfig cfg;
    std::size_t frames = 0;
    for (const auto& [seq, gt] : suite()) {
        cfg.geometry.salient_min_side = std::max(seq.width(), seq.height()) + 1.0;
        const auto tracker_boxes = run_tracker(seq, gt.boxes[0], cfg.tracker);
        const SequenceResult r = run_sequence(seq, gt.boxes[0], cfg);
        c.expect(!r.salient, seq.name + ": marked salient");
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const FrameResult& f = r.frames[t];
            c.expect(f.final_box == tracker_boxes[t], seq.name + " frame " + std::to_string(t) + ": box differs");
            c.expect(f.source == FrameSource::tracker_nonsalient, seq.name + ": wrong source");
            const RasterRect rr = rasterize_clamped(tracker_boxes[t], seq.width(), seq.height());
            const Mask inside = test::rect_mask(seq.width(), seq.height(), rr.x, rr.y, rr.right(), rr.bottom());
            bool subset = true;
            for (std::size_t i = 0; i < inside.size(); ++i) subset &= !f.mask.data()[i] || inside.data()[i];
            c.expect(subset, seq.name + " frame " + std::to_string(t) + ": mask leaves the tracker box");
            ++frames;
        }
    }
    c.summary = std::to_string(suite().size()) + " sequences, " + std::to_string(frames) + " frames";
}

// --- 10: determinism --------------------------------------------------------------
void determinism(Check& c) {
    test::TempDir dir("acceptance-det");
    const auto configs = split_challenge_suite(kSuiteSeed);
    const SynthConfig& sc = configs[6];
    const auto& [seq, gt] = suite()[6];
    write_sequence(dir / "data" / sc.name, seq, gt);
    for (const char* run : {"a", "b"}) {
        std::ostringstream out, err;
        const int code = dispatch({"run", "--data", (dir / "data").string(), "--out", (dir / run).string(), "--seed",
                                   "1234", "--workers", run[0] == 'a' ? "1" : "2"},
                                  out, err);
        c.expect(code == kExitOk, std::string("run ") + run + " exited " + std::to_string(code) + ": " + err.str());
    }
    const std::string a_dir = (dir / "a" / sc.name).string(), b_dir = (dir / "b" / sc.name).string();
    c.expect(test::slurp(a_dir + "/boxes.csv") == test::slurp(b_dir + "/boxes.csv"), "boxes.csv differs");
    json a = json::parse(test::slurp(a_dir + "/result.json")), b = json::parse(test::slurp(b_dir + "/result.json"));
    for (const auto& k : timing_keys()) {
        a.erase(k);
        b.erase(k);
    }
    c.expect(a == b, "result.json differs outside timing fields");
    c.summary = sc.name + ", two run invocations with seed 1234 (1 and 2 workers)";
}

}  // namespace

int main() {
    const std::vector<std::tuple<int, std::string, double, std::function<void(Check&)>>> criteria{
        {1, "box expansion and minimum clamping invariants", 5.0, box_algebra},
        {2, "tight box from mask matches brute force", 10.0, tight_box},
        {3, "metrics match oracles", 0.0, metric_oracles},
        {4, "analytic gradients match finite differences", 60.0, gradients},
        {5, "fine-tuning overfits a single label", 60.0, overfit},
        {6, "tracker follows translation and holds still", 0.0, tracker},
        {7, "refinement beats the tracker on spin/deformation", 600.0, refinement_gain},
        {8, "crop segmentation is at least 2x faster than full frame", 0.0, crop_speed},
        {9, "non-salient sequences reproduce the tracker", 0.0, nonsalient_identity},
        {10, "fixed seed gives identical outputs", 0.0, determinism},
    };
    int failed = 0;
    for (const auto& [id, name, budget, fn] : criteria) {
        Check c;
        const auto t0 = Clock::now();
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double s = elapsed(t0);
        if (budget > 0.0) c.expect(s < budget, fmt("took %.1f s, budget %.0f s", s, budget));
        const bool ok = c.failed == 0;
        failed += !ok;
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name << " (" << c.summary
                  << (c.summary.empty() ? "" : "; ") << fmt("%.1f s", s) << ")\n";
        for (const auto& f : c.failures) std::cout << "       " << f << "\n";
        if (c.failed > c.failures.size()) std::cout << "       ... " << c.failed << " failed checks in total\n";
        std::cout.flush();
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
    return failed == 0 ? 0 : 1;
}
