#include <algorithm>
#include <chrono>
#include <thread>

#include "parallel.hpp"
#include "sslt/pipeline.hpp"
#include "sslt/rng.hpp"

namespace sslt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void PipelineConfig::validate() const {
    geometry.validate();
    saliency.validate();
    train.validate();
    tracker.validate();
    if (salient_policy == SalientPolicy::fraction && !(salient_fraction > 0.0 && salient_fraction <= 1.0))
        throw std::invalid_argument("salient_fraction must be in (0, 1]");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

StageSeeds derive_seeds(std::uint64_t master) {
    return {mix_seed(master, 11), mix_seed(master, 12), mix_seed(master, 13)};
}

const char* to_string(FrameSource s) {
    switch (s) {
        case FrameSource::seg_refined: return "seg-refined";
        case FrameSource::tracker_fallback: return "tracker-fallback";
        case FrameSource::tracker_nonsalient: return "tracker-nonsalient";
        case FrameSource::tracker: return "tracker";
    }
    return "tracker";
}

FrameSource frame_source_from_string(const std::string& s) {
    if (s == "seg-refined") return FrameSource::seg_refined;
    if (s == "tracker-fallback") return FrameSource::tracker_fallback;
    if (s == "tracker-nonsalient") return FrameSource::tracker_nonsalient;
    if (s == "tracker") return FrameSource::tracker;
    throw std::invalid_argument("unknown frame source \"" + s + "\"");
}

double SequenceResult::fps_including_finetune() const {
    const double t = timings.total();
    return t > 0 ? static_cast<double>(frames.size()) / t : 0.0;
}

double SequenceResult::fps_excluding_finetune() const {
    const double t = timings.total() - timings.fine_tune;
    return t > 0 ? static_cast<double>(frames.size()) / t : 0.0;
}

Mask place_mask(const Mask& local, const RasterRect& rect, int frame_width, int frame_height) {
    if (!local.same_dims(rect.w, rect.h)) throw std::invalid_argument("place_mask: mask does not match the rectangle");
    Mask out(frame_width, frame_height);
    for (int y = 0; y < rect.h; ++y)
        for (int x = 0; x < rect.w; ++x) {
            const int u = rect.x + x, v = rect.y + y;
            if (u >= 0 && v >= 0 && u < frame_width && v < frame_height) out(u, v) = local(x, y);
        }
    return out;
}

FusionOutput fuse_frame(const Box& f0, const Box& /*ft*/, const Mask& mask, bool salient, int frame_width,
                        int frame_height) {
    if (!mask.same_dims(frame_width, frame_height))
        throw std::invalid_argument("fuse_frame: mask must be in full-frame coordinates");
    if (salient) {
        if (mask.count() > 0) return {refine_from_mask(mask, 0, 0), mask, FrameSource::seg_refined};
        return {f0, Mask(frame_width, frame_height), FrameSource::tracker_fallback};
    }
    const RasterRect r = rasterize_clamped(f0, frame_width, frame_height);
    Mask cropped(frame_width, frame_height);
    for (int y = r.y; y < r.bottom(); ++y)
        for (int x = r.x; x < r.right(); ++x) cropped(x, y) = mask(x, y);
    return {f0, std::move(cropped), FrameSource::tracker_nonsalient};
}

bool decide_salient(const std::vector<Box>& f0, const PipelineConfig& cfg) {
    if (f0.empty()) return false;
    const auto ok = std::count_if(f0.begin(), f0.end(),
                                  [&](const Box& b) { return is_salient_box(b, cfg.geometry.salient_min_side); });
    if (cfg.salient_policy == SalientPolicy::any_frame) return static_cast<std::size_t>(ok) == f0.size();
    return static_cast<double>(ok) / static_cast<double>(f0.size()) >= cfg.salient_fraction;
}

std::vector<Box> run_tracker(const Sequence& seq, const Box& init, const TrackerConfig& cfg) {
    CorrelationFilterProposer proposer(cfg);
    proposer.init(seq.frames.front(), init);
    std::vector<Box> boxes{clip_to_frame(init, seq.width(), seq.height())};
    for (std::size_t t = 1; t < seq.size(); ++t) boxes.push_back(proposer.step(seq.frames[t]));
    return boxes;
}

namespace {

struct Segmented {
    Mask mask;  // full frame
    double seconds = 0.0;
};

Segmented segment_frame(const SegModel& model, const Image& frame, const Box& ft, double threshold) {
    const auto t0 = Clock::now();
    const RasterRect rect = rasterize_clamped(ft, frame.width(), frame.height());
    const Mask local = segment_crop(model, crop(frame, rect), threshold);
    Segmented s{place_mask(local, rect, frame.width(), frame.height()), 0.0};
    s.seconds = seconds_since(t0);
    return s;
}

}  // namespace

SequenceResult run_sequence(const Sequence& seq, const Box& init, const PipelineConfig& cfg) {
    CorrelationFilterProposer proposer(cfg.tracker);
    return run_sequence(seq, init, cfg, proposer);
}

SequenceResult run_sequence(const Sequence& seq, const Box& init, const PipelineConfig& cfg, BoxProposer& proposer) {
    cfg.validate();
    if (seq.size() < 2) throw std::invalid_argument("run_sequence: sequence needs at least 2 frames");
    const int W = seq.width(), H = seq.height();
    if (!inside_frame(init, W, H, 0.5))
        throw std::invalid_argument("run_sequence: init box " + to_string(init) + " is not within frame 1");
    const StageSeeds seeds = derive_seeds(cfg.seed);
    const std::size_t N = seq.size();

    SequenceResult result;
    result.name = seq.name;

    // pass 1: tracker boxes and crop boxes
    auto t0 = Clock::now();
    std::vector<Box> f0(N), ft(N);
    proposer.init(seq.frames[0], init);
    f0[0] = clip_to_frame(init, W, H);
    for (std::size_t t = 1; t < N; ++t) f0[t] = proposer.step(seq.frames[t]);
    result.timings.tracking = seconds_since(t0);
    for (std::size_t t = 0; t < N; ++t)
        ft[t] = clamp_min(expand(f0[t], cfg.geometry.expand_factor), W, H, cfg.geometry.min_crop_side);
    result.salient = decide_salient(f0, cfg);

    auto tracker_only = [&](FrameSource source) {
        result.frames.clear();
        for (std::size_t t = 0; t < N; ++t)
            result.frames.push_back({t, f0[t], ft[t], Mask(W, H), f0[t], source, 0.0});
    };

    // pseudo-label from K random crops
    t0 = Clock::now();
    SaliencyConfig scfg = cfg.saliency;
    scfg.seed = seeds.saliency;
    std::vector<CandidateCrop> crops;
    crops.reserve(N);
    for (std::size_t t = 0; t < N; ++t)
        crops.push_back({t, ft[t], crop(seq.frames[t], rasterize_clamped(ft[t], W, H))});
    PseudoLabel pseudo;
    try {
        pseudo = select_pseudo_label(crops, scfg);
    } catch (const UnsalientSequenceError& e) {
        result.timings.saliency = seconds_since(t0);
        result.diagnostics.push_back(std::string(e.what()) + "; falling back to tracker output");
        tracker_only(FrameSource::tracker_fallback);
        return result;
    }
    result.timings.saliency = seconds_since(t0);
    result.pseudo_label = PseudoLabelRecord{pseudo.frame_index, pseudo.crop_box, pseudo.salient_area,
                                            sample_candidates(N, scfg)};

    // online fine-tuning on the selected pair
    t0 = Clock::now();
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seeds.train;
    const SegModel parent = init_model(seeds.model_init, tcfg.input_size);
    const SegModel model = fine_tune(parent, pseudo, crops[pseudo.frame_index].crop, tcfg, &result.loss_trace);
    result.timings.fine_tune = seconds_since(t0);
    crops.clear();

    // pass 2: segmentation and fusion
    result.frames.resize(N);
    if (cfg.feedback == FeedbackMode::off) {
        std::vector<Segmented> seg(N);
        t0 = Clock::now();
        parallel_for(N, cfg.workers, [&](std::size_t t) { seg[t] = segment_frame(model, seq.frames[t], ft[t], tcfg.threshold); });
        result.timings.segmentation = seconds_since(t0);
        t0 = Clock::now();
        for (std::size_t t = 0; t < N; ++t) {
            FusionOutput fused = fuse_frame(f0[t], ft[t], seg[t].mask, result.salient, W, H);
            result.frames[t] = {t, f0[t], ft[t], std::move(fused.mask), fused.box, fused.source, seg[t].seconds};
        }
        result.timings.fusion = seconds_since(t0);
    } else {
        // Re-run the tracker with refined boxes fed back; salient decision
        // and pseudo-label come from pass 1.
        double track_s = 0.0, seg_s = 0.0, fuse_s = 0.0;
        for (std::size_t t = 0; t < N; ++t) {
            auto ts = Clock::now();
            Box box0;
            if (t == 0) {
                proposer.init(seq.frames[0], init);
                box0 = clip_to_frame(init, W, H);
            } else {
                box0 = proposer.step(seq.frames[t]);
            }
            const Box boxt = clamp_min(expand(box0, cfg.geometry.expand_factor), W, H, cfg.geometry.min_crop_side);
            track_s += seconds_since(ts);
            Segmented s = segment_frame(model, seq.frames[t], boxt, tcfg.threshold);
            seg_s += s.seconds;
            ts = Clock::now();
            FusionOutput fused = fuse_frame(box0, boxt, s.mask, result.salient, W, H);
            if (fused.source == FrameSource::seg_refined && t > 0) proposer.recenter(fused.box);
            result.frames[t] = {t, box0, boxt, std::move(fused.mask), fused.box, fused.source, s.seconds};
            fuse_s += seconds_since(ts);
        }
        result.timings.tracking += track_s;
        result.timings.segmentation = seg_s;
        result.timings.fusion = fuse_s;
    }
    result.model = model;
    return result;
}

}  // namespace sslt
