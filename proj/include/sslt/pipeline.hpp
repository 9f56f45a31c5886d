#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sslt/box.hpp"
#include "sslt/dataset.hpp"
#include "sslt/imaging.hpp"
#include "sslt/saliency.hpp"
#include "sslt/segnet.hpp"
#include "sslt/tracker.hpp"

namespace sslt {

enum class SalientPolicy { any_frame, fraction };
enum class FeedbackMode { off, refine_feeds_tracker };
enum class FrameSource { seg_refined, tracker_fallback, tracker_nonsalient, tracker };

struct PipelineConfig {
    GeometryConfig geometry;
    SaliencyConfig saliency;
    TrainConfig train;
    TrackerConfig tracker;
    SalientPolicy salient_policy = SalientPolicy::any_frame;
    double salient_fraction = 1.0;
    FeedbackMode feedback = FeedbackMode::off;
    std::uint64_t seed = 0;
    int workers = 1;  // pass-2 segmentation threads

    void validate() const;
};

/// Seeds of the stochastic stages, derived from the master seed.
struct StageSeeds {
    std::uint64_t saliency;
    std::uint64_t train;
    std::uint64_t model_init;
};
StageSeeds derive_seeds(std::uint64_t master);

struct StageTimings {
    double tracking = 0.0;
    double saliency = 0.0;
    double fine_tune = 0.0;
    double segmentation = 0.0;
    double fusion = 0.0;
    double total() const { return tracking + saliency + fine_tune + segmentation + fusion; }
};

struct FrameResult {
    std::size_t frame_index = 0;  // 0-based
    Box f0;
    Box ft;
    Mask mask;  // full-frame coordinates
    Box final_box;
    FrameSource source = FrameSource::tracker;
    double segmentation_seconds = 0.0;
};

struct PseudoLabelRecord {
    std::size_t frame_index = 0;
    Box crop_box;
    std::size_t salient_area = 0;
    std::vector<std::size_t> candidates;
};

struct SequenceResult {
    std::string name;
    bool salient = false;
    std::optional<PseudoLabelRecord> pseudo_label;
    std::vector<FrameResult> frames;
    StageTimings timings;
    std::vector<double> loss_trace;
    std::vector<std::string> diagnostics;
    std::optional<SegModel> model;

    double fps_including_finetune() const;
    double fps_excluding_finetune() const;
};

struct FusionOutput {
    Box box;
    Mask mask;
    FrameSource source;
};

/// Salient: tight box of a nonempty mask, or f0 with an empty mask.
/// Non-salient: f0 with the mask restricted to f0's raster.
FusionOutput fuse_frame(const Box& f0, const Box& ft, const Mask& mask, bool salient, int frame_width,
                        int frame_height);

/// Sequence-level salient decision over all tracker boxes.
bool decide_salient(const std::vector<Box>& f0, const PipelineConfig& cfg);

/// Tracker pass only; boxes per frame, frame 0 being `init`.
std::vector<Box> run_tracker(const Sequence& seq, const Box& init, const TrackerConfig& cfg);

/// Full two-pass run: tracking, pseudo-label selection, fine-tuning,
/// per-frame segmentation and fusion.
SequenceResult run_sequence(const Sequence& seq, const Box& init, const PipelineConfig& cfg);
SequenceResult run_sequence(const Sequence& seq, const Box& init, const PipelineConfig& cfg, BoxProposer& proposer);

/// Place a crop-local mask into a full-frame mask at `rect`.
Mask place_mask(const Mask& local, const RasterRect& rect, int frame_width, int frame_height);

const char* to_string(FrameSource s);
FrameSource frame_source_from_string(const std::string& s);

// --- configuration (JSON mirroring the field names above) ------------------

/// Schema violation; `path` is the JSON path of the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path(std::move(path)) {}
    std::string path;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
/// Overlay `j` onto `base`. Unknown keys and wrong types raise ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

// --- result files -----------------------------------------------------------

/// boxes.csv (`frame,x,y,w,h,source`, 1-based frames), proposals.csv (f0 and
/// ft per frame), masks/NNNNNN.png and result.json.
void write_sequence_result(const std::filesystem::path& dir, const SequenceResult& result, const PipelineConfig& cfg);

/// Tracker-only output: boxes.csv with source "tracker" and result.json.
void write_tracker_result(const std::filesystem::path& dir, const std::string& name, const std::vector<Box>& boxes,
                          double seconds, const TrackerConfig& cfg);

struct BoxRow {
    std::size_t frame = 0;  // 1-based
    Box box;
    std::string source;
};
std::vector<BoxRow> read_boxes_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_real(double v);

/// Keys of result.json that carry wall-clock measurements.
const std::vector<std::string>& timing_keys();

}  // namespace sslt
