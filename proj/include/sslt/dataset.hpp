#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sslt/box.hpp"
#include "sslt/imaging.hpp"

namespace sslt {

struct Sequence {
    std::string name;
    std::vector<Image> frames;
    std::vector<std::string> frame_paths;

    int width() const { return frames.empty() ? 0 : frames.front().width(); }
    int height() const { return frames.empty() ? 0 : frames.front().height(); }
    std::size_t size() const { return frames.size(); }
};

struct GroundTruth {
    std::vector<Box> boxes;
    std::optional<std::vector<Mask>> masks;
};

/// Sequence loading and synthetic-sequence failures. Messages name the file
/// (and line, for ground-truth parse errors).
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero-padded six-digit frame file name, 1-based: 000001.png.
std::string frame_file_name(std::size_t index_1based);

/// Parse one "x,y,w,h" ground-truth line. Throws DatasetError naming `line_no`.
Box parse_box_line(const std::string& line, std::size_t line_no);

/// Load frames/NNNNNN.png, groundtruth.txt and optional masks/NNNNNN.png.
std::pair<Sequence, GroundTruth> load_sequence(const std::filesystem::path& dir);

/// Directories under `root` holding a sequence, sorted by name. When `root`
/// itself is a sequence directory it is the only entry.
std::vector<std::filesystem::path> find_sequences(const std::filesystem::path& root);

/// Per-frame pose increment applied between consecutive frames.
struct MotionStep {
    double dx = 0.0;        // px
    double dy = 0.0;        // px
    double rotation = 0.0;  // degrees
    double scale = 1.0;     // ratio
};

enum class BackgroundMode { flat, clutter, drifting_texture };

struct SynthConfig {
    std::string name = "synthetic";
    int frame_count = 60;
    int width = 320;
    int height = 240;
    /// Convex polygon vertices relative to the target center, in px at scale 1.
    std::vector<std::pair<double, double>> polygon;
    std::uint64_t texture_seed = 1;
    double start_cx = 160.0;
    double start_cy = 120.0;
    double start_rotation = 0.0;  // degrees
    double start_scale = 1.0;
    /// frame_count - 1 increments, or a single step repeated for every frame.
    std::vector<MotionStep> motion;
    /// Max per-vertex jitter (px) applied independently each frame.
    double deformation = 0.0;
    BackgroundMode background = BackgroundMode::flat;
    double background_level = 0.06;
    /// Background drift per frame in px (drifting-texture mode).
    double background_drift = 1.5;
    /// Illumination gain of frame t is gain_start * gain_step^t.
    double gain_start = 1.0;
    double gain_step = 1.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Target pose of one frame, after the motion script is applied.
struct TargetPose {
    double cx, cy, rotation, scale;
};

std::vector<TargetPose> target_poses(const SynthConfig& cfg);

/// Render frames and exact ground truth in memory. Frames are quantized to
/// 8 bits, so they equal what a PNG round trip produces.
std::pair<Sequence, GroundTruth> render_synthetic(const SynthConfig& cfg);

/// Render and write frames/, masks/ and groundtruth.txt under `out`.
std::pair<Sequence, GroundTruth> generate_synthetic(const SynthConfig& cfg, const std::filesystem::path& out);

void write_sequence(const std::filesystem::path& dir, const Sequence& seq, const GroundTruth& gt);

/// Challenge flags of one suite entry.
struct ChallengeFlags {
    bool spin = false;
    bool deformation = false;
    bool scale_change = false;
    bool background_change = false;
    bool illumination = false;
};

/// Challenge matrix of the seven-sequence satellite suite, rows 01..07.
ChallengeFlags challenge_flags(int row);

/// Seven synthetic configs, one per challenge-matrix row.
std::vector<SynthConfig> split_challenge_suite(std::uint64_t seed);

const char* to_string(BackgroundMode mode);
BackgroundMode background_from_string(const std::string& s);

}  // namespace sslt
