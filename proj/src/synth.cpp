// Synthetic satellite sequences: a textured polygon over a space-like
// background, rendered with 4x4 supersampling so that ground-truth masks are
// the pixels with at least half coverage.
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sslt/dataset.hpp"
#include "sslt/rng.hpp"

namespace fs = std::filesystem;

namespace sslt {

const char* to_string(BackgroundMode mode) {
    switch (mode) {
        case BackgroundMode::flat: return "flat";
        case BackgroundMode::clutter: return "clutter";
        case BackgroundMode::drifting_texture: return "drifting-texture";
    }
    return "flat";
}

BackgroundMode background_from_string(const std::string& s) {
    if (s == "flat") return BackgroundMode::flat;
    if (s == "clutter") return BackgroundMode::clutter;
    if (s == "drifting-texture") return BackgroundMode::drifting_texture;
    throw std::invalid_argument("unknown background mode \"" + s + "\"");
}

namespace {

constexpr int kSuper = 4;
using Point = std::pair<double, double>;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

std::vector<Point> frame_vertices(const SynthConfig& cfg, const TargetPose& pose, int frame) {
    Rng rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(frame)));
    const double c = std::cos(deg2rad(pose.rotation)), s = std::sin(deg2rad(pose.rotation));
    std::vector<Point> out;
    out.reserve(cfg.polygon.size());
    for (const auto& [vx, vy] : cfg.polygon) {
        const double jx = cfg.deformation > 0 ? rng.uniform(-cfg.deformation, cfg.deformation) : 0.0;
        const double jy = cfg.deformation > 0 ? rng.uniform(-cfg.deformation, cfg.deformation) : 0.0;
        const double lx = vx * pose.scale, ly = vy * pose.scale;
        out.emplace_back(pose.cx + c * lx - s * ly + jx, pose.cy + s * lx + c * ly + jy);
    }
    return out;
}

bool point_in_polygon(const std::vector<Point>& poly, double px, double py) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto [xi, yi] = poly[i];
        const auto [xj, yj] = poly[j];
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) inside = !inside;
    }
    return inside;
}

double hash01(std::int64_t a, std::int64_t b, std::uint64_t seed) {
    const std::uint64_t h = mix_seed(seed ^ (static_cast<std::uint64_t>(a) * 0x9E3779B1ULL), static_cast<std::uint64_t>(b));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct Texture {
    double body[3];
    double panel[3];
    double grid_period;
    double body_half_width;
    std::uint64_t seed;

    explicit Texture(std::uint64_t texture_seed) : seed(texture_seed) {
        Rng rng(mix_seed(texture_seed, 7));
        const double gold = rng.uniform(0.0, 0.15);
        body[0] = 0.85;
        body[1] = 0.72 - gold * 0.5;
        body[2] = 0.45 - gold;
        const double blue = rng.uniform(0.0, 0.1);
        panel[0] = 0.42;
        panel[1] = 0.48;
        panel[2] = 0.62 + blue;
        grid_period = rng.uniform(5.0, 8.0);
        body_half_width = rng.uniform(12.0, 16.0);
    }

    // u, v in target-local px at unit scale.
    void sample(double u, double v, double rgb[3]) const {
        if (std::abs(u) < body_half_width) {
            const double crinkle = 0.12 * (hash01(static_cast<std::int64_t>(std::floor(u / 3)),
                                                  static_cast<std::int64_t>(std::floor(v / 3)), seed) - 0.5);
            for (int c = 0; c < 3; ++c) rgb[c] = body[c] + crinkle;
            return;
        }
        const double gu = std::fmod(std::abs(u), grid_period), gv = std::fmod(std::abs(v) + 100.0, grid_period);
        const bool line = gu < 1.0 || gv < 1.0;
        for (int c = 0; c < 3; ++c) rgb[c] = line ? panel[c] + 0.25 : panel[c];
    }
};

struct Background {
    struct Blob {
        double x, y, sigma, amp;
    };
    struct Wave {
        double kx, ky, phase;
    };

    const SynthConfig& cfg;
    std::vector<Blob> blobs;
    std::vector<Wave> waves;

    explicit Background(const SynthConfig& c) : cfg(c) {
        Rng rng(mix_seed(c.seed, 3));
        if (c.background == BackgroundMode::clutter) {
            for (int i = 0; i < 14; ++i)
                blobs.push_back({rng.uniform(0, c.width), rng.uniform(0, c.height), rng.uniform(8.0, 30.0),
                                 rng.uniform(-0.04, 0.12)});
        } else if (c.background == BackgroundMode::drifting_texture) {
            for (int i = 0; i < 4; ++i) {
                const double angle = rng.uniform(0.0, std::numbers::pi);
                const double freq = 2.0 * std::numbers::pi / rng.uniform(25.0, 70.0);
                waves.push_back({freq * std::cos(angle), freq * std::sin(angle), rng.uniform(0.0, 6.3)});
            }
        }
    }

    void sample(double x, double y, int frame, double rgb[3]) const {
        double v = cfg.background_level;
        double tint[3] = {0.8, 0.9, 1.1};
        if (cfg.background == BackgroundMode::clutter) {
            for (const Blob& b : blobs) {
                const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
                v += b.amp * std::exp(-0.5 * d2 / (b.sigma * b.sigma));
            }
        } else if (cfg.background == BackgroundMode::drifting_texture) {
            const double sx = x + cfg.background_drift * frame, sy = y + 0.3 * cfg.background_drift * frame;
            double acc = 0.0;
            for (const Wave& w : waves) acc += std::sin(w.kx * sx + w.ky * sy + w.phase);
            v += 0.16 * (0.5 + 0.5 * acc / static_cast<double>(waves.size()));
            tint[0] = 0.75;
            tint[1] = 0.9;
            tint[2] = 1.15;
        }
        v = std::max(v, 0.0);
        for (int c = 0; c < 3; ++c) rgb[c] = v * tint[c];
    }
};

}  // namespace

void SynthConfig::validate() const {
    auto fail = [&](const std::string& msg) { throw std::invalid_argument("synth config \"" + name + "\": " + msg); };
    if (frame_count < 2) fail("frame_count must be >= 2");
    if (width < 8 || height < 8) fail("frame dimensions must be at least 8x8");
    if (polygon.size() < 3) fail("polygon needs at least 3 vertices");
    if (!(start_scale > 0)) fail("start_scale must be > 0");
    if (!(gain_start > 0) || !(gain_step > 0)) fail("illumination gain must be > 0");
    if (noise_sigma < 0) fail("noise_sigma must be >= 0");
    if (deformation < 0) fail("deformation must be >= 0");
    if (!motion.empty() && motion.size() != 1 && motion.size() != static_cast<std::size_t>(frame_count - 1))
        fail("motion script must have 0, 1 or frame_count - 1 steps");
    for (const auto& m : motion)
        if (!(m.scale > 0)) fail("motion scale ratios must be > 0");
    const auto poses = target_poses(*this);
    for (int t = 0; t < frame_count; ++t) {
        const auto verts = frame_vertices(*this, poses[t], t);
        for (const auto& [x, y] : verts)
            if (x < 1.0 || y < 1.0 || x > width - 1.0 || y > height - 1.0)
                fail("target leaves the frame at frame " + std::to_string(t + 1));
    }
}

std::vector<TargetPose> target_poses(const SynthConfig& cfg) {
    std::vector<TargetPose> poses;
    TargetPose p{cfg.start_cx, cfg.start_cy, cfg.start_rotation, cfg.start_scale};
    poses.push_back(p);
    for (int t = 1; t < cfg.frame_count; ++t) {
        MotionStep m;
        if (cfg.motion.size() == 1) m = cfg.motion.front();
        else if (!cfg.motion.empty()) m = cfg.motion[static_cast<std::size_t>(t - 1)];
        p.cx += m.dx;
        p.cy += m.dy;
        p.rotation += m.rotation;
        p.scale *= m.scale;
        poses.push_back(p);
    }
    return poses;
}

std::pair<Sequence, GroundTruth> render_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const Texture texture(cfg.texture_seed);
    const Background background(cfg);
    const auto poses = target_poses(cfg);

    Sequence seq;
    seq.name = cfg.name;
    GroundTruth gt;
    gt.masks.emplace();
    for (int t = 0; t < cfg.frame_count; ++t) {
        const TargetPose& pose = poses[t];
        const auto verts = frame_vertices(cfg, pose, t);
        double minx = cfg.width, miny = cfg.height, maxx = 0, maxy = 0;
        for (const auto& [x, y] : verts) {
            minx = std::min(minx, x);
            miny = std::min(miny, y);
            maxx = std::max(maxx, x);
            maxy = std::max(maxy, y);
        }
        const double gain = cfg.gain_start * std::pow(cfg.gain_step, t);
        const double c = std::cos(deg2rad(-pose.rotation)), s = std::sin(deg2rad(-pose.rotation));
        Rng noise(mix_seed(cfg.seed, 5000 + static_cast<std::uint64_t>(t)));

        Image frame(cfg.width, cfg.height, 3);
        Mask mask(cfg.width, cfg.height);
        for (int y = 0; y < cfg.height; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                int hits = 0;
                if (x + 1 >= minx && x <= maxx && y + 1 >= miny && y <= maxy) {
                    for (int sy = 0; sy < kSuper; ++sy)
                        for (int sx = 0; sx < kSuper; ++sx)
                            hits += point_in_polygon(verts, x + (sx + 0.5) / kSuper, y + (sy + 0.5) / kSuper);
                }
                const double coverage = static_cast<double>(hits) / (kSuper * kSuper);
                mask(x, y) = 2 * hits >= kSuper * kSuper ? 1 : 0;

                double bg[3];
                background.sample(x + 0.5, y + 0.5, t, bg);
                double fg[3] = {0, 0, 0};
                if (hits > 0) {
                    const double dx = x + 0.5 - pose.cx, dy = y + 0.5 - pose.cy;
                    texture.sample((c * dx - s * dy) / pose.scale, (s * dx + c * dy) / pose.scale, fg);
                }
                for (int ch = 0; ch < 3; ++ch) {
                    double v = gain * (coverage * fg[ch] + (1.0 - coverage) * bg[ch]);
                    if (cfg.noise_sigma > 0) v += cfg.noise_sigma * noise.normal();
                    frame.at(x, y, ch) = v;
                }
            }
        }
        quantize_8bit(frame);
        if (mask.count() == 0) throw std::invalid_argument("synth: target covers no pixel at frame " + std::to_string(t + 1));
        gt.boxes.push_back(refine_from_mask(mask, 0, 0));
        gt.masks->push_back(std::move(mask));
        seq.frames.push_back(std::move(frame));
        seq.frame_paths.push_back("frames/" + frame_file_name(static_cast<std::size_t>(t) + 1));
    }
    return {std::move(seq), std::move(gt)};
}

std::pair<Sequence, GroundTruth> generate_synthetic(const SynthConfig& cfg, const fs::path& out) {
    auto result = render_synthetic(cfg);
    write_sequence(out, result.first, result.second);
    for (std::size_t i = 0; i < result.first.frame_paths.size(); ++i)
        result.first.frame_paths[i] = (out / "frames" / frame_file_name(i + 1)).string();
    return result;
}

ChallengeFlags challenge_flags(int row) {
    // spin, deformation, scale, background, illumination
    switch (row) {
        case 1: return {false, false, true, false, false};
        case 2: return {true, true, false, false, false};
        case 3: return {true, true, false, false, false};
        case 4: return {false, false, true, false, true};
        case 5: return {false, false, true, false, true};
        case 6: return {true, false, true, true, false};
        case 7: return {true, false, false, false, false};
        default: throw std::out_of_range("challenge suite rows are 1..7");
    }
}

std::vector<SynthConfig> split_challenge_suite(std::uint64_t seed) {
    std::vector<SynthConfig> suite;
    const std::vector<Point> hull = {{-40, 0}, {-24, -20}, {24, -20}, {40, 0}, {24, 20}, {-24, 20}};
    for (int row = 1; row <= 7; ++row) {
        const ChallengeFlags f = challenge_flags(row);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(row)));
        SynthConfig cfg;
        char name[16];
        std::snprintf(name, sizeof name, "seq%02d", row);
        cfg.name = name;
        cfg.frame_count = 80;
        cfg.width = 320;
        cfg.height = 240;
        cfg.polygon = hull;
        cfg.texture_seed = mix_seed(seed, 100 + static_cast<std::uint64_t>(row));
        cfg.seed = mix_seed(seed, 200 + static_cast<std::uint64_t>(row));
        cfg.start_cx = 150.0 + rng.uniform(-10, 10);
        cfg.start_cy = 115.0 + rng.uniform(-8, 8);
        cfg.noise_sigma = 0.01;

        MotionStep step;
        step.dx = rng.uniform(-0.5, 0.5);
        step.dy = rng.uniform(-0.3, 0.3);
        if (f.spin) step.rotation = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(1.5, 3.0);
        if (f.scale_change) {
            if (row == 1) {
                cfg.start_scale = 0.55;
                step.scale = 1.008;
            } else if (row == 5) {
                cfg.start_scale = 1.3;
                step.scale = 0.995;
            } else {
                cfg.start_scale = 0.9;
                step.scale = row == 6 ? 1.004 : 1.006;
            }
        }
        cfg.motion = {step};
        if (f.deformation) cfg.deformation = 1.5 + 0.5 * (row - 2);
        if (f.illumination) {
            if (row == 4) {
                cfg.gain_start = 1.0;
                cfg.gain_step = std::pow(0.55, 1.0 / (cfg.frame_count - 1));
            } else {
                cfg.gain_start = 0.6;
                cfg.gain_step = std::pow(1.0 / 0.6, 1.0 / (cfg.frame_count - 1));
            }
        }
        if (f.background_change) cfg.background = BackgroundMode::drifting_texture;
        else if (row == 3 || row == 5) cfg.background = BackgroundMode::clutter;
        suite.push_back(std::move(cfg));
    }
    return suite;
}

}  // namespace sslt
