#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sslt/tracker.hpp"

namespace sslt {

void TrackerConfig::validate() const {
    if (!(padding > 1.0)) throw std::invalid_argument("tracker.padding must be > 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("tracker.lambda must be > 0");
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0))
        throw std::invalid_argument("tracker.learning_rate must be in [0, 1]");
    if (!(sigma_factor > 0.0)) throw std::invalid_argument("tracker.sigma_factor must be > 0");
    if (cell_size <= 0) throw std::invalid_argument("tracker.cell_size must be positive");
    if (orientation_bins <= 0) throw std::invalid_argument("tracker.orientation_bins must be positive");
    if (max_model_cells < min_model_cells || min_model_cells < 2)
        throw std::invalid_argument("tracker model cell bounds are inconsistent");
    if (std::find(scale_pool.begin(), scale_pool.end(), 1.0) == scale_pool.end())
        throw std::invalid_argument("tracker.scale_pool must contain 1.0");
    for (double s : scale_pool)
        if (!(s > 0.0)) throw std::invalid_argument("tracker.scale_pool ratios must be > 0");
}

Box TrackerState::box() const {
    const double w = target_w * scale, h = target_h * scale;
    return clip_to_frame({cx - w / 2.0, cy - h / 2.0, w, h}, frame_width, frame_height);
}

namespace {

// Bilinear resampling of a src_w x src_h window centered at (cx, cy) onto an
// out_w x out_h grid, pixel-center aligned, borders replicated.
ScalarMap sample_window(const ScalarMap& gray, double cx, double cy, double src_w, double src_h, int out_w,
                        int out_h) {
    ScalarMap out(out_w, out_h);
    const double sx = src_w / out_w, sy = src_h / out_h;
    const double x0 = cx - src_w / 2.0, y0 = cy - src_h / 2.0;
    const int W = gray.width(), H = gray.height();
    for (int j = 0; j < out_h; ++j) {
        const double fy = y0 + (j + 0.5) * sy - 0.5;
        const int iy = static_cast<int>(std::floor(fy));
        const double ty = fy - iy;
        const int ya = std::clamp(iy, 0, H - 1), yb = std::clamp(iy + 1, 0, H - 1);
        for (int i = 0; i < out_w; ++i) {
            const double fx = x0 + (i + 0.5) * sx - 0.5;
            const int ix = static_cast<int>(std::floor(fx));
            const double tx = fx - ix;
            const int xa = std::clamp(ix, 0, W - 1), xb = std::clamp(ix + 1, 0, W - 1);
            out(i, j) = (gray(xa, ya) * (1 - tx) + gray(xb, ya) * tx) * (1 - ty) +
                        (gray(xa, yb) * (1 - tx) + gray(xb, yb) * tx) * ty;
        }
    }
    return out;
}

std::vector<ComplexGrid> features(const TrackerState& st, const ScalarMap& gray, double scale_ratio) {
    const TrackerConfig& cfg = st.config;
    const double s = st.scale * scale_ratio;
    const ScalarMap patch = sample_window(gray, st.cx, st.cy, st.window_w * s, st.window_h * s,
                                          st.cells_x * cfg.cell_size, st.cells_y * cfg.cell_size);
    auto hog = extract_hog(patch, cfg.cell_size, cfg.orientation_bins);
    std::vector<ComplexGrid> out;
    out.reserve(hog.size());
    for (auto& ch : hog) {
        for (int y = 0; y < st.cells_y; ++y)
            for (int x = 0; x < st.cells_x; ++x) ch(x, y) *= st.window(x, y);
        out.push_back(dft2(ch));
    }
    return out;
}

ScalarMap hann2d(int w, int h) {
    auto hann = [](int n, int i) {
        return n <= 1 ? 1.0 : 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    };
    ScalarMap out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(x, y) = hann(w, x) * hann(h, y);
    return out;
}

void blend_filter(TrackerState& st, const ScalarMap& gray, double rate) {
    const auto X = features(st, gray, 1.0);
    const std::size_t n = st.denominator.size();
    std::vector<double> energy(n, st.config.lambda);
    for (std::size_t l = 0; l < X.size(); ++l) {
        auto num = st.numerator[l].data();
        const auto x = X[l].data();
        const auto y = st.label_spectrum.data();
        for (std::size_t i = 0; i < n; ++i) {
            num[i] = (1.0 - rate) * num[i] + rate * (std::conj(y[i]) * x[i]);
            energy[i] += std::norm(x[i]);
        }
    }
    auto den = st.denominator.data();
    for (std::size_t i = 0; i < n; ++i) den[i] = (1.0 - rate) * den[i] + rate * energy[i];
}

ScalarMap response_from_gray(const TrackerState& st, const ScalarMap& gray, double scale_ratio) {
    const auto Z = features(st, gray, scale_ratio);
    ComplexGrid acc(st.cells_x, st.cells_y);
    auto a = acc.data();
    for (std::size_t l = 0; l < Z.size(); ++l) {
        const auto num = st.numerator[l].data();
        const auto z = Z[l].data();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += std::conj(num[i]) * z[i];
    }
    const auto den = st.denominator.data();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] /= den[i];
    return idft2(acc);
}

}  // namespace

TrackerState track_init(const Image& frame, const Box& box, const TrackerConfig& cfg) {
    cfg.validate();
    if (!(box.w >= 4.0 && box.h >= 4.0) || !box.valid())
        throw std::invalid_argument("track_init: degenerate box " + to_string(box) + " (sides must be >= 4 px)");
    if (box.x + box.w <= 0 || box.y + box.h <= 0 || box.x >= frame.width() || box.y >= frame.height())
        throw std::invalid_argument("track_init: box " + to_string(box) + " lies outside the frame");

    TrackerState st;
    st.config = cfg;
    st.frame_width = frame.width();
    st.frame_height = frame.height();
    st.target_w = box.w;
    st.target_h = box.h;
    st.cx = box.cx();
    st.cy = box.cy();
    st.window_w = cfg.padding * box.w;
    st.window_h = cfg.padding * box.h;

    const double long_cells = std::max(st.window_w, st.window_h) / cfg.cell_size;
    const double shrink = long_cells > cfg.max_model_cells ? cfg.max_model_cells / long_cells : 1.0;
    st.cells_x = std::max(cfg.min_model_cells, static_cast<int>(std::lround(st.window_w * shrink / cfg.cell_size)));
    st.cells_y = std::max(cfg.min_model_cells, static_cast<int>(std::lround(st.window_h * shrink / cfg.cell_size)));
    st.ratio_x = st.cells_x * cfg.cell_size / st.window_w;
    st.ratio_y = st.cells_y * cfg.cell_size / st.window_h;
    st.window = hann2d(st.cells_x, st.cells_y);

    const double sigma_px = std::sqrt(box.w * box.h) * cfg.sigma_factor;
    const double sx = sigma_px * st.ratio_x / cfg.cell_size, sy = sigma_px * st.ratio_y / cfg.cell_size;
    ScalarMap label(st.cells_x, st.cells_y);
    const int lx = st.cells_x / 2, ly = st.cells_y / 2;
    for (int y = 0; y < st.cells_y; ++y)
        for (int x = 0; x < st.cells_x; ++x)
            label(x, y) = std::exp(-0.5 * ((x - lx) * (x - lx) / (sx * sx) + (y - ly) * (y - ly) / (sy * sy)));
    st.label_spectrum = dft2(label);

    st.numerator.assign(static_cast<std::size_t>(cfg.orientation_bins), ComplexGrid(st.cells_x, st.cells_y));
    st.denominator = ComplexGrid(st.cells_x, st.cells_y);
    blend_filter(st, to_grayscale(frame), 1.0);
    return st;
}

ScalarMap response_map(const TrackerState& state, const Image& frame, double scale_ratio) {
    return response_from_gray(state, to_grayscale(frame), scale_ratio);
}

void update_filter(TrackerState& state, const Image& frame, double rate) {
    blend_filter(state, to_grayscale(frame), rate);
}

std::pair<double, double> refine_peak(const ScalarMap& r, int px, int py) {
    const int W = r.width(), H = r.height();
    auto at = [&](int dx, int dy) { return r(((px + dx) % W + W) % W, ((py + dy) % H + H) % H); };
    double b = 0, c = 0, d = 0, e = 0, f = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const double v = at(dx, dy);
            b += dx * v / 6.0;
            c += dy * v / 6.0;
            e += dx * dy * v / 4.0;
            d += (dx * dx - 2.0 / 3.0) * v / 2.0;
            f += (dy * dy - 2.0 / 3.0) * v / 2.0;
        }
    // maximize a + b x + c y + d x^2 + e x y + f y^2
    const double det = 4.0 * d * f - e * e;
    double ox = 0.0, oy = 0.0;
    if (d < 0.0 && det > 0.0) {
        ox = (-2.0 * f * b + e * c) / det;
        oy = (-2.0 * d * c + e * b) / det;
    }
    return {px + std::clamp(ox, -1.0, 1.0), py + std::clamp(oy, -1.0, 1.0)};
}

Box track_step(TrackerState& st, const Image& frame) {
    if (frame.width() != st.frame_width || frame.height() != st.frame_height)
        throw std::invalid_argument("track_step: frame dimensions differ from the init frame");
    const ScalarMap gray = to_grayscale(frame);

    double best = -std::numeric_limits<double>::infinity();
    double best_ratio = 1.0;
    int best_x = 0, best_y = 0;
    ScalarMap best_map;
    for (double ratio : st.config.scale_pool) {
        ScalarMap r;
        try {
            r = response_from_gray(st, gray, ratio);
        } catch (const std::domain_error& e) {
            throw TrackerError(std::string("track_step: ") + e.what());
        }
        bool improved = false;
        for (int y = 0; y < r.height(); ++y)
            for (int x = 0; x < r.width(); ++x) {
                const double v = r(x, y);
                if (!std::isfinite(v)) throw TrackerError("track_step: non-finite correlation response");
                if (v > best) {
                    best = v;
                    best_ratio = ratio;
                    best_x = x;
                    best_y = y;
                    improved = true;
                }
            }
        if (improved) best_map = std::move(r);
    }
    const auto [px, py] = refine_peak(best_map, best_x, best_y);
    const double s = st.scale * best_ratio;
    st.cx += (px - st.cells_x / 2) * st.config.cell_size / st.ratio_x * s;
    st.cy += (py - st.cells_y / 2) * st.config.cell_size / st.ratio_y * s;
    st.cx = std::clamp(st.cx, 0.0, static_cast<double>(st.frame_width));
    st.cy = std::clamp(st.cy, 0.0, static_cast<double>(st.frame_height));
    st.scale = 0.7 * st.scale + 0.3 * st.scale * best_ratio;
    if (!std::isfinite(st.cx) || !std::isfinite(st.cy) || !std::isfinite(st.scale))
        throw TrackerError("track_step: non-finite target state");

    blend_filter(st, gray, st.config.learning_rate);
    return st.box();
}

void CorrelationFilterProposer::init(const Image& frame, const Box& box) { state_ = track_init(frame, box, cfg_); }

Box CorrelationFilterProposer::step(const Image& frame) { return track_step(state_, frame); }

void CorrelationFilterProposer::recenter(const Box& box) {
    state_.cx = box.cx();
    state_.cy = box.cy();
}

}  // namespace sslt
