#include <algorithm>
#include <cmath>
#include <numeric>

#include "sslt/metrics.hpp"

namespace sslt {

std::vector<double> default_dp_thresholds() {
    std::vector<double> t(101);
    for (int i = 0; i <= 100; ++i) t[i] = i;
    return t;
}

std::vector<double> default_op_thresholds() {
    std::vector<double> t(101);
    for (int i = 0; i <= 100; ++i) t[i] = i / 100.0;
    return t;
}

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

CurveReport dp_curve(const std::vector<Box>& pred, const std::vector<Box>& gt, const std::vector<double>& thresholds) {
    check_lengths(pred.size(), gt.size(), "dp_curve");
    std::vector<double> dist(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) dist[i] = center_distance(pred[i], gt[i]);
    auto rate = [&](double t) {
        const auto n = std::count_if(dist.begin(), dist.end(), [t](double d) { return d < t; });
        return static_cast<double>(n) / static_cast<double>(dist.size());
    };
    CurveReport r;
    r.thresholds = thresholds;
    for (double t : thresholds) r.values.push_back(rate(t));
    r.score_at_reference = rate(kDpReferenceThreshold);
    r.auc = mean_of(r.values);
    return r;
}

CurveReport op_curve(const std::vector<Box>& pred, const std::vector<Box>& gt, const std::vector<double>& thresholds) {
    check_lengths(pred.size(), gt.size(), "op_curve");
    std::vector<double> overlap(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) overlap[i] = iou(pred[i], gt[i]);
    auto rate = [&](double t) {
        const auto n = std::count_if(overlap.begin(), overlap.end(), [t](double o) { return o > t; });
        return static_cast<double>(n) / static_cast<double>(overlap.size());
    };
    CurveReport r;
    r.thresholds = thresholds;
    for (double t : thresholds) r.values.push_back(rate(t));
    r.score_at_reference = rate(0.5);
    r.auc = mean_of(r.values);
    return r;
}

double mask_iou(const Mask& a, const Mask& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("mask_iou: dimension mismatch");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool x = a.data()[i] != 0, y = b.data()[i] != 0;
        inter += x && y;
        uni += x || y;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------
// S-measure

namespace {

constexpr double kEps = 1e-12;

double object_score(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double n = static_cast<double>(values.size());
    const double mu = mean_of(values);
    double var = 0.0;
    for (double v : values) var += (v - mu) * (v - mu);
    const double sd = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return 2.0 * mu / (mu * mu + 1.0 + sd + kEps);
}

double block_ssim(const ScalarMap& sm, const Mask& gt, int x0, int y0, int x1, int y1) {
    const double n = static_cast<double>(x1 - x0) * (y1 - y0);
    double mx = 0, my = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            mx += sm(x, y);
            my += gt(x, y) ? 1.0 : 0.0;
        }
    mx /= n;
    my /= n;
    double vx = 0, vy = 0, cxy = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double dx = sm(x, y) - mx, dy = (gt(x, y) ? 1.0 : 0.0) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    const double denom = n - 1.0 + kEps;
    vx /= denom;
    vy /= denom;
    cxy /= denom;
    const double alpha = 4.0 * mx * my * cxy;
    const double beta = (mx * mx + my * my) * (vx + vy);
    if (alpha != 0.0) return alpha / (beta + kEps);
    return beta == 0.0 ? 1.0 : 0.0;
}

double mask_mean(const Mask& gt) { return static_cast<double>(gt.count()) / static_cast<double>(gt.size()); }

double map_mean(const ScalarMap& sm) { return mean_of(sm.values()); }

void check_dims(const ScalarMap& sm, const Mask& gt) {
    if (!sm.same_dims(gt)) throw std::invalid_argument("s_measure: dimension mismatch");
    if (gt.empty()) throw std::invalid_argument("s_measure: empty input");
}

}  // namespace

double s_object(const ScalarMap& sm, const Mask& gt) {
    check_dims(sm, gt);
    std::vector<double> fg, bg;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt.data()[i]) fg.push_back(sm.data()[i]);
        else bg.push_back(1.0 - sm.data()[i]);
    }
    const double mu = mask_mean(gt);
    return mu * object_score(fg) + (1.0 - mu) * object_score(bg);
}

double s_region(const ScalarMap& sm, const Mask& gt) {
    check_dims(sm, gt);
    const int W = gt.width(), H = gt.height();
    double sx = 0, sy = 0;
    std::size_t total = 0;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (gt(x, y)) {
                sx += x + 1;
                sy += y + 1;
                ++total;
            }
    // split after the (1-based, rounded) centroid column/row
    int cx = W / 2, cy = H / 2;
    if (total > 0) {
        cx = static_cast<int>(std::lround(sx / static_cast<double>(total)));
        cy = static_cast<int>(std::lround(sy / static_cast<double>(total)));
    }
    cx = std::clamp(cx, 0, W);
    cy = std::clamp(cy, 0, H);

    const int xs[3] = {0, cx, W}, ys[3] = {0, cy, H};
    double score = 0.0;
    for (int by = 0; by < 2; ++by)
        for (int bx = 0; bx < 2; ++bx) {
            const int x0 = xs[bx], x1 = xs[bx + 1], y0 = ys[by], y1 = ys[by + 1];
            if (x1 <= x0 || y1 <= y0) continue;
            std::size_t fg = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) fg += gt(x, y) != 0;
            if (fg == 0) continue;
            const double w = static_cast<double>(fg) / static_cast<double>(total);
            score += w * block_ssim(sm, gt, x0, y0, x1, y1);
        }
    return score;
}

double s_measure(const ScalarMap& sm, const Mask& gt) {
    check_dims(sm, gt);
    const double mu = mask_mean(gt);
    if (mu == 0.0) return 1.0 - map_mean(sm);
    if (mu == 1.0) return map_mean(sm);
    const double alpha = 0.5;
    return std::max(0.0, alpha * s_object(sm, gt) + (1.0 - alpha) * s_region(sm, gt));
}

// ---------------------------------------------------------------------------
// J and F

double temporal_decay(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    const double n = static_cast<double>(x.size());
    std::size_t ids[5];
    for (int i = 0; i < 5; ++i) {
        const double v = 1.0 + i * (n - 1.0) / 4.0;
        ids[i] = static_cast<std::size_t>(std::floor(v + 1e-10 + 0.5)) - 1;
    }
    auto bin_mean = [&](int b) {
        double s = 0.0;
        for (std::size_t i = ids[b]; i <= ids[b + 1]; ++i) s += x[i];
        return s / static_cast<double>(ids[b + 1] - ids[b] + 1);
    };
    return bin_mean(0) - bin_mean(3);
}

TemporalStats temporal_stats(const std::vector<double>& per_frame) {
    TemporalStats s;
    if (per_frame.empty()) return s;
    s.mean = mean_of(per_frame);
    s.recall = static_cast<double>(std::count_if(per_frame.begin(), per_frame.end(), [](double v) { return v > 0.5; })) /
               static_cast<double>(per_frame.size());
    s.decay = temporal_decay(per_frame);
    return s;
}

namespace {

void check_sequences(const std::vector<Mask>& pred, const std::vector<Mask>& gt, const char* what) {
    check_lengths(pred.size(), gt.size(), what);
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (!pred[i].same_dims(gt[i]))
            throw std::invalid_argument(std::string(what) + ": mask dimensions differ at frame " + std::to_string(i + 1));
}

}  // namespace

TemporalStats j_stats(const std::vector<Mask>& pred, const std::vector<Mask>& gt) {
    check_sequences(pred, gt, "j_stats");
    std::vector<double> j(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) j[i] = mask_iou(pred[i], gt[i]);
    return temporal_stats(j);
}

Mask boundary(const Mask& m) {
    const int W = m.width(), H = m.height();
    Mask b(W, H);
    auto fg = [&](int x, int y) { return x >= 0 && y >= 0 && x < W && y < H && m(x, y) != 0; };
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (fg(x, y) && !(fg(x - 1, y) && fg(x + 1, y) && fg(x, y - 1) && fg(x, y + 1))) b(x, y) = 1;
    return b;
}

Mask dilate_disk(const Mask& m, int radius) {
    if (radius <= 0) return m;
    const int W = m.width(), H = m.height();
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
    Mask out(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (!m(x, y)) continue;
            for (const auto& [dx, dy] : offsets) {
                const int u = x + dx, v = y + dy;
                if (u >= 0 && v >= 0 && u < W && v < H) out(u, v) = 1;
            }
        }
    return out;
}

BoundaryScore boundary_f(const Mask& pred, const Mask& gt, double tolerance) {
    if (!pred.same_dims(gt)) throw std::invalid_argument("boundary_f: dimension mismatch");
    if (!(tolerance > 0)) throw std::invalid_argument("boundary_f: tolerance must be > 0");
    const Mask pb = boundary(pred), gb = boundary(gt);
    const std::size_t np = pb.count(), ng = gb.count();
    if (np == 0 && ng == 0) return {1.0, 1.0, 1.0};
    if (np == 0 || ng == 0) return {np == 0 ? 1.0 : 0.0, ng == 0 ? 1.0 : 0.0, 0.0};
    const double diag = std::hypot(static_cast<double>(gt.width()), static_cast<double>(gt.height()));
    const int radius = static_cast<int>(std::ceil(tolerance * diag));
    const Mask gd = dilate_disk(gb, radius), pd = dilate_disk(pb, radius);
    std::size_t pm = 0, gm = 0;
    for (std::size_t i = 0; i < pb.size(); ++i) {
        pm += pb.data()[i] && gd.data()[i];
        gm += gb.data()[i] && pd.data()[i];
    }
    BoundaryScore s;
    s.precision = static_cast<double>(pm) / static_cast<double>(np);
    s.recall = static_cast<double>(gm) / static_cast<double>(ng);
    s.f = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

TemporalStats f_stats(const std::vector<Mask>& pred, const std::vector<Mask>& gt, double tolerance) {
    check_sequences(pred, gt, "f_stats");
    std::vector<double> f(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) f[i] = boundary_f(pred[i], gt[i], tolerance).f;
    return temporal_stats(f);
}

}  // namespace sslt
