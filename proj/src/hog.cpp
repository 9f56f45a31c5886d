#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sslt/tracker.hpp"

namespace sslt {
namespace {

constexpr double kEps = 1e-6;
constexpr double kClip = 0.2;

}  // namespace

std::vector<ScalarMap> extract_hog(const ScalarMap& patch, int cell, int bins) {
    if (cell <= 0) throw std::invalid_argument("extract_hog: cell size must be positive");
    if (bins <= 0) throw std::invalid_argument("extract_hog: bin count must be positive");
    if (patch.empty()) throw std::invalid_argument("extract_hog: empty patch");

    const int nx = (patch.width() + cell - 1) / cell;
    const int ny = (patch.height() + cell - 1) / cell;
    const int W = nx * cell, H = ny * cell;
    auto px = [&](int x, int y) {
        return patch(std::clamp(x, 0, patch.width() - 1), std::clamp(y, 0, patch.height() - 1));
    };

    // raw histograms, [cell][bin]
    std::vector<double> hist(static_cast<std::size_t>(nx) * ny * bins, 0.0);
    const double bin_width = std::numbers::pi / bins;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double gx = px(x + 1, y) - px(x - 1, y);
            const double gy = px(x, y + 1) - px(x, y - 1);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            if (!std::isfinite(mag)) throw std::domain_error("extract_hog: non-finite pixel values");
            double theta = std::atan2(gy, gx);
            if (theta < 0) theta += std::numbers::pi;
            if (theta >= std::numbers::pi) theta -= std::numbers::pi;
            const double pos = theta / bin_width;
            const int b0 = static_cast<int>(std::floor(pos)) % bins;
            const int b1 = (b0 + 1) % bins;
            const double frac = pos - std::floor(pos);
            double* h = &hist[(static_cast<std::size_t>(y / cell) * nx + x / cell) * bins];
            h[b0] += mag * (1.0 - frac);
            h[b1] += mag * frac;
        }
    }

    // Blocks are indexed by their top-left cell in [-1, n-1]; cells outside
    // the grid replicate the border cell.
    const int bx_n = nx + 1, by_n = ny + 1;
    std::vector<double> norm1(static_cast<std::size_t>(bx_n) * by_n), norm2(norm1.size());
    auto cell_hist = [&](int cx, int cy) {
        return &hist[(static_cast<std::size_t>(std::clamp(cy, 0, ny - 1)) * nx + std::clamp(cx, 0, nx - 1)) * bins];
    };
    for (int by = -1; by < ny; ++by) {
        for (int bx = -1; bx < nx; ++bx) {
            double e = 0.0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double* h = cell_hist(bx + dx, by + dy);
                    for (int b = 0; b < bins; ++b) e += h[b] * h[b];
                }
            const double n1 = std::sqrt(e + kEps * kEps);
            double e2 = 0.0;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const double* h = cell_hist(bx + dx, by + dy);
                    for (int b = 0; b < bins; ++b) {
                        const double v = std::min(h[b] / n1, kClip);
                        e2 += v * v;
                    }
                }
            const std::size_t i = static_cast<std::size_t>(by + 1) * bx_n + (bx + 1);
            norm1[i] = n1;
            norm2[i] = std::sqrt(e2 + kEps * kEps);
        }
    }

    std::vector<ScalarMap> out(static_cast<std::size_t>(bins), ScalarMap(nx, ny));
    for (int cy = 0; cy < ny; ++cy) {
        for (int cx = 0; cx < nx; ++cx) {
            const double* h = cell_hist(cx, cy);
            for (int b = 0; b < bins; ++b) {
                double acc = 0.0;
                for (int oy = -1; oy <= 0; ++oy)
                    for (int ox = -1; ox <= 0; ++ox) {
                        const std::size_t i = static_cast<std::size_t>(cy + oy + 1) * bx_n + (cx + ox + 1);
                        acc += std::min(h[b] / norm1[i], kClip) / norm2[i];
                    }
                out[b](cx, cy) = acc / 4.0;
            }
        }
    }
    return out;
}

}  // namespace sslt
