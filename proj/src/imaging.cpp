#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sslt/imaging.hpp"

namespace sslt {

std::size_t Mask::count() const {
    std::size_t n = 0;
    for (auto v : values()) n += v != 0;
    return n;
}

Image::Image(int width, int height, int channels, double fill) : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0) throw std::invalid_argument("image dimensions must be non-negative");
    if (channels != 1 && channels != 3) throw std::invalid_argument("image channels must be 1 or 3");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ScalarMap to_grayscale(const Image& img) {
    if (img.channels() != 1 && img.channels() != 3)
        throw std::invalid_argument("to_grayscale: unsupported channel count " + std::to_string(img.channels()));
    ScalarMap out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out(x, y) = img.channels() == 1
                            ? img.at(x, y)
                            : 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
        }
    }
    return out;
}

Image from_scalar_map(const ScalarMap& map) {
    Image out(map.width(), map.height(), 1);
    std::copy(map.data().begin(), map.data().end(), out.data().begin());
    return out;
}

namespace {

RasterRect checked_rect(const RasterRect& rect, int width, int height) {
    const int x0 = std::clamp(rect.x, 0, width);
    const int y0 = std::clamp(rect.y, 0, height);
    const int x1 = std::clamp(rect.right(), 0, width);
    const int y1 = std::clamp(rect.bottom(), 0, height);
    if (rect.empty()) throw std::invalid_argument("crop: box has zero rasterized area");
    if (x1 <= x0 || y1 <= y0) throw std::invalid_argument("crop: box lies entirely outside the image");
    return {x0, y0, x1 - x0, y1 - y0};
}

// Corner-aligned source coordinate of destination sample i.
double source_coord(int i, int src_n, int dst_n) {
    if (dst_n == 1) return (src_n - 1) / 2.0;
    return static_cast<double>(i) * (src_n - 1) / (dst_n - 1);
}

struct Tap {
    int i0, i1;
    double t;
};

std::vector<Tap> bilinear_taps(int src_n, int dst_n) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst_n));
    for (int i = 0; i < dst_n; ++i) {
        const double s = source_coord(i, src_n, dst_n);
        int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, src_n - 1);
        int i1 = std::min(i0 + 1, src_n - 1);
        taps[i] = {i0, i1, s - i0};
    }
    return taps;
}

std::vector<int> nearest_taps(int src_n, int dst_n) {
    std::vector<int> taps(static_cast<std::size_t>(dst_n));
    for (int i = 0; i < dst_n; ++i)
        taps[i] = std::clamp(static_cast<int>(std::lround(source_coord(i, src_n, dst_n))), 0, src_n - 1);
    return taps;
}

void check_target(int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("resize: zero target dimension");
}

}  // namespace

Image crop(const Image& img, const RasterRect& rect) {
    const RasterRect r = checked_rect(rect, img.width(), img.height());
    Image out(r.w, r.h, img.channels());
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x)
            for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(r.x + x, r.y + y, c);
    return out;
}

Image crop(const Image& img, const Box& box) { return crop(img, rasterize(box)); }

Mask crop(const Mask& mask, const RasterRect& rect) {
    const RasterRect r = checked_rect(rect, mask.width(), mask.height());
    Mask out(r.w, r.h);
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) out(x, y) = mask(r.x + x, r.y + y);
    return out;
}

Image resize(const Image& img, int width, int height, Interp mode) {
    check_target(width, height);
    if (img.empty()) throw std::invalid_argument("resize: empty source");
    if (img.width() == width && img.height() == height) return img;
    Image out(width, height, img.channels());
    const int C = img.channels();
    if (mode == Interp::nearest) {
        const auto tx = nearest_taps(img.width(), width);
        const auto ty = nearest_taps(img.height(), height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < C; ++c) out.at(x, y, c) = img.at(tx[x], ty[y], c);
        return out;
    }
    const auto tx = bilinear_taps(img.width(), width);
    const auto ty = bilinear_taps(img.height(), height);
    for (int y = 0; y < height; ++y) {
        const Tap& vy = ty[y];
        for (int x = 0; x < width; ++x) {
            const Tap& vx = tx[x];
            for (int c = 0; c < C; ++c) {
                const double top = img.at(vx.i0, vy.i0, c) * (1 - vx.t) + img.at(vx.i1, vy.i0, c) * vx.t;
                const double bot = img.at(vx.i0, vy.i1, c) * (1 - vx.t) + img.at(vx.i1, vy.i1, c) * vx.t;
                out.at(x, y, c) = std::clamp(top * (1 - vy.t) + bot * vy.t, 0.0, 1.0);
            }
        }
    }
    return out;
}

ScalarMap resize(const ScalarMap& map, int width, int height, Interp mode) {
    check_target(width, height);
    if (map.empty()) throw std::invalid_argument("resize: empty source");
    if (map.same_dims(width, height)) return map;
    ScalarMap out(width, height);
    if (mode == Interp::nearest) {
        const auto tx = nearest_taps(map.width(), width);
        const auto ty = nearest_taps(map.height(), height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out(x, y) = map(tx[x], ty[y]);
        return out;
    }
    const auto tx = bilinear_taps(map.width(), width);
    const auto ty = bilinear_taps(map.height(), height);
    for (int y = 0; y < height; ++y) {
        const Tap& vy = ty[y];
        for (int x = 0; x < width; ++x) {
            const Tap& vx = tx[x];
            const double top = map(vx.i0, vy.i0) * (1 - vx.t) + map(vx.i1, vy.i0) * vx.t;
            const double bot = map(vx.i0, vy.i1) * (1 - vx.t) + map(vx.i1, vy.i1) * vx.t;
            out(x, y) = top * (1 - vy.t) + bot * vy.t;
        }
    }
    return out;
}

Mask resize(const Mask& mask, int width, int height) {
    check_target(width, height);
    if (mask.empty()) throw std::invalid_argument("resize: empty source");
    if (mask.same_dims(width, height)) return mask;
    Mask out(width, height);
    const auto tx = nearest_taps(mask.width(), width);
    const auto ty = nearest_taps(mask.height(), height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out(x, y) = mask(tx[x], ty[y]);
    return out;
}

Image flip_horizontal(const Image& img) {
    Image out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(img.width() - 1 - x, y, c);
    return out;
}

Mask flip_horizontal(const Mask& mask) {
    Mask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) out(x, y) = mask(mask.width() - 1 - x, y);
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: negative sigma");
    if (sigma == 0.0) return {1.0};
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (auto& v : k) v /= sum;
    return k;
}

ScalarMap gaussian_blur(const ScalarMap& map, double sigma) {
    const auto k = gaussian_kernel(sigma);
    if (k.size() == 1) return map;
    const int r = static_cast<int>(k.size() / 2);
    const int W = map.width(), H = map.height();
    ScalarMap tmp(W, H), out(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * map(std::clamp(x + i, 0, W - 1), y);
            tmp(x, y) = acc;
        }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(x, std::clamp(y + i, 0, H - 1));
            out(x, y) = acc;
        }
    return out;
}

void quantize_8bit(Image& img) {
    for (auto& v : img.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

}  // namespace sslt
