#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sslt/box.hpp"
#include "sslt/imaging.hpp"

namespace sslt::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("sslt-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline Mask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution d(density);
    Mask m(w, h);
    for (auto& v : m.data()) v = d(rng);
    return m;
}

inline Mask disk_mask(int w, int h, double cx, double cy, double r) {
    Mask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m(x, y) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
    return m;
}

inline Mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    Mask m(w, h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m(x, y) = 1;
    return m;
}

/// Tight box by exhaustive scan, inclusive width and height.
inline Box brute_tight_box(const Mask& m, int ox, int oy) {
    int l = m.width(), r = -1, t = m.height(), b = -1;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m(x, y)) {
                l = std::min(l, x);
                r = std::max(r, x);
                t = std::min(t, y);
                b = std::max(b, y);
            }
    return {double(ox + l), double(oy + t), double(r - l + 1), double(b - t + 1)};
}

/// Textured blob on a flat gray background; a clean salient crop.
inline Image blob_crop(int w, int h, double cx, double cy, double rx, double ry) {
    Image img(w, h, 3, 0.15);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = (x - cx) / rx, v = (y - cy) / ry;
            if (u * u + v * v <= 1.0) {
                img.at(x, y, 0) = 0.85 + 0.1 * std::sin(0.7 * x);
                img.at(x, y, 1) = 0.7 + 0.1 * std::cos(0.5 * y);
                img.at(x, y, 2) = 0.25;
            }
        }
    return img;
}

}  // namespace sslt::test
