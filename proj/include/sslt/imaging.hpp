#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "sslt/box.hpp"

namespace sslt {

/// Row-major 2-D grid of T. Base for scalar maps, masks and spectra.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(checked_area(width, height)), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    bool same_dims(int w, int h) const { return width_ == w && height_ == h; }
    template <typename U>
    bool same_dims(const Grid<U>& o) const { return width_ == o.width() && height_ == o.height(); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static long checked_area(int w, int h) {
        if (w < 0 || h < 0) throw std::invalid_argument("grid dimensions must be non-negative");
        return static_cast<long>(w) * h;
    }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

class ScalarMap : public Grid<double> {
public:
    using Grid<double>::Grid;
};

class Mask : public Grid<std::uint8_t> {
public:
    using Grid<std::uint8_t>::Grid;
    std::size_t count() const;
};

class ComplexGrid : public Grid<std::complex<double>> {
public:
    using Grid<std::complex<double>>::Grid;
};

/// H x W x C raster with interleaved channels and values in [0, 1].
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<double> data_;
};

enum class Interp { bilinear, nearest };

/// Luma 0.299 R + 0.587 G + 0.114 B; single-channel images pass through.
ScalarMap to_grayscale(const Image& img);
Image from_scalar_map(const ScalarMap& map);

/// Sub-raster at the rasterized box, clamped to the image.
Image crop(const Image& img, const Box& box);
Image crop(const Image& img, const RasterRect& rect);
Mask crop(const Mask& mask, const RasterRect& rect);

/// Corner-aligned resampling: the first and last samples sit on the corners.
Image resize(const Image& img, int width, int height, Interp mode = Interp::bilinear);
ScalarMap resize(const ScalarMap& map, int width, int height, Interp mode = Interp::bilinear);
Mask resize(const Mask& mask, int width, int height);

Image flip_horizontal(const Image& img);
Mask flip_horizontal(const Mask& mask);

/// Unnormalized forward 2-D DFT.
ComplexGrid dft2(const ScalarMap& map);
ComplexGrid dft2(const ComplexGrid& grid);
/// Inverse 2-D DFT scaled by 1 / (W H).
ComplexGrid idft2_complex(const ComplexGrid& grid);
/// Real part of the inverse transform.
ScalarMap idft2(const ComplexGrid& grid);

/// Separable Gaussian with radius ceil(3 sigma) and replicated borders.
ScalarMap gaussian_blur(const ScalarMap& map, double sigma);
std::vector<double> gaussian_kernel(double sigma);

/// 8-bit PNG I/O. Gray and RGB images load as 1 and 3 channels.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);
/// Masks are stored as gray PNGs with values {0, 255}; reading binarizes at > 127.
Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

/// Round every value to the nearest 1/255 step, as a save/load cycle would.
void quantize_8bit(Image& img);

}  // namespace sslt
