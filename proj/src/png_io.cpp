#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sslt/imaging.hpp"

namespace sslt {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path.string());
    return f;
}

[[noreturn]] void png_fail(const std::filesystem::path& path, const char* what) {
    throw std::runtime_error(path.string() + ": " + what);
}

struct Raw8 {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> bytes;
};

Raw8 read_raw(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8)) png_fail(path, "not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) png_fail(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        png_fail(path, "png_create_info_struct failed");
    }
    Raw8 raw;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        png_fail(path, "corrupt PNG data");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    raw.width = static_cast<int>(png_get_image_width(png, info));
    raw.height = static_cast<int>(png_get_image_height(png, info));
    raw.channels = png_get_channels(png, info);
    if (raw.channels != 1 && raw.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        png_fail(path, "unsupported channel layout");
    }
    const std::size_t stride = png_get_rowbytes(png, info);
    raw.bytes.resize(stride * raw.height);
    rows.resize(static_cast<std::size_t>(raw.height));
    for (int y = 0; y < raw.height; ++y) rows[y] = raw.bytes.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return raw;
}

void write_raw(const std::filesystem::path& path, const Raw8& raw) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) png_fail(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        png_fail(path, "png_create_info_struct failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(raw.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        png_fail(path, "PNG write failed");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(raw.width), static_cast<png_uint_32>(raw.height), 8,
                 raw.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(raw.width) * raw.channels;
    for (int y = 0; y < raw.height; ++y) rows[y] = const_cast<png_bytep>(raw.bytes.data() + stride * y);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
    const Raw8 raw = read_raw(path);
    Image img(raw.width, raw.height, raw.channels);
    auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = raw.bytes[i] / 255.0;
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    Raw8 raw{img.width(), img.height(), img.channels(), {}};
    raw.bytes.resize(img.data().size());
    const auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i)
        raw.bytes[i] = static_cast<std::uint8_t>(std::lround(std::clamp(d[i], 0.0, 1.0) * 255.0));
    write_raw(path, raw);
}

Mask read_mask_png(const std::filesystem::path& path) {
    const Raw8 raw = read_raw(path);
    Mask mask(raw.width, raw.height);
    for (int i = 0, n = raw.width * raw.height; i < n; ++i) {
        // multi-channel masks use the first channel
        mask.data()[i] = raw.bytes[static_cast<std::size_t>(i) * raw.channels] > 127 ? 1 : 0;
    }
    return mask;
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
    Raw8 raw{mask.width(), mask.height(), 1, {}};
    raw.bytes.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) raw.bytes[i] = mask.data()[i] ? 255 : 0;
    write_raw(path, raw);
}

}  // namespace sslt
