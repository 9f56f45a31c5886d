#pragma once

#include <cstdint>
#include <string>

namespace sslt {

class Mask;

/// Axis-aligned rectangle; (x, y) is the upper-left corner, all in pixels.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    bool valid() const;

    friend bool operator==(const Box&, const Box&) = default;
};

/// Integer pixel rectangle produced by rasterizing a Box.
struct RasterRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    bool empty() const { return w <= 0 || h <= 0; }
    friend bool operator==(const RasterRect&, const RasterRect&) = default;
};

struct GeometryConfig {
    double expand_factor = 1.5;       // sigma in the expansion rule
    double min_crop_side = 96.0;      // Tr
    double salient_min_side = 32.0;   // T_s

    void validate() const;
};

/// Round origin and size to nearest integer, size at least 1.
RasterRect rasterize(const Box& box);

/// Rasterize and intersect with a width x height frame. Result may be empty.
RasterRect rasterize_clamped(const Box& box, int width, int height);

/// Expanded box about the center of `f0`: sides scaled by `factor`.
Box expand(const Box& f0, double factor);

/// Minimum-threshold clamping of an expanded box against the frame.
///
/// Each side is replaced by the frame side when larger than it and by
/// `min_side` (capped at the frame side) when smaller than it; negative
/// origins are moved to 0. Boxes that then overflow the right or bottom
/// border are shifted back inside.
Box clamp_min(const Box& fe, int frame_width, int frame_height, double min_side);

/// Tight box of the foreground pixels of `mask`, offset by the crop origin.
/// Width and height count pixels inclusively. Throws on an empty mask.
Box refine_from_mask(const Mask& mask, int origin_x, int origin_y);

/// A box is salient when both sides reach `min_side` (inclusive).
bool is_salient_box(const Box& f0, double min_side);

/// Clip `box` to the frame, keeping at least a 1x1 area at the border.
Box clip_to_frame(const Box& box, int frame_width, int frame_height);

bool inside_frame(const Box& box, int frame_width, int frame_height, double tol = 1e-9);

double iou(const Box& a, const Box& b);
double center_distance(const Box& a, const Box& b);

std::string to_string(const Box& box);

}  // namespace sslt
