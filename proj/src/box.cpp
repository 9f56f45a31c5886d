#include "sslt/box.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sslt/imaging.hpp"

namespace sslt {

bool Box::valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 && h > 0.0;
}

void GeometryConfig::validate() const {
    if (!(expand_factor >= 1.0)) throw std::invalid_argument("geometry.expand_factor must be >= 1");
    if (!(min_crop_side >= 1.0)) throw std::invalid_argument("geometry.min_crop_side must be >= 1");
    if (!(salient_min_side >= 1.0)) throw std::invalid_argument("geometry.salient_min_side must be >= 1");
}

RasterRect rasterize(const Box& box) {
    RasterRect r;
    r.x = static_cast<int>(std::lround(box.x));
    r.y = static_cast<int>(std::lround(box.y));
    r.w = std::max(1, static_cast<int>(std::lround(box.w)));
    r.h = std::max(1, static_cast<int>(std::lround(box.h)));
    return r;
}

RasterRect rasterize_clamped(const Box& box, int width, int height) {
    RasterRect r = rasterize(box);
    const int x0 = std::clamp(r.x, 0, width);
    const int y0 = std::clamp(r.y, 0, height);
    const int x1 = std::clamp(r.right(), 0, width);
    const int y1 = std::clamp(r.bottom(), 0, height);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

Box expand(const Box& f0, double factor) {
    if (!(factor >= 1.0)) throw std::invalid_argument("expanding factor must be >= 1");
    return {f0.x - (factor - 1.0) * f0.w / 2.0, f0.y - (factor - 1.0) * f0.h / 2.0, factor * f0.w, factor * f0.h};
}

namespace {

double clamp_side(double side, double frame_side, double min_side) {
    if (side > frame_side) return frame_side;
    if (side < min_side) return std::min(min_side, frame_side);
    return side;
}

}  // namespace

Box clamp_min(const Box& fe, int frame_width, int frame_height, double min_side) {
    if (frame_width < 1 || frame_height < 1) throw std::invalid_argument("clamp_min: empty frame");
    Box ft;
    ft.w = clamp_side(fe.w, frame_width, min_side);
    ft.h = clamp_side(fe.h, frame_height, min_side);
    ft.x = fe.x < 0.0 ? 0.0 : fe.x;
    ft.y = fe.y < 0.0 ? 0.0 : fe.y;
    // overflow shift, keeps the crop inside the frame
    if (ft.x + ft.w > frame_width) ft.x = frame_width - ft.w;
    if (ft.y + ft.h > frame_height) ft.y = frame_height - ft.h;
    return ft;
}

Box refine_from_mask(const Mask& mask, int origin_x, int origin_y) {
    int left = mask.width(), right = -1, top = mask.height(), bottom = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            left = std::min(left, x);
            right = std::max(right, x);
            top = std::min(top, y);
            bottom = std::max(bottom, y);
        }
    }
    if (right < 0) throw std::invalid_argument("refine_from_mask: empty mask");
    return {static_cast<double>(origin_x + left), static_cast<double>(origin_y + top),
            static_cast<double>(right - left + 1), static_cast<double>(bottom - top + 1)};
}

bool is_salient_box(const Box& f0, double min_side) { return f0.w >= min_side && f0.h >= min_side; }

Box clip_to_frame(const Box& box, int frame_width, int frame_height) {
    const double W = frame_width, H = frame_height;
    double x0 = std::clamp(box.x, 0.0, W - 1.0);
    double y0 = std::clamp(box.y, 0.0, H - 1.0);
    double x1 = std::clamp(box.x + box.w, x0 + 1.0, W);
    double y1 = std::clamp(box.y + box.h, y0 + 1.0, H);
    return {x0, y0, x1 - x0, y1 - y0};
}

bool inside_frame(const Box& box, int frame_width, int frame_height, double tol) {
    return box.valid() && box.x >= -tol && box.y >= -tol && box.x + box.w <= frame_width + tol &&
           box.y + box.h <= frame_height + tol;
}

double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double center_distance(const Box& a, const Box& b) { return std::hypot(a.cx() - b.cx(), a.cy() - b.cy()); }

std::string to_string(const Box& box) {
    std::ostringstream os;
    os << '(' << box.x << ',' << box.y << ',' << box.w << ',' << box.h << ')';
    return os.str();
}

}  // namespace sslt
