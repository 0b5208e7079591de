#pragma once

namespace vra {

struct BBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const noexcept { return x2 - x1; }
    double height() const noexcept { return y2 - y1; }
    bool valid() const noexcept;

    bool operator==(const BBox&) const = default;
};

inline constexpr double default_crop_scale = 1.3;

/// Grows width and height by `factor` about the box center, then clamps to
/// [0, image_w] x [0, image_h].
BBox scale_bbox(const BBox& box, double factor, double image_w, double image_h);

/// Integer pixel box enclosing `box`: floor for the minimum corner, ceil for the maximum.
BBox round_outward(const BBox& box);

} // namespace vra
