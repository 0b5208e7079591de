#include "vra/crop_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "vra/errors.hpp"

namespace vra {

bool BBox::valid() const noexcept {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) && x1 < x2 && y1 < y2;
}

BBox scale_bbox(const BBox& box, double factor, double image_w, double image_h) {
    if (!box.valid()) {
        throw DataError("degenerate bounding box");
    }
    if (!(std::isfinite(factor) && factor > 0.0)) {
        throw ConfigError("scale factor must be positive");
    }
    if (!(std::isfinite(image_w) && image_w > 0.0 && std::isfinite(image_h) && image_h > 0.0)) {
        throw ConfigError("image dimensions must be positive");
    }
    const double cx = 0.5 * (box.x1 + box.x2);
    const double cy = 0.5 * (box.y1 + box.y2);
    const double half_w = 0.5 * box.width() * factor;
    const double half_h = 0.5 * box.height() * factor;

    BBox out{std::clamp(cx - half_w, 0.0, image_w), std::clamp(cy - half_h, 0.0, image_h),
             std::clamp(cx + half_w, 0.0, image_w), std::clamp(cy + half_h, 0.0, image_h)};
    if (!out.valid()) {
        throw DataError("bounding box lies outside the image");
    }
    return out;
}

BBox round_outward(const BBox& box) {
    return BBox{std::floor(box.x1), std::floor(box.y1), std::ceil(box.x2), std::ceil(box.y2)};
}

} // namespace vra
