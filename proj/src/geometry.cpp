#include "pedcross/geometry.hpp"

#include <algorithm>

namespace pedcross {

BoxMeasurement bbox_to_state(const BBox& b) {
    BoxMeasurement m;
    m.u = b.left + b.width / 2.0;
    m.v = b.top + b.height / 2.0;
    m.lambda = b.width / b.height;
    m.h = b.height;
    return m;
}

BBox state_to_bbox(double u, double v, double lambda, double h) {
    if (h <= 0.0 || lambda <= 0.0) {
        throw NonPositiveExtent("state_to_bbox: aspect ratio and height must be positive");
    }
    BBox b;
    b.width = lambda * h;
    b.height = h;
    b.left = u - b.width / 2.0;
    b.top = v - b.height / 2.0;
    return b;
}

double iou(const BBox& a, const BBox& b) {
    double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left, b.left));
    double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top));
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace pedcross
