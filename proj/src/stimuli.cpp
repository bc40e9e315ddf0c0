#include "eeg2shape/stimuli.hpp"

#include <cmath>

namespace e2s {

namespace {

struct Point {
  double x, y;
};

double point_segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Even-odd crossing test with an explicit on-edge check so boundary pixel
// centers always count as inside.
bool point_in_polygon(Point p, const std::vector<Point>& poly) {
  const double edge_eps = 1e-9;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[j], b = poly[i];
    if (point_segment_distance(p, a, b) <= edge_eps) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

std::vector<Point> star_polygon(double cx, double cy, double outer, double inner) {
  std::vector<Point> poly;
  for (int k = 0; k < 5; ++k) {
    const double a_outer = 2.0 * M_PI * k / 5.0;
    const double a_inner = 2.0 * M_PI * (k + 0.5) / 5.0;
    poly.push_back({cx + outer * std::sin(a_outer), cy - outer * std::cos(a_outer)});
    poly.push_back({cx + inner * std::sin(a_inner), cy - inner * std::cos(a_inner)});
  }
  return poly;
}

}  // namespace

ShapeImage rasterize(ShapeClass label, int width, int height) {
  const double w = width, h = height;
  const double cx = w / 2.0, cy = h / 2.0;
  const double bx0 = 0.1 * w, bx1 = 0.9 * w;  // central 80% box
  const double by0 = 0.1 * h, by1 = 0.9 * h;
  const double radius = 0.4 * std::min(w, h);

  std::vector<Point> poly;
  switch (label) {
    case ShapeClass::Circle:
      break;
    case ShapeClass::Star:
      poly = star_polygon(cx, cy, radius, 0.4 * radius);
      break;
    case ShapeClass::Triangle:
      poly = {{cx, by0}, {bx1, by1}, {bx0, by1}};
      break;
    case ShapeClass::Rhombus:
      poly = {{cx, by0}, {bx1, cy}, {cx, by1}, {bx0, cy}};
      break;
    case ShapeClass::Rectangle:
      break;
  }

  ShapeImage img;
  img.label = label;
  img.domain = ShapeImage::Domain::Raw;
  img.pixels = Tensor({height, width});
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Point p{c + 0.5, r + 0.5};
      bool inside = false;
      if (label == ShapeClass::Circle) {
        const double dx = p.x - cx, dy = p.y - cy;
        inside = dx * dx + dy * dy <= radius * radius;
      } else if (label == ShapeClass::Rectangle) {
        inside = p.x >= bx0 && p.x <= bx1 && p.y >= by0 && p.y <= by1;
      } else {
        inside = point_in_polygon(p, poly);
      }
      img.pixels.at2(r, c) = inside ? 1.0f : 0.0f;
    }
  }
  return img;
}

ShapeImage normalize_image(const ShapeImage& raw) {
  if (raw.domain != ShapeImage::Domain::Raw) {
    throw shape_error("normalize_image expects a raw-domain image");
  }
  ShapeImage out;
  out.label = raw.label;
  out.domain = ShapeImage::Domain::Normalized;
  out.pixels = Tensor(raw.pixels.dims);
  float lo = raw.pixels[0], hi = raw.pixels[0];
  for (long long i = 0; i < raw.pixels.size(); ++i) {
    lo = std::min(lo, raw.pixels[i]);
    hi = std::max(hi, raw.pixels[i]);
  }
  const float range = hi - lo;
  for (long long i = 0; i < raw.pixels.size(); ++i) {
    const float unit = range > 0.0f ? (raw.pixels[i] - lo) / range : 0.5f;
    out.pixels[i] = 2.0f * unit - 1.0f;
  }
  return out;
}

std::vector<ShapeImage> canonical_images_normalized() {
  std::vector<ShapeImage> images;
  images.reserve(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    images.push_back(normalize_image(rasterize(static_cast<ShapeClass>(k))));
  }
  return images;
}

}  // namespace e2s
