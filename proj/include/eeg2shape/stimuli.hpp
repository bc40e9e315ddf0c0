#pragma once

#include <string>
#include <vector>

#include "eeg2shape/eeg_data.hpp"
#include "eeg2shape/tensor.hpp"

namespace e2s {

inline constexpr int kImageHeight = 40;  // 4 * window length
inline constexpr int kImageWidth = 56;   // 4 * channel count
inline constexpr int kImagePixels = kImageHeight * kImageWidth;

// Greyscale stimulus image, raw [0,1] or normalized [-1,1].
struct ShapeImage {
  enum class Domain { Raw, Normalized };
  Tensor pixels;  // [height, width]
  ShapeClass label = ShapeClass::Circle;
  Domain domain = Domain::Raw;
};

// Filled white shape on black background, centered, inscribed in the central
// 80% box. Pixel-center point tests; centers on an edge count as inside.
ShapeImage rasterize(ShapeClass label, int width = kImageWidth, int height = kImageHeight);

// Max-min normalization to [0,1] followed by the affine map to [-1,1].
// A constant image maps to mid-grey (0).
ShapeImage normalize_image(const ShapeImage& raw);

// The five canonical stimuli in class order, normalized domain.
std::vector<ShapeImage> canonical_images_normalized();

}  // namespace e2s
