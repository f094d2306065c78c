#pragma once

#include <optional>

#include "ltt/tensor.hpp"

namespace ltt {

// Target state estimated from a soft segmentation mask. Pixel (i, j) sits at
// integer coordinates with the origin at the top-left corner; cx runs along
// columns, cy along rows.
struct BoxEstimate {
  double cx = 0, cy = 0;              // center of mass of the mask
  double width = 0, height = 0;       // clamped size
  double raw_width = 0, raw_height = 0;  // 4 sigma, before the clamp
  double size_delta = 0;              // applied scale change, in [0.95, 1.1]
};

// Allowed per-frame change in target scale.
inline constexpr double kMinSizeDelta = 0.95;
inline constexpr double kMaxSizeDelta = 1.1;

// Center of mass and 4-sigma extent of the mask, with the size change
// relative to (prev_width, prev_height) clamped to [0.95, 1.1] through a
// single axis-coupled factor. Returns nullopt for an all-zero mask; the
// caller picks the fallback (typically keeping its previous estimate).
// mask: H x W or H x W x 1, values in [0, 1].
std::optional<BoxEstimate> mask_to_box(const Tensor& mask, double prev_width,
                                       double prev_height);

struct SearchRegion {
  double x0 = 0, y0 = 0;          // top-left corner, image coordinates
  double width = 0, height = 0;   // extent, clipped to the image
  std::size_t out_width = 0, out_height = 0;  // resample target
};

// Region scale_factor times the box size, centered on the box, clamped
// per axis to the image extent and shifted to stay inside it. The output
// resolution fits (out_width, out_height) while preserving the region's
// aspect ratio.
SearchRegion search_region(const BoxEstimate& box, std::size_t image_width,
                           std::size_t image_height, double scale_factor,
                           std::size_t out_width, std::size_t out_height);

}  // namespace ltt
