#include "ltt/boxes.hpp"

#include <algorithm>
#include <cmath>

#include "ltt/errors.hpp"

namespace ltt {

std::optional<BoxEstimate> mask_to_box(const Tensor& mask, double prev_width,
                                       double prev_height) {
  if (!(mask.rank() == 2 || (mask.rank() == 3 && mask.shape[2] == 1))) {
    throw dim_error("mask must be HxW or HxWx1");
  }
  if (!(prev_width > 0.0 && prev_height > 0.0)) {
    throw dim_error("previous box size must be positive");
  }
  const std::size_t h = mask.shape[0], w = mask.shape[1];

  double z = 0.0, sum_x = 0.0, sum_y = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double m = mask.data[i * w + j];
      z += m;
      sum_x += static_cast<double>(j) * m;
      sum_y += static_cast<double>(i) * m;
    }
  }
  if (!(z > 0.0)) return std::nullopt;

  BoxEstimate box;
  box.cx = sum_x / z;
  box.cy = sum_y / z;

  double var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double m = mask.data[i * w + j];
      const double dx = static_cast<double>(j) - box.cx;
      const double dy = static_cast<double>(i) - box.cy;
      var_x += dx * dx * m;
      var_y += dy * dy * m;
    }
  }
  box.raw_width = 4.0 * std::sqrt(var_x / z);
  box.raw_height = 4.0 * std::sqrt(var_y / z);

  const double delta = std::sqrt((box.raw_width * box.raw_height) /
                                 (prev_width * prev_height));
  box.size_delta = std::clamp(delta, kMinSizeDelta, kMaxSizeDelta);
  box.width = box.size_delta * prev_width;
  box.height = box.size_delta * prev_height;
  return box;
}

SearchRegion search_region(const BoxEstimate& box, std::size_t image_width,
                           std::size_t image_height, double scale_factor,
                           std::size_t out_width, std::size_t out_height) {
  if (image_width == 0 || image_height == 0) {
    throw dim_error("degenerate image size");
  }
  if (!(box.width > 0.0 && box.height > 0.0)) {
    throw dim_error("box size must be positive");
  }
  const double img_w = static_cast<double>(image_width);
  const double img_h = static_cast<double>(image_height);

  SearchRegion region;
  region.width = std::min(scale_factor * box.width, img_w);
  region.height = std::min(scale_factor * box.height, img_h);
  region.x0 = std::clamp(box.cx - region.width / 2.0, 0.0, img_w - region.width);
  region.y0 = std::clamp(box.cy - region.height / 2.0, 0.0, img_h - region.height);

  const double fit = std::min(static_cast<double>(out_width) / region.width,
                              static_cast<double>(out_height) / region.height);
  region.out_width = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(fit * region.width)));
  region.out_height = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(fit * region.height)));
  return region;
}

}  // namespace ltt
