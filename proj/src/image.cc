#include "pseudoview/image.h"

#include <cmath>
#include <limits>

namespace pseudoview {

std::string shape_string(int width, int height) {
  return std::to_string(width) + "x" + std::to_string(height);
}

std::size_t ScalarField::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid_.data()) n += v != 0;
  return n;
}

DepthImage DepthImage::from_values(const Image<float>& values) {
  DepthImage d(values.width(), values.height());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float z = values[i];
    if (std::isfinite(z) && z > 0.0f) d.set(i, z);
  }
  return d;
}

DepthImage DepthImage::constant(int width, int height, float depth) {
  DepthImage d(width, height);
  for (std::size_t i = 0; i < d.size(); ++i) d.set(i, depth);
  d.validate();
  return d;
}

void DepthImage::validate() const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!valid(i)) continue;
    const float z = value(i);
    if (!std::isfinite(z) || !(z > 0.0f)) {
      throw ValidationError("depth image: valid pixel " + std::to_string(i) +
                            " has invalid depth " + std::to_string(z));
    }
  }
}

double DepthImage::min_valid() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    if (valid(i) && value(i) < m) m = value(i);
  }
  return m;
}

DisparityImage DisparityImage::from_values(const Image<float>& values) {
  DisparityImage d(values.width(), values.height());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) d.set(i, values[i]);
  }
  return d;
}

}  // namespace pseudoview
