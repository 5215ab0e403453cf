#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pseudoview/error.h"

namespace pseudoview {

using Rgb = std::array<float, 3>;

// Row-major dense buffer.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const T& fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// true = set. Stored as bytes so parallel writers never share a word.
using Mask = Image<std::uint8_t>;

// RGB in [0, 1].
using ColorImage = Image<Rgb>;

// Dense scalar field with a validity mask. Invalid pixels hold 0.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int width, int height)
      : values_(width, height, 0.0f), valid_(width, height, 0) {}

  int width() const { return values_.width(); }
  int height() const { return values_.height(); }
  std::size_t size() const { return values_.size(); }

  bool valid(int x, int y) const { return valid_.at(x, y) != 0; }
  bool valid(std::size_t i) const { return valid_[i] != 0; }
  float value(int x, int y) const { return values_.at(x, y); }
  float value(std::size_t i) const { return values_[i]; }

  void set(int x, int y, float v) { set(values_.index(x, y), v); }
  void set(std::size_t i, float v) {
    values_[i] = v;
    valid_[i] = 1;
  }
  void invalidate(int x, int y) { invalidate(values_.index(x, y)); }
  void invalidate(std::size_t i) {
    values_[i] = 0.0f;
    valid_[i] = 0;
  }

  const Image<float>& values() const { return values_; }
  const Mask& validity() const { return valid_; }
  std::size_t valid_count() const;

  bool operator==(const ScalarField&) const = default;

 protected:
  Image<float> values_;
  Mask valid_;
};

// Metric depth. Every valid pixel is finite and > 0.
class DepthImage : public ScalarField {
 public:
  using ScalarField::ScalarField;

  // Pixels with finite positive depth become valid, everything else invalid.
  static DepthImage from_values(const Image<float>& values);
  static DepthImage constant(int width, int height, float depth);

  // Throws ValidationError when a valid pixel has non-positive or
  // non-finite depth. Writes through set() are not checked.
  void validate() const;
  // Smallest valid depth, or +inf when nothing is valid.
  double min_valid() const;
};

// Monocular disparity (unitless). Valid pixels are finite.
class DisparityImage : public ScalarField {
 public:
  using ScalarField::ScalarField;
  static DisparityImage from_values(const Image<float>& values);
};

std::string shape_string(int width, int height);

// Throws ValidationError naming both shapes when the dimensions differ.
template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError(std::string(what) + ": dimension mismatch " +
                          shape_string(a.width(), a.height()) + " vs " +
                          shape_string(b.width(), b.height()));
  }
}

}  // namespace pseudoview
