#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace veritas {

struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t area() const noexcept { return height * width; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// H x W x C image, row-major with interleaved channels, intensities in [0,1].
class ImageTensor {
 public:
  ImageTensor() = default;
  /// Zero-filled image.
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels);
  /// Validates the length and the [0,1] range; throws InvalidArgument otherwise.
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  Dims dims() const noexcept { return {height_, width_}; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
    return (row * width_ + col) * channels_ + ch;
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
    return data_[index(row, col, ch)];
  }

  std::span<const double> data() const noexcept { return data_; }

  /// Crops a rectangle; bounds are checked.
  ImageTensor crop(std::size_t row, std::size_t col, std::size_t height, std::size_t width) const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Non-negative saliency grid aligned with an image.
class Heatmap {
 public:
  Heatmap() = default;
  Heatmap(std::size_t height, std::size_t width);
  /// Throws InvalidArgument on a length mismatch or a negative / non-finite value.
  Heatmap(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  Dims dims() const noexcept { return {height_, width_}; }
  bool empty() const noexcept { return values_.empty(); }

  double at(std::size_t row, std::size_t col) const noexcept { return values_[row * width_ + col]; }
  std::span<const double> values() const noexcept { return values_; }

  double max() const noexcept;
  double min() const noexcept;
  double sum() const noexcept;

  Heatmap scaled(double factor) const;

  friend bool operator==(const Heatmap&, const Heatmap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

/// K feature maps of h x w, stored plane by plane.
struct FeatureMaps {
  std::size_t maps = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t k, std::size_t row, std::size_t col) const noexcept {
    return values[(k * height + row) * width + col];
  }
  std::span<const double> plane(std::size_t k) const noexcept {
    return std::span<const double>(values).subspan(k * height * width, height * width);
  }
  bool same_shape(const FeatureMaps& other) const noexcept {
    return maps == other.maps && height == other.height && width == other.width;
  }
};

}  // namespace veritas
