#include "veritas/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "veritas/error.hpp"

namespace veritas {

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, 0.0) {}

ImageTensor::ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (data_.size() != height * width * channels) {
    throw Error(ErrorCode::InvalidArgument,
                "image data length " + std::to_string(data_.size()) + " does not match " +
                    std::to_string(height) + "x" + std::to_string(width) + "x" +
                    std::to_string(channels));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "image intensity outside [0,1]");
    }
  }
}

ImageTensor ImageTensor::crop(std::size_t row, std::size_t col, std::size_t height,
                              std::size_t width) const {
  if (row + height > height_ || col + width > width_) {
    throw Error(ErrorCode::PatchOutOfBounds, "crop rectangle exceeds image bounds");
  }
  std::vector<double> out;
  out.reserve(height * width * channels_);
  for (std::size_t r = row; r < row + height; ++r) {
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(index(r, col, 0));
    out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(width * channels_));
  }
  ImageTensor result;
  result.height_ = height;
  result.width_ = width;
  result.channels_ = channels_;
  result.data_ = std::move(out);
  return result;
}

Heatmap::Heatmap(std::size_t height, std::size_t width)
    : height_(height), width_(width), values_(height * width, 0.0) {}

Heatmap::Heatmap(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height * width) {
    throw Error(ErrorCode::InvalidArgument, "heatmap length does not match its dimensions");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "heatmap values must be finite and non-negative");
    }
  }
}

double Heatmap::max() const noexcept {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double Heatmap::min() const noexcept {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double Heatmap::sum() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Heatmap Heatmap::scaled(double factor) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= factor;
  return Heatmap(height_, width_, std::move(out));
}

}  // namespace veritas
