#include "veritas/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "veritas/error.hpp"

namespace veritas::kernels {
namespace {

// Below this many output elements the parallel region costs more than it saves.
constexpr std::ptrdiff_t kParallelThreshold = 4096;

struct Sample {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

Sample bilinear_sample(std::size_t dst, std::size_t src_len, std::size_t dst_len) {
  const double scale = static_cast<double>(src_len) / static_cast<double>(dst_len);
  double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
  const auto i0 = static_cast<std::size_t>(std::floor(s));
  const std::size_t i1 = std::min(i0 + 1, src_len - 1);
  return {i0, i1, s - static_cast<double>(i0)};
}

void bilinear_pixel(std::span<const double> src, Dims src_dims, std::size_t channels,
                    std::span<double> dst, Dims dst_dims, std::size_t y, std::size_t x) {
  const Sample sy = bilinear_sample(y, src_dims.height, dst_dims.height);
  const Sample sx = bilinear_sample(x, src_dims.width, dst_dims.width);
  for (std::size_t c = 0; c < channels; ++c) {
    auto at = [&](std::size_t r, std::size_t col) {
      return src[(r * src_dims.width + col) * channels + c];
    };
    const double top = std::lerp(at(sy.i0, sx.i0), at(sy.i0, sx.i1), sx.frac);
    const double bottom = std::lerp(at(sy.i1, sx.i0), at(sy.i1, sx.i1), sx.frac);
    dst[(y * dst_dims.width + x) * channels + c] = std::lerp(top, bottom, sy.frac);
  }
}

struct CubicTaps {
  std::ptrdiff_t base;
  double w[4];
};

CubicTaps cubic_taps(std::size_t dst, std::size_t src_len, std::size_t dst_len) {
  const double scale = static_cast<double>(src_len) / static_cast<double>(dst_len);
  const double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
  const double f = std::floor(s);
  const double t = s - f;
  CubicTaps taps{static_cast<std::ptrdiff_t>(f) - 1, {}};
  for (int k = 0; k < 4; ++k) taps.w[k] = cubic_weight(t - static_cast<double>(k - 1));
  return taps;
}

std::size_t clamp_index(std::ptrdiff_t i, std::size_t len) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(len) - 1));
}

void bicubic_pixel(std::span<const double> src, Dims src_dims, std::size_t channels,
                   std::span<double> dst, Dims dst_dims, std::size_t y, std::size_t x) {
  const CubicTaps ty = cubic_taps(y, src_dims.height, dst_dims.height);
  const CubicTaps tx = cubic_taps(x, src_dims.width, dst_dims.width);
  for (std::size_t c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
      const std::size_t r = clamp_index(ty.base + j, src_dims.height);
      double row = 0.0;
      for (int i = 0; i < 4; ++i) {
        const std::size_t col = clamp_index(tx.base + i, src_dims.width);
        row += tx.w[i] * src[(r * src_dims.width + col) * channels + c];
      }
      acc += ty.w[j] * row;
    }
    dst[(y * dst_dims.width + x) * channels + c] = acc;
  }
}

double cell_sum(std::span<const double> values, Dims dims, std::size_t p, std::size_t cols,
                std::size_t cell) {
  const std::size_t r0 = (cell / cols) * p;
  const std::size_t c0 = (cell % cols) * p;
  const std::size_t r1 = std::min(r0 + p, dims.height);
  const std::size_t c1 = std::min(c0 + p, dims.width);
  double acc = 0.0;
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) acc += values[r * dims.width + c];
  return acc;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One analysis step on a strided 1D signal of length n (n even).
void haar_step(double* v, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  tmp.resize(n);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = v[(2 * i) * stride];
    const double b = v[(2 * i + 1) * stride];
    tmp[i] = (a + b) * kInvSqrt2;
    tmp[half + i] = (a - b) * kInvSqrt2;
  }
  for (std::size_t i = 0; i < n; ++i) v[i * stride] = tmp[i];
}

void haar_unstep(double* v, std::size_t n, std::size_t stride, std::vector<double>& tmp) {
  tmp.resize(n);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double s = v[i * stride];
    const double d = v[(half + i) * stride];
    tmp[2 * i] = (s + d) * kInvSqrt2;
    tmp[2 * i + 1] = (s - d) * kInvSqrt2;
  }
  for (std::size_t i = 0; i < n; ++i) v[i * stride] = tmp[i];
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_haar(std::span<double> plane, Dims dims, int levels) {
  if (dims.height == 0 || dims.width == 0) throw Error(ErrorCode::ZeroDimension, "empty plane");
  if (!is_pow2(dims.height) || !is_pow2(dims.width)) {
    throw Error(ErrorCode::NonDyadicDims, "Haar plane dimensions must be powers of two");
  }
  if (plane.size() != dims.area()) throw Error(ErrorCode::DimMismatch, "plane size mismatch");
  if (levels < 0 || (std::size_t{1} << levels) > std::min(dims.height, dims.width)) {
    throw Error(ErrorCode::InvalidArgument, "too many Haar levels for the plane size");
  }
}

void check_resize(std::span<const double> src, Dims src_dims, std::size_t channels,
                  std::span<double> dst, Dims dst_dims) {
  if (src_dims.area() == 0 || dst_dims.area() == 0 || channels == 0) {
    throw Error(ErrorCode::ZeroDimension, "resize with an empty dimension");
  }
  if (src.size() != src_dims.area() * channels || dst.size() != dst_dims.area() * channels) {
    throw Error(ErrorCode::DimMismatch, "resize buffer length mismatch");
  }
}

std::size_t check_grid(std::span<const double> values, Dims dims, std::size_t p,
                       std::span<double> out) {
  if (p == 0 || dims.area() == 0) throw Error(ErrorCode::ZeroDimension, "grid with a zero size");
  const std::size_t rows = (dims.height + p - 1) / p;
  const std::size_t cols = (dims.width + p - 1) / p;
  if (values.size() != dims.area() || out.size() != rows * cols) {
    throw Error(ErrorCode::DimMismatch, "grid buffer length mismatch");
  }
  return cols;
}

}  // namespace

double cubic_weight(double x) noexcept {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

void resize_bilinear(std::span<const double> src, Dims src_dims, std::size_t channels,
                     std::span<double> dst, Dims dst_dims) {
  check_resize(src, src_dims, channels, dst, dst_dims);
  const auto n = static_cast<std::ptrdiff_t>(dst_dims.area());
#pragma omp parallel for if (n >= kParallelThreshold) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    bilinear_pixel(src, src_dims, channels, dst, dst_dims, idx / dst_dims.width, idx % dst_dims.width);
  }
}

void resize_bicubic(std::span<const double> src, Dims src_dims, std::size_t channels,
                    std::span<double> dst, Dims dst_dims) {
  check_resize(src, src_dims, channels, dst, dst_dims);
  const auto n = static_cast<std::ptrdiff_t>(dst_dims.area());
#pragma omp parallel for if (n >= kParallelThreshold) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    bicubic_pixel(src, src_dims, channels, dst, dst_dims, idx / dst_dims.width, idx % dst_dims.width);
  }
}

void grid_sums(std::span<const double> values, Dims dims, std::size_t patch_size,
               std::span<double> out) {
  const std::size_t cols = check_grid(values, dims, patch_size, out);
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  const bool big = dims.area() >= static_cast<std::size_t>(kParallelThreshold);
#pragma omp parallel for if (big) schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = cell_sum(values, dims, patch_size, cols, static_cast<std::size_t>(k));
  }
}

void haar_forward_2d(std::span<double> plane, Dims dims, int levels) {
  check_haar(plane, dims, levels);
  const bool big = dims.area() >= static_cast<std::size_t>(kParallelThreshold);
  std::size_t h = dims.height;
  std::size_t w = dims.width;
  for (int level = 0; level < levels; ++level) {
#pragma omp parallel if (big)
    {
      std::vector<double> tmp;
#pragma omp for schedule(static)
      for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(h); ++r)
        haar_step(plane.data() + static_cast<std::size_t>(r) * dims.width, w, 1, tmp);
#pragma omp for schedule(static)
      for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(w); ++c)
        haar_step(plane.data() + c, h, dims.width, tmp);
    }
    h /= 2;
    w /= 2;
  }
}

void haar_inverse_2d(std::span<double> plane, Dims dims, int levels) {
  check_haar(plane, dims, levels);
  const bool big = dims.area() >= static_cast<std::size_t>(kParallelThreshold);
  for (int level = levels - 1; level >= 0; --level) {
    const std::size_t h = dims.height >> level;
    const std::size_t w = dims.width >> level;
#pragma omp parallel if (big)
    {
      std::vector<double> tmp;
#pragma omp for schedule(static)
      for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(w); ++c)
        haar_unstep(plane.data() + c, h, dims.width, tmp);
#pragma omp for schedule(static)
      for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(h); ++r)
        haar_unstep(plane.data() + static_cast<std::size_t>(r) * dims.width, w, 1, tmp);
    }
  }
}

namespace reference {

void resize_bilinear(std::span<const double> src, Dims src_dims, std::size_t channels,
                     std::span<double> dst, Dims dst_dims) {
  check_resize(src, src_dims, channels, dst, dst_dims);
  for (std::size_t y = 0; y < dst_dims.height; ++y)
    for (std::size_t x = 0; x < dst_dims.width; ++x)
      bilinear_pixel(src, src_dims, channels, dst, dst_dims, y, x);
}

void resize_bicubic(std::span<const double> src, Dims src_dims, std::size_t channels,
                    std::span<double> dst, Dims dst_dims) {
  check_resize(src, src_dims, channels, dst, dst_dims);
  for (std::size_t y = 0; y < dst_dims.height; ++y)
    for (std::size_t x = 0; x < dst_dims.width; ++x)
      bicubic_pixel(src, src_dims, channels, dst, dst_dims, y, x);
}

void grid_sums(std::span<const double> values, Dims dims, std::size_t patch_size,
               std::span<double> out) {
  const std::size_t cols = check_grid(values, dims, patch_size, out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = cell_sum(values, dims, patch_size, cols, k);
}

void haar_forward_2d(std::span<double> plane, Dims dims, int levels) {
  check_haar(plane, dims, levels);
  std::vector<double> tmp;
  std::size_t h = dims.height;
  std::size_t w = dims.width;
  for (int level = 0; level < levels; ++level) {
    for (std::size_t r = 0; r < h; ++r) haar_step(plane.data() + r * dims.width, w, 1, tmp);
    for (std::size_t c = 0; c < w; ++c) haar_step(plane.data() + c, h, dims.width, tmp);
    h /= 2;
    w /= 2;
  }
}

void haar_inverse_2d(std::span<double> plane, Dims dims, int levels) {
  check_haar(plane, dims, levels);
  std::vector<double> tmp;
  for (int level = levels - 1; level >= 0; --level) {
    const std::size_t h = dims.height >> level;
    const std::size_t w = dims.width >> level;
    for (std::size_t c = 0; c < w; ++c) haar_unstep(plane.data() + c, h, dims.width, tmp);
    for (std::size_t r = 0; r < h; ++r) haar_unstep(plane.data() + r * dims.width, w, 1, tmp);
  }
}

}  // namespace reference
}  // namespace veritas::kernels
