#pragma once

// Data-parallel inner loops used across the pipeline. Every kernel has an
// OpenMP implementation (veritas::kernels) and a plain serial one
// (veritas::kernels::reference). Both evaluate each output element with the
// same expression in the same order, so their results are bit-identical;
// the tests and the benchmark rely on that.

#include <cstddef>
#include <span>

#include "veritas/image.hpp"

namespace veritas::kernels {

/// Half-pixel-centred bilinear resize of an interleaved H x W x C buffer,
/// clamp-to-edge at the borders. Output values are convex combinations of
/// input values.
void resize_bilinear(std::span<const double> src, Dims src_dims, std::size_t channels,
                     std::span<double> dst, Dims dst_dims);

/// Keys cubic convolution (a = -0.5), 4x4 taps, clamp-to-edge. No clamping
/// of the result; callers clamp if they need a valid range.
void resize_bicubic(std::span<const double> src, Dims src_dims, std::size_t channels,
                    std::span<double> dst, Dims dst_dims);

/// Sum of values inside each cell of a uniform grid of `patch_size` cells
/// (boundary cells are smaller). Output is in row-major cell order and must
/// hold ceil(H/p) * ceil(W/p) entries.
void grid_sums(std::span<const double> values, Dims dims, std::size_t patch_size,
               std::span<double> out);

/// In-place multi-level orthonormal 2D Haar transform of a single plane
/// whose dimensions are both powers of two. Mallat layout: after each level
/// the approximation band occupies the top-left quarter of the previous one.
void haar_forward_2d(std::span<double> plane, Dims dims, int levels);
void haar_inverse_2d(std::span<double> plane, Dims dims, int levels);

namespace reference {

void resize_bilinear(std::span<const double> src, Dims src_dims, std::size_t channels,
                     std::span<double> dst, Dims dst_dims);
void resize_bicubic(std::span<const double> src, Dims src_dims, std::size_t channels,
                    std::span<double> dst, Dims dst_dims);
void grid_sums(std::span<const double> values, Dims dims, std::size_t patch_size,
               std::span<double> out);
void haar_forward_2d(std::span<double> plane, Dims dims, int levels);
void haar_inverse_2d(std::span<double> plane, Dims dims, int levels);

}  // namespace reference

/// Cubic convolution weight for a tap at signed distance `x`.
double cubic_weight(double x) noexcept;

}  // namespace veritas::kernels
