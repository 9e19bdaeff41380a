#pragma once

// Pure math of the artifact pipeline: patch tiling, heatmap interpolation,
// per-patch weights (sum of heatmap intensity) and the weighted vote score.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "veritas/image.hpp"

namespace veritas {

struct Patch {
  std::size_t row_offset = 0;
  std::size_t col_offset = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double weight = 0.0;

  friend bool operator==(const Patch&, const Patch&) = default;
};

struct PatchGrid {
  std::vector<Patch> patches;
  Dims source_dims;
  std::size_t patch_size = 0;
};

enum class VoteKind { Positive, Negative, Neutral };

const char* to_string(VoteKind kind) noexcept;

struct PatchVote {
  VoteKind kind = VoteKind::Neutral;
  /// Similarity to the positive, negative and neutral descriptor, in that order.
  std::array<double, 3> similarities{0.0, 0.0, 0.0};
};

struct VoteCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;

  friend bool operator==(const VoteCounts&, const VoteCounts&) = default;
};

struct ArtifactScore {
  std::string artifact_name;
  double score = 0.0;
  VoteCounts counts;
  bool retained = false;
};

inline constexpr double kDefaultThreshold = 0.5;
inline constexpr std::size_t kDefaultPatchSize = 32;

/// Uniform grid of patch_size cells in row-major order; the last row and
/// column are smaller when patch_size does not divide the dimension.
/// Throws ZeroDimension.
PatchGrid build_patch_grid(Dims dims, std::size_t patch_size);

/// Bilinear resize of a heatmap to `target`. Throws ZeroDimension.
Heatmap interpolate_heatmap(const Heatmap& h, Dims target);

/// Sum of heatmap intensities over the patch. Throws PatchOutOfBounds.
double patch_weight(const Heatmap& h, const Patch& p);

/// Weights for every patch of a grid (heatmap dims must match the grid's
/// source dims). Returns a copy of the grid with `weight` filled in.
PatchGrid weigh_patches(const Heatmap& h, const PatchGrid& grid);

/// Kind of vote from (positive, negative, neutral) similarities: argmax,
/// ties resolved neutral > negative > positive.
VoteKind resolve_vote(const std::array<double, 3>& similarities) noexcept;

PatchVote make_vote(const std::array<double, 3>& similarities) noexcept;

/// positive -> 1, negative -> 0, neutral -> absent.
std::optional<double> encode_vote(const PatchVote& v) noexcept;

/// Weighted mean of encoded votes over non-neutral patches. Throws
/// InvalidArgument for mismatched lengths or negative weights and
/// NoRelevantPatches when no non-neutral patch carries weight.
ArtifactScore artifact_score(std::span<const double> weights, std::span<const PatchVote> votes,
                             double threshold, std::string artifact_name = {});

}  // namespace veritas
