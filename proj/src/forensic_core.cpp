#include "veritas/forensic_core.hpp"

#include <cmath>
#include <vector>

#include "veritas/error.hpp"
#include "veritas/kernels.hpp"

namespace veritas {

const char* to_string(VoteKind kind) noexcept {
  switch (kind) {
    case VoteKind::Positive: return "positive";
    case VoteKind::Negative: return "negative";
    case VoteKind::Neutral: return "neutral";
  }
  return "neutral";
}

PatchGrid build_patch_grid(Dims dims, std::size_t patch_size) {
  if (dims.height == 0 || dims.width == 0 || patch_size == 0) {
    throw Error(ErrorCode::ZeroDimension, "patch grid needs positive dimensions and patch size");
  }
  PatchGrid grid;
  grid.source_dims = dims;
  grid.patch_size = patch_size;
  for (std::size_t r = 0; r < dims.height; r += patch_size) {
    for (std::size_t c = 0; c < dims.width; c += patch_size) {
      grid.patches.push_back({r, c, std::min(patch_size, dims.height - r),
                              std::min(patch_size, dims.width - c), 0.0});
    }
  }
  return grid;
}

Heatmap interpolate_heatmap(const Heatmap& h, Dims target) {
  if (h.empty() || target.height == 0 || target.width == 0) {
    throw Error(ErrorCode::ZeroDimension, "cannot interpolate an empty heatmap or to empty dims");
  }
  if (h.dims() == target) return h;
  std::vector<double> out(target.area());
  kernels::resize_bilinear(h.values(), h.dims(), 1, out, target);
  return Heatmap(target.height, target.width, std::move(out));
}

double patch_weight(const Heatmap& h, const Patch& p) {
  if (p.row_offset + p.height > h.height() || p.col_offset + p.width > h.width()) {
    throw Error(ErrorCode::PatchOutOfBounds, "patch lies outside the heatmap");
  }
  double acc = 0.0;
  for (std::size_t r = p.row_offset; r < p.row_offset + p.height; ++r)
    for (std::size_t c = p.col_offset; c < p.col_offset + p.width; ++c) acc += h.at(r, c);
  return acc;
}

PatchGrid weigh_patches(const Heatmap& h, const PatchGrid& grid) {
  if (h.dims() != grid.source_dims) {
    throw Error(ErrorCode::PatchOutOfBounds, "heatmap dims differ from the grid's source dims");
  }
  std::vector<double> sums(grid.patches.size());
  kernels::grid_sums(h.values(), h.dims(), grid.patch_size, sums);
  PatchGrid out = grid;
  for (std::size_t k = 0; k < sums.size(); ++k) out.patches[k].weight = sums[k];
  return out;
}

VoteKind resolve_vote(const std::array<double, 3>& s) noexcept {
  // Priority order for ties: neutral, then negative, then positive.
  VoteKind best = VoteKind::Neutral;
  double best_sim = s[2];
  if (s[1] > best_sim) {
    best = VoteKind::Negative;
    best_sim = s[1];
  }
  if (s[0] > best_sim) best = VoteKind::Positive;
  return best;
}

PatchVote make_vote(const std::array<double, 3>& similarities) noexcept {
  return {resolve_vote(similarities), similarities};
}

std::optional<double> encode_vote(const PatchVote& v) noexcept {
  switch (v.kind) {
    case VoteKind::Positive: return 1.0;
    case VoteKind::Negative: return 0.0;
    case VoteKind::Neutral: return std::nullopt;
  }
  return std::nullopt;
}

ArtifactScore artifact_score(std::span<const double> weights, std::span<const PatchVote> votes,
                             double threshold, std::string artifact_name) {
  if (weights.size() != votes.size()) {
    throw Error(ErrorCode::InvalidArgument, "weights and votes differ in length");
  }
  ArtifactScore result;
  result.artifact_name = std::move(artifact_name);
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      throw Error(ErrorCode::InvalidArgument, "patch weights must be finite and non-negative");
    }
    switch (votes[k].kind) {
      case VoteKind::Positive: ++result.counts.positive; break;
      case VoteKind::Negative: ++result.counts.negative; break;
      case VoteKind::Neutral: ++result.counts.neutral; break;
    }
    if (auto v = encode_vote(votes[k])) {
      numerator += weights[k] * *v;
      denominator += weights[k];
    }
  }
  if (!(denominator > 0.0)) {
    throw Error(ErrorCode::NoRelevantPatches,
                "no non-neutral patch with positive weight for '" + result.artifact_name + "'");
  }
  // Only positive votes contribute to the numerator, so it never exceeds the
  // denominator; the clamp absorbs rounding in the last place.
  result.score = std::min(1.0, numerator / denominator);
  result.retained = result.score >= threshold;
  return result;
}

}  // namespace veritas
