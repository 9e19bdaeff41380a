#pragma once

// Metric-learning loss evaluators with analytic gradients.
//
// The pairwise contrastive loss follows the usual asymmetric form: the
// similar term is the squared distance d^2, while the dissimilar term is the
// hinge on the plain distance, squared afterwards: max(0, m - d)^2.

#include <cstddef>
#include <span>
#include <vector>

namespace veritas {

struct LossConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double margin = 1.0;
  double temperature = 0.1;

  /// Throws InvalidArgument unless temperature > 0 and margin >= 0.
  void validate() const;
};

struct EmbeddingPair {
  std::vector<double> first;
  std::vector<double> second;
  /// 1 for a similar pair, 0 for a dissimilar one.
  int similar = 0;
};

struct Triplet {
  std::vector<double> anchor;
  std::vector<double> positive;
  std::vector<double> negative;
};

struct LabeledEmbeddingBatch {
  std::size_t count = 0;
  std::size_t dim = 0;
  /// count x dim, row-major.
  std::vector<double> features;
  std::vector<int> labels;
};

/// mean over pairs of y d^2 + (1 - y) max(0, m - d)^2. Throws EmptyPairList.
double contrastive_pair_loss(std::span<const EmbeddingPair> pairs, double margin);

/// mean of max(0, d(a,p)^2 - d(a,n)^2 + m). Throws EmptyTripletList.
double triplet_loss(std::span<const Triplet> triplets, double margin);

/// alpha * contrastive + beta * triplet
double combined_loss(double contrastive, double triplet, const LossConfig& config);

/// Temperature-scaled supervised contrastive loss over a labelled batch:
/// rows are L2-normalised, S = F F^T / tau, log-probabilities are taken
/// against the full row (self included), and the loss is minus the mean of
/// the log-probabilities selected by the same-label mask with its diagonal
/// removed. Anchors without a positive contribute nothing. Throws
/// NoPositivePairs when the mask is empty.
double supervised_contrastive_loss(const LabeledEmbeddingBatch& batch, double temperature);

/// Intermediate matrices of the supervised contrastive loss (count x count,
/// row-major). The negative mask is not used by the loss itself.
struct SupConView {
  std::vector<double> similarity;
  std::vector<double> log_prob;
  std::vector<double> positive_mask;
  std::vector<double> negative_mask;
  double loss = 0.0;
};
SupConView supervised_contrastive_view(const LabeledEmbeddingBatch& batch, double temperature);

struct PairGradient {
  std::vector<double> first;
  std::vector<double> second;
};
struct TripletGradient {
  std::vector<double> anchor;
  std::vector<double> positive;
  std::vector<double> negative;
};

/// Gradients of the mean losses w.r.t. every embedding entry. At hinge
/// kinks the zero sub-gradient is used.
std::vector<PairGradient> contrastive_pair_gradient(std::span<const EmbeddingPair> pairs, double margin);
std::vector<TripletGradient> triplet_gradient(std::span<const Triplet> triplets, double margin);
/// count x dim, w.r.t. the raw (unnormalised) features.
std::vector<double> supervised_contrastive_gradient(const LabeledEmbeddingBatch& batch, double temperature);

}  // namespace veritas
