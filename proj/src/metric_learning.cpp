#include "veritas/metric_learning.hpp"

#include <algorithm>
#include <cmath>

#include "veritas/error.hpp"

namespace veritas {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimMismatch, "embeddings differ in dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void check_margin(double margin) {
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw Error(ErrorCode::InvalidArgument, "margin must be >= 0");
}

void check_temperature(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
}

struct NormalizedBatch {
  std::vector<double> unit;
  std::vector<double> norms;
};

NormalizedBatch normalize_rows(const LabeledEmbeddingBatch& b) {
  if (b.features.size() != b.count * b.dim || b.labels.size() != b.count) {
    throw Error(ErrorCode::DimMismatch, "batch features/labels do not match count x dim");
  }
  NormalizedBatch out{b.features, std::vector<double>(b.count)};
  for (std::size_t i = 0; i < b.count; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < b.dim; ++k) sq += out.unit[i * b.dim + k] * out.unit[i * b.dim + k];
    const double n = std::sqrt(sq);
    if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "batch contains a zero feature row");
    out.norms[i] = n;
    for (std::size_t k = 0; k < b.dim; ++k) out.unit[i * b.dim + k] /= n;
  }
  return out;
}

}  // namespace

void LossConfig::validate() const {
  check_margin(margin);
  check_temperature(temperature);
}

double contrastive_pair_loss(std::span<const EmbeddingPair> pairs, double margin) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPairList, "no pairs given");
  check_margin(margin);
  double total = 0.0;
  for (const auto& p : pairs) {
    if (p.similar != 0 && p.similar != 1) throw Error(ErrorCode::InvalidArgument, "pair label must be 0 or 1");
    const double d2 = squared_distance(p.first, p.second);
    if (p.similar == 1) {
      total += d2;
    } else {
      const double hinge = std::max(0.0, margin - std::sqrt(d2));
      total += hinge * hinge;
    }
  }
  return total / static_cast<double>(pairs.size());
}

double triplet_loss(std::span<const Triplet> triplets, double margin) {
  if (triplets.empty()) throw Error(ErrorCode::EmptyTripletList, "no triplets given");
  check_margin(margin);
  double total = 0.0;
  for (const auto& t : triplets) {
    total += std::max(0.0, squared_distance(t.anchor, t.positive) - squared_distance(t.anchor, t.negative) + margin);
  }
  return total / static_cast<double>(triplets.size());
}

double combined_loss(double contrastive, double triplet, const LossConfig& config) {
  return config.alpha * contrastive + config.beta * triplet;
}

SupConView supervised_contrastive_view(const LabeledEmbeddingBatch& batch, double temperature) {
  check_temperature(temperature);
  const NormalizedBatch nb = normalize_rows(batch);
  const std::size_t n = batch.count;
  const std::size_t d = batch.dim;

  SupConView v;
  v.similarity.assign(n * n, 0.0);
  v.log_prob.assign(n * n, 0.0);
  v.positive_mask.assign(n * n, 0.0);
  v.negative_mask.assign(n * n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += nb.unit[i * d + k] * nb.unit[j * d + k];
      v.similarity[i * n + j] = dot / temperature;
      const bool same = batch.labels[i] == batch.labels[j];
      v.positive_mask[i * n + j] = (same && i != j) ? 1.0 : 0.0;
      v.negative_mask[i * n + j] = same ? 0.0 : 1.0;
    }
  }

  double masked = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &v.similarity[i * n];
    const double m = *std::max_element(row, row + n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(row[j] - m);
    const double lse = m + std::log(sum);
    for (std::size_t j = 0; j < n; ++j) {
      v.log_prob[i * n + j] = row[j] - lse;
      masked += v.positive_mask[i * n + j] * v.log_prob[i * n + j];
      positives += v.positive_mask[i * n + j];
    }
  }
  if (!(positives > 0.0)) throw Error(ErrorCode::NoPositivePairs, "no anchor has a same-label partner");
  v.loss = -masked / positives;
  return v;
}

double supervised_contrastive_loss(const LabeledEmbeddingBatch& batch, double temperature) {
  return supervised_contrastive_view(batch, temperature).loss;
}

std::vector<PairGradient> contrastive_pair_gradient(std::span<const EmbeddingPair> pairs, double margin) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPairList, "no pairs given");
  check_margin(margin);
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  std::vector<PairGradient> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double d2 = squared_distance(p.first, p.second);
    const double d = std::sqrt(d2);
    // dL/d(first) = coeff * (first - second)
    double coeff = 0.0;
    if (p.similar == 1) {
      coeff = 2.0 * inv_n;
    } else if (d < margin && d > 0.0) {
      coeff = -2.0 * (margin - d) / d * inv_n;
    }
    PairGradient g{std::vector<double>(p.first.size()), std::vector<double>(p.first.size())};
    for (std::size_t k = 0; k < p.first.size(); ++k) {
      g.first[k] = coeff * (p.first[k] - p.second[k]);
      g.second[k] = -g.first[k];
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<TripletGradient> triplet_gradient(std::span<const Triplet> triplets, double margin) {
  if (triplets.empty()) throw Error(ErrorCode::EmptyTripletList, "no triplets given");
  check_margin(margin);
  const double inv_n = 1.0 / static_cast<double>(triplets.size());
  std::vector<TripletGradient> out;
  out.reserve(triplets.size());
  for (const auto& t : triplets) {
    const std::size_t dim = t.anchor.size();
    TripletGradient g{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double h = squared_distance(t.anchor, t.positive) - squared_distance(t.anchor, t.negative) + margin;
    if (h > 0.0) {
      for (std::size_t k = 0; k < dim; ++k) {
        g.anchor[k] = 2.0 * (t.negative[k] - t.positive[k]) * inv_n;
        g.positive[k] = -2.0 * (t.anchor[k] - t.positive[k]) * inv_n;
        g.negative[k] = 2.0 * (t.anchor[k] - t.negative[k]) * inv_n;
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<double> supervised_contrastive_gradient(const LabeledEmbeddingBatch& batch, double temperature) {
  const SupConView v = supervised_contrastive_view(batch, temperature);
  const NormalizedBatch nb = normalize_rows(batch);
  const std::size_t n = batch.count;
  const std::size_t d = batch.dim;

  double positives = 0.0;
  for (double m : v.positive_mask) positives += m;

  // G = dL/dS with L = -(1/P) sum_ij M_ij (S_ij - lse_i):
  // G_ij = -(M_ij - m_i softmax_ij) / P, m_i = sum_j M_ij.
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_pos = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_pos += v.positive_mask[i * n + j];
    for (std::size_t j = 0; j < n; ++j) {
      const double softmax = std::exp(v.log_prob[i * n + j]);
      g[i * n + j] = -(v.positive_mask[i * n + j] - row_pos * softmax) / positives;
    }
  }

  // S = U U^T / tau  =>  dL/dU = (G + G^T) U / tau.
  std::vector<double> du(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = (g[i * n + j] + g[j * n + i]) / temperature;
      for (std::size_t k = 0; k < d; ++k) du[i * d + k] += c * nb.unit[j * d + k];
    }

  // u = f / |f|  =>  dL/df = (du - u (u . du)) / |f|.
  std::vector<double> df(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double proj = 0.0;
    for (std::size_t k = 0; k < d; ++k) proj += nb.unit[i * d + k] * du[i * d + k];
    for (std::size_t k = 0; k < d; ++k) df[i * d + k] = (du[i * d + k] - nb.unit[i * d + k] * proj) / nb.norms[i];
  }
  return df;
}

}  // namespace veritas
