#include "veritas/backends.hpp"

#include <algorithm>
#include <cmath>

#include "veritas/error.hpp"

namespace veritas {

const char* to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::Classifier: return "classifier";
    case BackendKind::Embedder: return "embedder";
    case BackendKind::SuperResolver: return "super_resolver";
    case BackendKind::Vlm: return "vlm";
  }
  return "classifier";
}

const char* to_string(ClassLabel label) noexcept {
  return label == ClassLabel::Fake ? "fake" : "real";
}

Embedding Embedding::normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  const double n = std::sqrt(sq);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite embedding");
  }
  for (double& v : values) v /= n;
  return Embedding(std::move(values));
}

double Embedding::norm() const noexcept {
  double sq = 0.0;
  for (double v : values_) sq += v * v;
  return std::sqrt(sq);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, "embedding dims " + std::to_string(a.dim()) + " and " +
                                            std::to_string(b.dim()) + " differ");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
  const double denom = a.norm() * b.norm();
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(dot / denom, -1.0, 1.0);
}

double ClassifierOutput::fake_probability() const noexcept {
  // Logistic form of the two-way softmax, stable for large margins.
  const double margin = logits[1] - logits[0];
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double cross_entropy(const std::array<double, 2>& logits, ClassLabel label) noexcept {
  const double m = std::max(logits[0], logits[1]);
  const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  return lse - logits[static_cast<int>(label)];
}

ClassLabel argmax_label(const std::array<double, 2>& logits) noexcept {
  return logits[1] > logits[0] ? ClassLabel::Fake : ClassLabel::Real;
}

ImageGradient Classifier::input_gradient(const ImageTensor&, ClassLabel) const {
  throw Error(ErrorCode::GradientsUnsupported, descriptor().name + " does not expose input gradients");
}

SaliencyTensors Classifier::saliency_tensors(const ImageTensor&, ClassLabel) const {
  throw Error(ErrorCode::GradientsUnsupported, descriptor().name + " does not expose a saliency layer");
}

void Classifier::check_input(const ImageTensor& img) const {
  if (img.dims() != input_dims() || img.channels() != input_channels()) {
    throw Error(ErrorCode::ShapeMismatch,
                descriptor().name + " expects " + std::to_string(input_dims().height) + "x" +
                    std::to_string(input_dims().width) + "x" + std::to_string(input_channels()) +
                    ", got " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                    "x" + std::to_string(img.channels()));
  }
}

void check_sr_factor(int factor) {
  if (factor != 2 && factor != 4) {
    throw Error(ErrorCode::UnsupportedFactor,
                "super-resolution factor must be 2 or 4, got " + std::to_string(factor));
  }
}

}  // namespace veritas
