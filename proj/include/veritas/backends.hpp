#pragma once

// Interfaces for every model-dependent stage of the pipeline. Concrete
// implementations are the deterministic mocks (mock_backends.hpp) and the
// dynamically loaded real-model adapters (plugin_backends.hpp).

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "veritas/image.hpp"

namespace veritas {

enum class BackendKind { Classifier, Embedder, SuperResolver, Vlm };

const char* to_string(BackendKind kind) noexcept;

struct BackendDescriptor {
  BackendKind kind = BackendKind::Classifier;
  std::string name;
  bool deterministic = false;
  /// True when one handle may be used from several threads at once.
  bool shareable = false;
};

enum class ClassLabel : int { Real = 0, Fake = 1 };

const char* to_string(ClassLabel label) noexcept;

/// Unit-norm (after construction through `normalized`) embedding vector.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}

  /// Scales to unit Euclidean norm; throws InvalidArgument for a zero vector.
  static Embedding normalized(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double norm() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<double> values_;
};

/// Cosine of the angle between two embeddings, clamped to [-1, 1]. Throws
/// DimMismatch. A zero vector has similarity 0 with everything.
double cosine_similarity(const Embedding& a, const Embedding& b);

struct ClassifierOutput {
  /// Logits over {real, fake}.
  std::array<double, 2> logits{0.0, 0.0};
  std::optional<FeatureMaps> activations;
  ClassLabel prediction = ClassLabel::Real;

  /// softmax(logits)[fake]
  double fake_probability() const noexcept;
};

/// Same layout as an ImageTensor but unbounded values.
struct ImageGradient {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> values;
};

struct SaliencyTensors {
  FeatureMaps activations;
  /// d(target logit) / d(activations), same shape as `activations`.
  FeatureMaps gradients;
};

/// Softmax cross-entropy of two logits against `label`.
double cross_entropy(const std::array<double, 2>& logits, ClassLabel label) noexcept;

ClassLabel argmax_label(const std::array<double, 2>& logits) noexcept;

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual BackendDescriptor descriptor() const = 0;
  virtual Dims input_dims() const = 0;
  virtual std::size_t input_channels() const = 0;

  /// Throws ShapeMismatch when `img` is not the native input size.
  virtual ClassifierOutput classify(const ImageTensor& img, bool with_activations = false) const = 0;

  /// Gradient of the cross-entropy loss w.r.t. the input pixels.
  virtual ImageGradient input_gradient(const ImageTensor& img, ClassLabel label) const;

  /// Activations of the saliency layer and the gradient of the target
  /// class logit w.r.t. them.
  virtual SaliencyTensors saliency_tensors(const ImageTensor& img, ClassLabel target) const;

  virtual bool supports_gradients() const { return false; }

 protected:
  void check_input(const ImageTensor& img) const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual BackendDescriptor descriptor() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Embedding embed_image(const ImageTensor& img) const = 0;
  virtual Embedding embed_text(std::string_view text) const = 0;
};

class SuperResolver {
 public:
  virtual ~SuperResolver() = default;
  virtual BackendDescriptor descriptor() const = 0;
  /// Output is factor x the input dims, clamped to [0,1]. Throws
  /// UnsupportedFactor unless factor is 2 or 4.
  virtual ImageTensor super_resolve(const ImageTensor& img, int factor) const = 0;
};

class Vlm {
 public:
  virtual ~Vlm() = default;
  virtual BackendDescriptor descriptor() const = 0;
  /// Raw model text; validation is the caller's job.
  virtual std::string generate(std::string_view prompt, const ImageTensor& img) = 0;
};

/// One handle per stage. A set is owned by a single worker.
struct BackendSet {
  std::shared_ptr<Classifier> classifier;
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<SuperResolver> super_resolver;
  std::shared_ptr<Vlm> vlm;
};

void check_sr_factor(int factor);

}  // namespace veritas
