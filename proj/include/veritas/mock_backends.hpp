#pragma once

// Deterministic, analytically tractable stand-ins for the neural backends.
// All of them are immutable after construction (except the VLM call
// counters, which are atomic) and reproducible bit-for-bit.

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "veritas/backends.hpp"

namespace veritas {

/// Linear classifier with an explicit saliency layer.
///
/// Saliency layer: A_k(i,j) = mean over the pool x pool block (i,j) of
/// (x_k - feature_shift), one map per input channel. Score
/// z = sum_k,i,j head(k,i,j) * A_k(i,j) + bias, logits = [-z, z].
///
/// With pool = 1 and feature_shift = 0 this is exactly
/// logits = [-(w.x + b), w.x + b] with w = head.
class MockLinearClassifier final : public Classifier {
 public:
  struct Params {
    Dims input{32, 32};
    std::size_t channels = 3;
    std::size_t pool = 1;
    double feature_shift = 0.0;
    /// channels x (H/pool) x (W/pool), plane by plane.
    std::vector<double> head;
    double bias = 0.0;
    std::string name = "mock-linear";
  };

  explicit MockLinearClassifier(Params params);

  /// w.x + b with w laid out like the image (interleaved channels).
  static MockLinearClassifier from_weights(Dims input, std::size_t channels,
                                           std::vector<double> weights, double bias);

  /// Head weights drawn uniformly from [-gain, gain] / (maps * h * w).
  static MockLinearClassifier seeded(std::uint64_t seed, Dims input = {32, 32},
                                     std::size_t channels = 3, std::size_t pool = 4,
                                     double feature_shift = 0.5, double gain = 40.0);

  BackendDescriptor descriptor() const override;
  Dims input_dims() const override { return params_.input; }
  std::size_t input_channels() const override { return params_.channels; }
  ClassifierOutput classify(const ImageTensor& img, bool with_activations = false) const override;
  ImageGradient input_gradient(const ImageTensor& img, ClassLabel label) const override;
  SaliencyTensors saliency_tensors(const ImageTensor& img, ClassLabel target) const override;
  bool supports_gradients() const override { return true; }

  /// The score z (fake logit).
  double score(const ImageTensor& img) const;
  /// Input-space weights dz/dx, interleaved like the image.
  const std::vector<double>& input_weights() const noexcept { return input_weights_; }
  const Params& params() const noexcept { return params_; }

 private:
  FeatureMaps activations(const ImageTensor& img) const;

  Params params_;
  Dims layer_;
  std::vector<double> input_weights_;
};

/// Returns fixed logits regardless of input; every gradient is zero. Its
/// saliency layer is the identity (activations = input channels).
class MockConstantClassifier final : public Classifier {
 public:
  MockConstantClassifier(std::array<double, 2> logits, Dims input = {32, 32},
                         std::size_t channels = 3);

  BackendDescriptor descriptor() const override;
  Dims input_dims() const override { return input_; }
  std::size_t input_channels() const override { return channels_; }
  ClassifierOutput classify(const ImageTensor& img, bool with_activations = false) const override;
  ImageGradient input_gradient(const ImageTensor& img, ClassLabel label) const override;
  SaliencyTensors saliency_tensors(const ImageTensor& img, ClassLabel target) const override;
  bool supports_gradients() const override { return true; }

 private:
  std::array<double, 2> logits_;
  Dims input_;
  std::size_t channels_;
};

/// Keyword-triggered embedder over a fixed orthonormal basis.
///
/// Text: every recognised keyword switches on its basis vector; the sum is
/// normalised. Text with no keyword maps to the reserved fallback axis.
/// Images: a deterministic rule of simple pixel statistics (see
/// `statistics_embedding`) unless a custom rule is supplied.
class MockEmbedder final : public Embedder {
 public:
  enum Axis : std::size_t {
    kAnimal = 0,
    kVehicle = 1,
    kRealistic = 2,
    kAnomaly = 3,
    kIrrelevant = 4,
    kEdge = 5,
    kTexture = 6,
    kColor = 7,
    kSmooth = 8,
    kLighting = 9,
    kGeometry = 10,
    kFallback = 15,
  };
  static constexpr std::size_t kDim = 16;

  using ImageRule = std::function<Embedding(const ImageTensor&)>;

  MockEmbedder();
  explicit MockEmbedder(ImageRule rule);

  BackendDescriptor descriptor() const override;
  std::size_t dim() const override { return kDim; }
  Embedding embed_image(const ImageTensor& img) const override;
  Embedding embed_text(std::string_view text) const override;

  static Embedding basis(std::size_t axis);
  /// Default image rule: colour warmth feeds the animal/vehicle axes,
  /// Laplacian energy the anomaly axis, first differences the realistic and
  /// edge axes, and flatness the irrelevant axis.
  static Embedding statistics_embedding(const ImageTensor& img);

 private:
  ImageRule rule_;
  bool custom_rule_ = false;
};

/// Bicubic interpolation standing in for a learned super-resolver.
class BicubicSuperResolver final : public SuperResolver {
 public:
  BackendDescriptor descriptor() const override;
  ImageTensor super_resolve(const ImageTensor& img, int factor) const override;
};

/// Returns scripted responses in order; the last one repeats once the
/// script is exhausted.
class ScriptedVlm final : public Vlm {
 public:
  explicit ScriptedVlm(std::vector<std::string> script, std::string name = "mock-scripted-vlm");

  static ScriptedVlm canned(std::string response) { return ScriptedVlm({std::move(response)}); }

  BackendDescriptor descriptor() const override;
  std::string generate(std::string_view prompt, const ImageTensor& img) override;
  std::size_t calls() const noexcept { return calls_.load(); }

  ScriptedVlm(const ScriptedVlm& other)
      : script_(other.script_), name_(other.name_), calls_(other.calls_.load()) {}

 private:
  std::vector<std::string> script_;
  std::string name_;
  std::atomic<std::size_t> calls_{0};
};

/// Answers every prompt with a schema-conforming object built from the
/// artifact name and positive description found in the prompt.
class TemplateVlm final : public Vlm {
 public:
  BackendDescriptor descriptor() const override;
  std::string generate(std::string_view prompt, const ImageTensor& img) override;
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// The complete mock set used by `--backends mock`.
BackendSet make_mock_backends(std::uint64_t seed);

}  // namespace veritas
