#pragma once

// Gradient-based L-infinity attacks against any classifier backend that
// exposes input gradients, and an accuracy-under-attack harness.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "veritas/backends.hpp"
#include "veritas/image.hpp"

namespace veritas {

enum class AttackKind { Fgsm, Pgd, Wavelet, AutoAttack };

const char* to_string(AttackKind kind) noexcept;
/// Throws InvalidArgument for an unknown name.
AttackKind parse_attack_kind(std::string_view name);

struct AttackConfig {
  /// L-infinity budget in pixel units.
  double epsilon = 0.03;
  /// PGD step size.
  double alpha = 0.01;
  std::size_t iterations = 10;
  int wavelet_levels = 1;
  bool clamp_valid_range = true;
  /// Symmetric padding to the next power of two for the wavelet attack.
  bool pad_non_dyadic = true;

  /// Throws InvalidArgument on eps < 0, alpha <= 0, iterations == 0 or
  /// wavelet_levels < 1.
  void validate() const;
};

struct AttackResult {
  ImageTensor adversarial;
  /// The prediction on `adversarial` differs from the true label.
  bool success = false;
  double linf_distance = 0.0;
  /// Forward and gradient evaluations spent.
  std::size_t queries = 0;
  std::string attack;
  std::size_t attacks_run = 1;
};

/// Element-wise clip of x_adv into [x - eps, x + eps]. Throws DimMismatch.
ImageTensor project_linf(const ImageTensor& x_adv, const ImageTensor& x, double epsilon);

/// x' = x + eps * sign(grad), sign(0) = 0, then optional [0,1] clamp.
AttackResult fgsm(const Classifier& model, const ImageTensor& x, ClassLabel y, const AttackConfig& cfg);

/// `iterations` sign steps of size alpha, each followed by the L-infinity
/// projection around x and the optional [0,1] clamp.
AttackResult pgd(const Classifier& model, const ImageTensor& x, ClassLabel y, const AttackConfig& cfg);

/// Perturbs the detail coefficients of an L-level orthonormal Haar
/// decomposition along the coefficient-space gradient (the forward
/// transform of the input gradient), rescaled so the reconstructed change
/// has L-infinity norm eps. The approximation band is left untouched.
/// Throws NonDyadicDims when padding is disabled and a side is not a power
/// of two.
AttackResult wavelet_attack(const Classifier& model, const ImageTensor& x, ClassLabel y,
                            const AttackConfig& cfg);

inline constexpr AttackKind kDefaultAutoAttackSuite[] = {AttackKind::Fgsm, AttackKind::Pgd,
                                                         AttackKind::Wavelet};

/// Runs the suite in order and returns the first successful result, or the
/// last result when none succeeds. Throws InvalidArgument for an empty suite
/// or a nested AutoAttack entry.
AttackResult autoattack(const Classifier& model, const ImageTensor& x, ClassLabel y, double epsilon,
                        std::span<const AttackKind> suite, AttackConfig base = {});

AttackResult run_attack(AttackKind kind, const Classifier& model, const ImageTensor& x, ClassLabel y,
                        const AttackConfig& cfg);

/// Interleaved image <-> channel planes padded to powers of two, for the
/// wavelet path. Exposed for tests.
struct WaveletPlanes {
  Dims original;
  Dims padded;
  std::size_t channels = 0;
  /// channel-major planes of padded.area() entries each
  std::vector<double> planes;
};
WaveletPlanes to_planes(std::span<const double> interleaved, Dims dims, std::size_t channels,
                        bool symmetric_pad);
std::vector<double> from_planes(const WaveletPlanes& p);

struct LabeledImage {
  std::string id;
  ImageTensor image;
  ClassLabel label = ClassLabel::Real;
};

struct RobustnessRow {
  double epsilon = 0.0;
  std::string attack;
  double clean_accuracy = 0.0;
  double adversarial_accuracy = 0.0;
  std::size_t samples = 0;
};

/// One row per epsilon. Samples are attacked in parallel when the
/// classifier handle is shareable. Throws EmptyDataset.
std::vector<RobustnessRow> evaluate_robustness(const Classifier& model, std::span<const LabeledImage> data,
                                               AttackKind attack, std::span<const double> epsilons,
                                               const AttackConfig& base);

/// CSV with header epsilon,attack,clean_acc,adv_acc,n_samples.
void write_robustness_csv(std::ostream& out, std::span<const RobustnessRow> rows);

}  // namespace veritas
