#include "veritas/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "veritas/error.hpp"
#include "veritas/format.hpp"
#include "veritas/kernels.hpp"

namespace veritas {

const char* to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::Fgsm: return "fgsm";
    case AttackKind::Pgd: return "pgd";
    case AttackKind::Wavelet: return "wavelet";
    case AttackKind::AutoAttack: return "autoattack";
  }
  return "fgsm";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "fgsm") return AttackKind::Fgsm;
  if (name == "pgd") return AttackKind::Pgd;
  if (name == "wavelet") return AttackKind::Wavelet;
  if (name == "autoattack") return AttackKind::AutoAttack;
  throw Error(ErrorCode::InvalidArgument, "unknown attack '" + std::string(name) + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (wavelet_levels < 1) throw Error(ErrorCode::InvalidArgument, "wavelet_levels must be >= 1");
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void clamp01(std::vector<double>& v) {
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
}

std::vector<double> to_vector(const ImageTensor& img) { return {img.data().begin(), img.data().end()}; }

ImageTensor with_data(const ImageTensor& like, std::vector<double> data) {
  return ImageTensor(like.height(), like.width(), like.channels(), std::move(data));
}

AttackResult finish(const Classifier& model, const ImageTensor& x, ImageTensor adv, ClassLabel y,
                    std::size_t queries, const char* name) {
  AttackResult r;
  r.linf_distance = linf(adv.data(), x.data());
  r.success = model.classify(adv).prediction != y;
  r.queries = queries + 1;
  r.adversarial = std::move(adv);
  r.attack = name;
  return r;
}

// Bounds-only projection; clamps `v` in place.
void project_into(std::vector<double>& v, std::span<const double> x, double eps) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], x[i] - eps, x[i] + eps);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::size_t mirror(std::size_t i, std::size_t n) { return i < n ? i : 2 * n - 1 - i; }

}  // namespace

ImageTensor project_linf(const ImageTensor& x_adv, const ImageTensor& x, double epsilon) {
  if (x_adv.dims() != x.dims() || x_adv.channels() != x.channels()) {
    throw Error(ErrorCode::DimMismatch, "projection needs images of the same shape");
  }
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  std::vector<double> v = to_vector(x_adv);
  project_into(v, x.data(), epsilon);
  return with_data(x, std::move(v));
}

AttackResult fgsm(const Classifier& model, const ImageTensor& x, ClassLabel y, const AttackConfig& cfg) {
  cfg.validate();
  const ImageGradient g = model.input_gradient(x, y);
  std::vector<double> adv = to_vector(x);
  for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = adv[i] + cfg.epsilon * sign(g.values[i]);
  if (cfg.clamp_valid_range) clamp01(adv);
  return finish(model, x, with_data(x, std::move(adv)), y, 1, "fgsm");
}

AttackResult pgd(const Classifier& model, const ImageTensor& x, ClassLabel y, const AttackConfig& cfg) {
  cfg.validate();
  std::vector<double> current = to_vector(x);
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const ImageGradient g = model.input_gradient(with_data(x, current), y);
    for (std::size_t i = 0; i < current.size(); ++i) current[i] = current[i] + cfg.alpha * sign(g.values[i]);
    project_into(current, x.data(), cfg.epsilon);
    if (cfg.clamp_valid_range) clamp01(current);
  }
  return finish(model, x, with_data(x, std::move(current)), y, cfg.iterations, "pgd");
}

WaveletPlanes to_planes(std::span<const double> interleaved, Dims dims, std::size_t channels,
                        bool symmetric_pad) {
  WaveletPlanes p;
  p.original = dims;
  p.channels = channels;
  p.padded = {next_pow2(dims.height), next_pow2(dims.width)};
  if (!(p.padded == dims) && !symmetric_pad) {
    throw Error(ErrorCode::NonDyadicDims, std::to_string(dims.height) + "x" + std::to_string(dims.width) +
                                              " is not a power-of-two size and padding is disabled");
  }
  p.planes.assign(channels * p.padded.area(), 0.0);
  for (std::size_t k = 0; k < channels; ++k)
    for (std::size_t r = 0; r < p.padded.height; ++r)
      for (std::size_t c = 0; c < p.padded.width; ++c) {
        const std::size_t sr = mirror(r, dims.height);
        const std::size_t sc = mirror(c, dims.width);
        p.planes[(k * p.padded.height + r) * p.padded.width + c] = interleaved[(sr * dims.width + sc) * channels + k];
      }
  return p;
}

std::vector<double> from_planes(const WaveletPlanes& p) {
  std::vector<double> out(p.original.area() * p.channels);
  for (std::size_t k = 0; k < p.channels; ++k)
    for (std::size_t r = 0; r < p.original.height; ++r)
      for (std::size_t c = 0; c < p.original.width; ++c)
        out[(r * p.original.width + c) * p.channels + k] = p.planes[(k * p.padded.height + r) * p.padded.width + c];
  return out;
}

AttackResult wavelet_attack(const Classifier& model, const ImageTensor& x, ClassLabel y, const AttackConfig& cfg) {
  cfg.validate();
  // Fail on geometry before spending a gradient query.
  WaveletPlanes coeffs = to_planes(x.data(), x.dims(), x.channels(), cfg.pad_non_dyadic);
  const Dims padded = coeffs.padded;
  if ((std::size_t{1} << cfg.wavelet_levels) > std::min(padded.height, padded.width)) {
    throw Error(ErrorCode::InvalidArgument, "wavelet_levels too large for the image size");
  }

  const ImageGradient g = model.input_gradient(x, y);
  // The pad is not part of the model input, so its gradient is zero.
  std::fill(coeffs.planes.begin(), coeffs.planes.end(), 0.0);
  for (std::size_t k = 0; k < x.channels(); ++k)
    for (std::size_t r = 0; r < x.height(); ++r)
      for (std::size_t c = 0; c < x.width(); ++c)
        coeffs.planes[(k * padded.height + r) * padded.width + c] = g.values[x.index(r, c, k)];

  // Orthonormal transform: the coefficient gradient is the transformed
  // input gradient. Keep detail bands of levels 1..L, drop the approximation.
  const Dims approx{padded.height >> cfg.wavelet_levels, padded.width >> cfg.wavelet_levels};
  for (std::size_t k = 0; k < x.channels(); ++k) {
    std::span<double> plane(coeffs.planes.data() + k * padded.area(), padded.area());
    kernels::haar_forward_2d(plane, padded, cfg.wavelet_levels);
    for (std::size_t r = 0; r < approx.height; ++r)
      for (std::size_t c = 0; c < approx.width; ++c) plane[r * padded.width + c] = 0.0;
    kernels::haar_inverse_2d(plane, padded, cfg.wavelet_levels);
  }

  // By linearity, inverse(W + s * g_W) = x + inverse(s * g_W); adding the
  // reconstructed change to x keeps eps = 0 exact.
  std::vector<double> delta = from_planes(coeffs);
  double peak = 0.0;
  for (double d : delta) peak = std::max(peak, std::abs(d));
  std::vector<double> adv = to_vector(x);
  if (peak > 0.0 && cfg.epsilon > 0.0) {
    const double scale = cfg.epsilon / peak;
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = adv[i] + scale * delta[i];
    project_into(adv, x.data(), cfg.epsilon);
  }
  if (cfg.clamp_valid_range) clamp01(adv);
  return finish(model, x, with_data(x, std::move(adv)), y, 1, "wavelet");
}

AttackResult run_attack(AttackKind kind, const Classifier& model, const ImageTensor& x, ClassLabel y,
                        const AttackConfig& cfg) {
  switch (kind) {
    case AttackKind::Fgsm: return fgsm(model, x, y, cfg);
    case AttackKind::Pgd: return pgd(model, x, y, cfg);
    case AttackKind::Wavelet: return wavelet_attack(model, x, y, cfg);
    case AttackKind::AutoAttack: return autoattack(model, x, y, cfg.epsilon, kDefaultAutoAttackSuite, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown attack");
}

AttackResult autoattack(const Classifier& model, const ImageTensor& x, ClassLabel y, double epsilon,
                        std::span<const AttackKind> suite, AttackConfig base) {
  if (suite.empty()) throw Error(ErrorCode::InvalidArgument, "attack suite is empty");
  base.epsilon = epsilon;
  AttackResult last;
  std::size_t queries = 0;
  std::size_t run = 0;
  for (AttackKind kind : suite) {
    if (kind == AttackKind::AutoAttack) throw Error(ErrorCode::InvalidArgument, "autoattack cannot nest itself");
    last = run_attack(kind, model, x, y, base);
    queries += last.queries;
    ++run;
    if (last.success) break;
  }
  last.queries = queries;
  last.attacks_run = run;
  return last;
}

std::vector<RobustnessRow> evaluate_robustness(const Classifier& model, std::span<const LabeledImage> data,
                                               AttackKind attack, std::span<const double> epsilons,
                                               const AttackConfig& base) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "no labelled images to attack");
  base.validate();

  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::vector<int> clean(data.size(), 0);
  std::exception_ptr failure;
  const bool parallel = model.descriptor().shareable;

#pragma omp parallel for if (parallel) schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& s = data[static_cast<std::size_t>(i)];
      clean[static_cast<std::size_t>(i)] = model.classify(s.image).prediction == s.label;
    } catch (...) {
#pragma omp critical(veritas_robustness_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t clean_correct = 0;
  for (int c : clean) clean_correct += static_cast<std::size_t>(c);

  std::vector<RobustnessRow> rows;
  for (double eps : epsilons) {
    AttackConfig cfg = base;
    cfg.epsilon = eps;
    cfg.validate();
    std::vector<int> robust(data.size(), 0);
#pragma omp parallel for if (parallel) schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        const auto& s = data[static_cast<std::size_t>(i)];
        robust[static_cast<std::size_t>(i)] = !run_attack(attack, model, s.image, s.label, cfg).success;
      } catch (...) {
#pragma omp critical(veritas_robustness_error)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    std::size_t adv_correct = 0;
    for (int r : robust) adv_correct += static_cast<std::size_t>(r);
    const double total = static_cast<double>(data.size());
    rows.push_back({eps, to_string(attack), static_cast<double>(clean_correct) / total,
                    static_cast<double>(adv_correct) / total, data.size()});
  }
  return rows;
}

void write_robustness_csv(std::ostream& out, std::span<const RobustnessRow> rows) {
  out << "epsilon,attack,clean_acc,adv_acc,n_samples\n";
  for (const auto& r : rows) {
    out << format_double(r.epsilon) << ',' << r.attack << ',' << format_double(r.clean_accuracy) << ','
        << format_double(r.adversarial_accuracy) << ',' << r.samples << '\n';
  }
}

}  // namespace veritas
