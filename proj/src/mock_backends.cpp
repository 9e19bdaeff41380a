#include "veritas/mock_backends.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <random>
#include <string_view>
#include <unordered_map>

#include "veritas/error.hpp"
#include "veritas/kernels.hpp"
#include "veritas/random.hpp"

namespace veritas {

// ---------------------------------------------------------------------------
// MockLinearClassifier

MockLinearClassifier::MockLinearClassifier(Params params) : params_(std::move(params)) {
  const std::size_t q = params_.pool;
  if (q == 0 || params_.channels == 0 || params_.input.area() == 0) {
    throw Error(ErrorCode::ZeroDimension, "mock classifier needs positive dims and pool");
  }
  if (params_.input.height % q != 0 || params_.input.width % q != 0) {
    throw Error(ErrorCode::InvalidArgument, "pool factor must divide the input dims");
  }
  layer_ = {params_.input.height / q, params_.input.width / q};
  if (params_.head.size() != params_.channels * layer_.area()) {
    throw Error(ErrorCode::DimMismatch, "head weight count does not match the saliency layer");
  }
  const double inv_block = 1.0 / static_cast<double>(q * q);
  input_weights_.resize(params_.input.area() * params_.channels);
  for (std::size_t r = 0; r < params_.input.height; ++r)
    for (std::size_t c = 0; c < params_.input.width; ++c)
      for (std::size_t k = 0; k < params_.channels; ++k) {
        const double h = params_.head[(k * layer_.height + r / q) * layer_.width + c / q];
        input_weights_[(r * params_.input.width + c) * params_.channels + k] = h * inv_block;
      }
}

MockLinearClassifier MockLinearClassifier::from_weights(Dims input, std::size_t channels,
                                                        std::vector<double> weights, double bias) {
  if (weights.size() != input.area() * channels) {
    throw Error(ErrorCode::DimMismatch, "weight vector length does not match the image");
  }
  Params p;
  p.input = input;
  p.channels = channels;
  p.pool = 1;
  p.feature_shift = 0.0;
  p.bias = bias;
  p.head.resize(weights.size());
  // Interleaved image order -> plane order.
  for (std::size_t r = 0; r < input.height; ++r)
    for (std::size_t c = 0; c < input.width; ++c)
      for (std::size_t k = 0; k < channels; ++k)
        p.head[(k * input.height + r) * input.width + c] = weights[(r * input.width + c) * channels + k];
  return MockLinearClassifier(std::move(p));
}

MockLinearClassifier MockLinearClassifier::seeded(std::uint64_t seed, Dims input, std::size_t channels,
                                                  std::size_t pool, double feature_shift, double gain) {
  Params p;
  p.input = input;
  p.channels = channels;
  p.pool = pool;
  p.feature_shift = feature_shift;
  p.name = "mock-linear-seeded";
  const std::size_t n = channels * (input.height / pool) * (input.width / pool);
  std::mt19937_64 rng(seed);
  p.head.resize(n);
  for (double& h : p.head) h = uniform(rng, -gain, gain) / static_cast<double>(n);
  p.bias = 0.0;
  return MockLinearClassifier(std::move(p));
}

BackendDescriptor MockLinearClassifier::descriptor() const {
  return {BackendKind::Classifier, params_.name, true, true};
}

FeatureMaps MockLinearClassifier::activations(const ImageTensor& img) const {
  const std::size_t q = params_.pool;
  FeatureMaps a{params_.channels, layer_.height, layer_.width,
                std::vector<double>(params_.channels * layer_.area(), 0.0)};
  const double inv_block = 1.0 / static_cast<double>(q * q);
  for (std::size_t k = 0; k < params_.channels; ++k)
    for (std::size_t i = 0; i < layer_.height; ++i)
      for (std::size_t j = 0; j < layer_.width; ++j) {
        double acc = 0.0;
        for (std::size_t r = i * q; r < (i + 1) * q; ++r)
          for (std::size_t c = j * q; c < (j + 1) * q; ++c) acc += img.at(r, c, k) - params_.feature_shift;
        a.values[(k * layer_.height + i) * layer_.width + j] = q == 1 ? acc : acc * inv_block;
      }
  return a;
}

double MockLinearClassifier::score(const ImageTensor& img) const {
  check_input(img);
  const FeatureMaps a = activations(img);
  double z = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) z += params_.head[i] * a.values[i];
  return z + params_.bias;
}

ClassifierOutput MockLinearClassifier::classify(const ImageTensor& img, bool with_activations) const {
  check_input(img);
  FeatureMaps a = activations(img);
  double z = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) z += params_.head[i] * a.values[i];
  z += params_.bias;
  ClassifierOutput out;
  out.logits = {-z, z};
  out.prediction = argmax_label(out.logits);
  if (with_activations) out.activations = std::move(a);
  return out;
}

ImageGradient MockLinearClassifier::input_gradient(const ImageTensor& img, ClassLabel label) const {
  const double z = score(img);
  // d/dz of lse(-z, z) - logit_y.
  const double p_fake = ClassifierOutput{{-z, z}, std::nullopt, ClassLabel::Real}.fake_probability();
  const double p_real = 1.0 - p_fake;
  const double dz = (p_fake - p_real) + (label == ClassLabel::Real ? 1.0 : -1.0);
  ImageGradient g{img.height(), img.width(), img.channels(), input_weights_};
  for (double& v : g.values) v *= dz;
  return g;
}

SaliencyTensors MockLinearClassifier::saliency_tensors(const ImageTensor& img, ClassLabel target) const {
  check_input(img);
  SaliencyTensors t{activations(img), {}};
  t.gradients = FeatureMaps{t.activations.maps, t.activations.height, t.activations.width, params_.head};
  if (target == ClassLabel::Real)
    for (double& v : t.gradients.values) v = -v;
  return t;
}

// ---------------------------------------------------------------------------
// MockConstantClassifier

MockConstantClassifier::MockConstantClassifier(std::array<double, 2> logits, Dims input,
                                               std::size_t channels)
    : logits_(logits), input_(input), channels_(channels) {}

BackendDescriptor MockConstantClassifier::descriptor() const {
  return {BackendKind::Classifier, "mock-constant", true, true};
}

namespace {
FeatureMaps identity_maps(const ImageTensor& img) {
  FeatureMaps a{img.channels(), img.height(), img.width(), std::vector<double>(img.size())};
  for (std::size_t k = 0; k < img.channels(); ++k)
    for (std::size_t r = 0; r < img.height(); ++r)
      for (std::size_t c = 0; c < img.width(); ++c)
        a.values[(k * img.height() + r) * img.width() + c] = img.at(r, c, k);
  return a;
}
}  // namespace

ClassifierOutput MockConstantClassifier::classify(const ImageTensor& img, bool with_activations) const {
  check_input(img);
  ClassifierOutput out;
  out.logits = logits_;
  out.prediction = argmax_label(logits_);
  if (with_activations) out.activations = identity_maps(img);
  return out;
}

ImageGradient MockConstantClassifier::input_gradient(const ImageTensor& img, ClassLabel) const {
  check_input(img);
  return {img.height(), img.width(), img.channels(), std::vector<double>(img.size(), 0.0)};
}

SaliencyTensors MockConstantClassifier::saliency_tensors(const ImageTensor& img, ClassLabel) const {
  check_input(img);
  SaliencyTensors t{identity_maps(img), {}};
  t.gradients = t.activations;
  std::fill(t.gradients.values.begin(), t.gradients.values.end(), 0.0);
  return t;
}

// ---------------------------------------------------------------------------
// MockEmbedder

namespace {

const std::unordered_map<std::string_view, std::size_t>& keyword_table() {
  using A = MockEmbedder::Axis;
  static const std::unordered_map<std::string_view, std::size_t> table = [] {
    std::unordered_map<std::string_view, std::size_t> t;
    auto add = [&t](std::size_t axis, std::initializer_list<std::string_view> words) {
      for (auto w : words) t.emplace(w, axis);
    };
    add(A::kAnimal, {"animal", "animals", "mammal", "mammals", "fur", "paw", "paws", "eye", "eyes",
                     "ear", "ears", "horse", "deer", "frog", "dog", "cat", "bird", "teeth", "dental"});
    add(A::kVehicle, {"vehicle", "vehicles", "car", "truck", "ship", "airplane", "plane", "panel",
                      "panels", "wheel", "wheels", "mechanical", "machine"});
    add(A::kRealistic, {"realistic", "natural", "consistent", "plausible", "correct", "clean",
                        "coherent", "intact"});
    add(A::kAnomaly, {"artifact", "artifacts", "distorted", "distortion", "unnatural", "anomaly",
                      "anomalies", "anomalous", "inconsistent", "irregular", "synthetic",
                      "artificial", "impossible", "incorrect", "misaligned", "broken"});
    add(A::kIrrelevant, {"irrelevant", "unrelated", "empty", "featureless", "background", "blank",
                         "uniform"});
    add(A::kEdge, {"edge", "edges", "boundary", "boundaries", "contour", "contours", "outline",
                   "jagged", "aliasing", "sharp", "sharpness", "sharpening", "cut"});
    add(A::kTexture, {"texture", "textures", "pattern", "patterns", "noise", "grain", "repetition",
                      "repeated", "grid", "detail", "details"});
    add(A::kColor, {"color", "colour", "colors", "colours", "hue", "tint", "saturation"});
    add(A::kSmooth, {"smooth", "smoothness", "smoothing", "blur", "blurred", "blurry", "soft",
                     "ghosting"});
    add(A::kLighting, {"light", "lighting", "highlight", "highlights", "reflection", "reflections",
                       "glossy", "shadow", "shadows", "specular", "shine"});
    add(A::kGeometry, {"shape", "geometry", "structure", "structures", "proportion", "proportions",
                       "scale", "perspective", "depth", "joint", "joints", "anatomy", "anatomical",
                       "pose", "foreshortening", "symmetry", "asymmetry", "asymmetric"});
    return t;
  }();
  return table;
}

double luminance(const ImageTensor& img, std::size_t r, std::size_t c) {
  if (img.channels() >= 3) return 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
  return img.at(r, c, 0);
}

}  // namespace

MockEmbedder::MockEmbedder() : rule_(&MockEmbedder::statistics_embedding) {}

MockEmbedder::MockEmbedder(ImageRule rule) : rule_(std::move(rule)), custom_rule_(true) {}

BackendDescriptor MockEmbedder::descriptor() const {
  return {BackendKind::Embedder, custom_rule_ ? "mock-keyword-embedder/custom" : "mock-keyword-embedder",
          true, true};
}

Embedding MockEmbedder::basis(std::size_t axis) {
  std::vector<double> v(kDim, 0.0);
  v.at(axis) = 1.0;
  return Embedding(std::move(v));
}

Embedding MockEmbedder::embed_text(std::string_view text) const {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed empty text");
  std::vector<double> v(kDim, 0.0);
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (auto it = keyword_table().find(word); it != keyword_table().end()) v[it->second] = 1.0;
    word.clear();
  };
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else {
      flush();
    }
  }
  flush();
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[kFallback] = 1.0;
  return Embedding::normalized(std::move(v));
}

Embedding MockEmbedder::embed_image(const ImageTensor& img) const {
  if (img.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed an empty image");
  Embedding e = rule_(img);
  if (e.dim() != kDim) throw Error(ErrorCode::DimMismatch, "image rule returned the wrong dimension");
  return Embedding::normalized(e.values());
}

Embedding MockEmbedder::statistics_embedding(const ImageTensor& img) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  const double n = static_cast<double>(h * w);

  double mean = 0.0;
  double sat = 0.0;
  double red = 0.0;
  double blue = 0.0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      mean += luminance(img, r, c);
      if (img.channels() >= 3) {
        const double a = img.at(r, c, 0), g = img.at(r, c, 1), b = img.at(r, c, 2);
        sat += std::max({a, g, b}) - std::min({a, g, b});
        red += a;
        blue += b;
      }
    }
  mean /= n;
  sat /= n;
  const double warmth = (red - blue) / n;

  double var = 0.0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const double d = luminance(img, r, c) - mean;
      var += d * d;
    }
  const double stddev = std::sqrt(var / n);

  double diff = 0.0;
  std::size_t diff_count = 0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      if (c + 1 < w) {
        diff += std::abs(luminance(img, r, c + 1) - luminance(img, r, c));
        ++diff_count;
      }
      if (r + 1 < h) {
        diff += std::abs(luminance(img, r + 1, c) - luminance(img, r, c));
        ++diff_count;
      }
    }
  const double edge = diff_count ? diff / static_cast<double>(diff_count) : 0.0;

  double lap = 0.0;
  std::size_t lap_count = 0;
  for (std::size_t r = 1; r + 1 < h; ++r)
    for (std::size_t c = 1; c + 1 < w; ++c) {
      const double l = 4.0 * luminance(img, r, c) - luminance(img, r - 1, c) - luminance(img, r + 1, c) -
                       luminance(img, r, c - 1) - luminance(img, r, c + 1);
      lap += std::abs(l) / 4.0;
      ++lap_count;
    }
  const double hf = lap_count ? lap / static_cast<double>(lap_count) : 0.0;

  std::vector<double> v(kDim, 0.0);
  v[kAnimal] = std::max(0.0, warmth);
  v[kVehicle] = std::max(0.0, -warmth);
  v[kRealistic] = 0.5 * edge + 0.01;
  v[kAnomaly] = 4.0 * hf;
  v[kIrrelevant] = 0.1 * std::exp(-stddev / 0.02);
  v[kEdge] = edge;
  v[kTexture] = stddev;
  v[kColor] = sat;
  v[kSmooth] = std::max(0.0, 0.1 - hf);
  v[kLighting] = std::max(0.0, mean - 0.7);
  v[kGeometry] = 0.1 * edge;
  v[kFallback] = 0.01;
  return Embedding(std::move(v));
}

// ---------------------------------------------------------------------------
// BicubicSuperResolver

BackendDescriptor BicubicSuperResolver::descriptor() const {
  return {BackendKind::SuperResolver, "bicubic-fallback (not DRCT)", true, true};
}

ImageTensor BicubicSuperResolver::super_resolve(const ImageTensor& img, int factor) const {
  check_sr_factor(factor);
  if (img.empty()) throw Error(ErrorCode::ZeroDimension, "cannot super-resolve an empty image");
  const auto f = static_cast<std::size_t>(factor);
  const Dims out_dims{img.height() * f, img.width() * f};
  std::vector<double> out(out_dims.area() * img.channels());
  kernels::resize_bicubic(img.data(), img.dims(), img.channels(), out, out_dims);
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return ImageTensor(out_dims.height, out_dims.width, img.channels(), std::move(out));
}

// ---------------------------------------------------------------------------
// VLM mocks

ScriptedVlm::ScriptedVlm(std::vector<std::string> script, std::string name)
    : script_(std::move(script)), name_(std::move(name)) {
  if (script_.empty()) throw Error(ErrorCode::InvalidArgument, "scripted VLM needs at least one response");
}

BackendDescriptor ScriptedVlm::descriptor() const { return {BackendKind::Vlm, name_, true, true}; }

std::string ScriptedVlm::generate(std::string_view prompt, const ImageTensor&) {
  if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  const std::size_t call = calls_.fetch_add(1);
  return script_[std::min(call, script_.size() - 1)];
}

namespace {

std::string line_after(std::string_view text, std::string_view label) {
  const auto pos = text.rfind(label);
  if (pos == std::string_view::npos) return {};
  const auto start = pos + label.size();
  const auto end = text.find('\n', start);
  return std::string(text.substr(start, end == std::string_view::npos ? text.npos : end - start));
}

std::string json_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) continue;
        out.push_back(ch);
    }
  }
  return out;
}

// Quadrant with the largest luminance variance.
const char* busiest_region(const ImageTensor& img) {
  static constexpr const char* kNames[4] = {"upper left", "upper right", "lower left", "lower right"};
  if (img.height() < 2 || img.width() < 2) return "centre";
  const std::size_t hh = img.height() / 2;
  const std::size_t hw = img.width() / 2;
  double best = -1.0;
  int best_q = 0;
  for (int q = 0; q < 4; ++q) {
    const std::size_t r0 = (q / 2) * hh;
    const std::size_t c0 = (q % 2) * hw;
    double s = 0.0, s2 = 0.0;
    for (std::size_t r = r0; r < r0 + hh; ++r)
      for (std::size_t c = c0; c < c0 + hw; ++c) {
        const double y = luminance(img, r, c);
        s += y;
        s2 += y * y;
      }
    const double n = static_cast<double>(hh * hw);
    const double var = s2 / n - (s / n) * (s / n);
    if (var > best) {
      best = var;
      best_q = q;
    }
  }
  return kNames[best_q];
}

}  // namespace

BackendDescriptor TemplateVlm::descriptor() const { return {BackendKind::Vlm, "mock-template-vlm", true, true}; }

std::string TemplateVlm::generate(std::string_view prompt, const ImageTensor& img) {
  if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  calls_.fetch_add(1);
  const std::string name = line_after(prompt, "Error code: ");
  std::string detail = line_after(prompt, "Artifact description: ");
  if (!detail.empty()) detail[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(detail[0])));
  while (!detail.empty() && (detail.back() == '.' || detail.back() == ' ')) detail.pop_back();
  std::string description = "Noticeable " + (detail.empty() ? std::string("artifact") : detail) +
                            ", clearly seen in the " + busiest_region(img) + " of the image.";
  if (description.size() > 280) description = description.substr(0, 277) + "...";
  return "{\"artifact\": \"" + json_escape(name) + "\", \"description\": \"" + json_escape(description) + "\"}";
}

BackendSet make_mock_backends(std::uint64_t seed) {
  BackendSet set;
  set.classifier = std::make_shared<MockLinearClassifier>(MockLinearClassifier::seeded(seed));
  set.embedder = std::make_shared<MockEmbedder>();
  set.super_resolver = std::make_shared<BicubicSuperResolver>();
  set.vlm = std::make_shared<TemplateVlm>();
  return set;
}

}  // namespace veritas
