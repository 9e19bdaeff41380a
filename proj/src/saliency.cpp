#include "veritas/saliency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "veritas/error.hpp"
#include "veritas/forensic_core.hpp"

namespace veritas {

Heatmap gradcam_layer(const SaliencyTensors& t) {
  if (!t.activations.same_shape(t.gradients)) {
    throw Error(ErrorCode::DimMismatch, "activations and gradients differ in shape");
  }
  const std::size_t area = t.activations.height * t.activations.width;
  if (area == 0 || t.activations.maps == 0) throw Error(ErrorCode::ZeroDimension, "empty saliency layer");

  std::vector<double> cam(area, 0.0);
  for (std::size_t k = 0; k < t.activations.maps; ++k) {
    const auto grad = t.gradients.plane(k);
    double alpha = 0.0;
    for (double g : grad) alpha += g;
    alpha /= static_cast<double>(area);
    if (alpha == 0.0) continue;
    const auto act = t.activations.plane(k);
    for (std::size_t i = 0; i < area; ++i) cam[i] += alpha * act[i];
  }
  for (double& v : cam) v = std::max(v, 0.0);
  return Heatmap(t.activations.height, t.activations.width, std::move(cam));
}

Heatmap gradcam(const Classifier& classifier, const ImageTensor& img, ClassLabel target) {
  const Heatmap layer = gradcam_layer(classifier.saliency_tensors(img, target));
  return interpolate_heatmap(layer, img.dims());
}

Heatmap normalize_heatmap(const Heatmap& h) {
  const double m = h.max();
  if (!(m > 0.0)) return h;
  std::vector<double> out(h.values().begin(), h.values().end());
  for (double& v : out) v /= m;
  return Heatmap(h.height(), h.width(), std::move(out));
}

namespace {

std::array<double, 3> jet(double t) {
  auto ramp = [](double x) { return std::clamp(1.5 - std::abs(x), 0.0, 1.0); };
  return {ramp(4.0 * t - 3.0), ramp(4.0 * t - 2.0), ramp(4.0 * t - 1.0)};
}

}  // namespace

ImageTensor render_overlay(const ImageTensor& img, const Heatmap& h, double alpha) {
  const Heatmap norm = normalize_heatmap(interpolate_heatmap(h, img.dims()));
  std::vector<double> out(img.height() * img.width() * 3);
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c) {
      const auto color = jet(norm.at(r, c));
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double base = img.at(r, c, img.channels() >= 3 ? ch : 0);
        out[(r * img.width() + c) * 3 + ch] = std::clamp((1.0 - alpha) * base + alpha * color[ch], 0.0, 1.0);
      }
    }
  return ImageTensor(img.height(), img.width(), 3, std::move(out));
}

}  // namespace veritas
