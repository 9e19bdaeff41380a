#pragma once

#include "veritas/backends.hpp"
#include "veritas/image.hpp"

namespace veritas {

/// GradCAM at the classifier's saliency layer: channel weights are the
/// spatial means of the activation gradients, the weighted sum of maps is
/// rectified, and the result is upsampled bilinearly to the image size.
/// Throws GradientsUnsupported.
Heatmap gradcam(const Classifier& classifier, const ImageTensor& img, ClassLabel target);

/// Layer-resolution map before upsampling.
Heatmap gradcam_layer(const SaliencyTensors& tensors);

/// Divides by the maximum; an all-zero map is returned unchanged.
Heatmap normalize_heatmap(const Heatmap& h);

/// RGB visualisation: the image (grey if single channel) alpha-blended with a
/// jet colour map of the normalised heatmap resized to the image.
ImageTensor render_overlay(const ImageTensor& img, const Heatmap& h, double alpha = 0.45);

}  // namespace veritas
