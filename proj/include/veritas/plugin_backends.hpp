#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "veritas/backends.hpp"

namespace veritas {

class PluginLibrary;

/// Loads the adapter for `kind` from `<model_dir>/<kind>/plugin.so`.
/// Throws BackendUnavailable naming the missing file or symbol.
std::shared_ptr<Classifier> load_plugin_classifier(const std::filesystem::path& model_dir);
std::shared_ptr<Embedder> load_plugin_embedder(const std::filesystem::path& model_dir);
std::shared_ptr<SuperResolver> load_plugin_super_resolver(const std::filesystem::path& model_dir);
std::shared_ptr<Vlm> load_plugin_vlm(const std::filesystem::path& model_dir);

/// Placeholders for adapters that could not be loaded. Every call throws
/// BackendUnavailable with the original reason, so the failure surfaces at
/// the stage that needs the backend rather than at start-up.
class UnavailableClassifier final : public Classifier {
 public:
  explicit UnavailableClassifier(std::string reason) : reason_(std::move(reason)) {}
  BackendDescriptor descriptor() const override;
  Dims input_dims() const override;
  std::size_t input_channels() const override;
  ClassifierOutput classify(const ImageTensor& img, bool with_activations = false) const override;

 private:
  std::string reason_;
};

class UnavailableEmbedder final : public Embedder {
 public:
  explicit UnavailableEmbedder(std::string reason) : reason_(std::move(reason)) {}
  BackendDescriptor descriptor() const override;
  std::size_t dim() const override;
  Embedding embed_image(const ImageTensor& img) const override;
  Embedding embed_text(std::string_view text) const override;

 private:
  std::string reason_;
};

class UnavailableSuperResolver final : public SuperResolver {
 public:
  explicit UnavailableSuperResolver(std::string reason) : reason_(std::move(reason)) {}
  BackendDescriptor descriptor() const override;
  ImageTensor super_resolve(const ImageTensor& img, int factor) const override;

 private:
  std::string reason_;
};

class UnavailableVlm final : public Vlm {
 public:
  explicit UnavailableVlm(std::string reason) : reason_(std::move(reason)) {}
  BackendDescriptor descriptor() const override;
  std::string generate(std::string_view prompt, const ImageTensor& img) override;

 private:
  std::string reason_;
};

}  // namespace veritas
