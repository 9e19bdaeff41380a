#include "veritas/plugin_backends.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <vector>

#include "veritas/error.hpp"
#include "veritas/plugin_abi.h"

namespace veritas {

// Owns the dlopen handle and the adapter's model handle.
class PluginLibrary {
 public:
  PluginLibrary(const std::filesystem::path& model_dir, BackendKind kind) {
    const std::filesystem::path kind_dir = model_dir / to_string(kind);
    const std::filesystem::path lib = kind_dir / "plugin.so";
    stage_ = to_string(kind);
    if (!std::filesystem::exists(lib)) {
      throw Error(ErrorCode::BackendUnavailable, stage_ + " adapter not found at " + lib.string());
    }
    dl_ = dlopen(lib.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (!dl_) {
      throw Error(ErrorCode::BackendUnavailable, stage_ + " adapter failed to load: " + dlerror());
    }
    auto entry = reinterpret_cast<veritas_plugin_entry_fn>(dlsym(dl_, "veritas_plugin_entry"));
    if (!entry || !(api_ = entry()) || api_->abi_version != VERITAS_PLUGIN_ABI_VERSION) {
      dlclose(dl_);
      throw Error(ErrorCode::BackendUnavailable, stage_ + " adapter at " + lib.string() +
                                                     " lacks a compatible veritas_plugin_entry");
    }
    handle_ = api_->open ? api_->open(kind_dir.c_str()) : nullptr;
    if (!handle_) {
      dlclose(dl_);
      throw Error(ErrorCode::BackendUnavailable, stage_ + " adapter could not open its model in " +
                                                     kind_dir.string());
    }
  }

  ~PluginLibrary() {
    if (api_->close) api_->close(handle_);
    dlclose(dl_);
  }

  PluginLibrary(const PluginLibrary&) = delete;
  PluginLibrary& operator=(const PluginLibrary&) = delete;

  const veritas_plugin_v1& api() const { return *api_; }
  void* handle() const { return handle_; }
  std::string name() const { return api_->name ? api_->name : "plugin"; }

  template <typename Fn>
  Fn require(Fn fn, const char* what) const {
    if (!fn) throw Error(ErrorCode::BackendUnavailable, name() + " does not implement " + what);
    return fn;
  }

  void check(int status, const char* what) const {
    switch (status) {
      case VERITAS_STATUS_OK: return;
      case VERITAS_STATUS_TIMEOUT: throw Error(ErrorCode::GenerationTimeout, name() + ": " + what);
      case VERITAS_STATUS_UNSUPPORTED: throw Error(ErrorCode::GradientsUnsupported, name() + ": " + what);
      case VERITAS_STATUS_SHAPE: throw Error(ErrorCode::ShapeMismatch, name() + ": " + what);
      default: throw Error(ErrorCode::BackendUnavailable, name() + ": " + what + " failed");
    }
  }

 private:
  std::string stage_;
  void* dl_ = nullptr;
  const veritas_plugin_v1* api_ = nullptr;
  void* handle_ = nullptr;
};

namespace {

veritas_image_view view_of(const ImageTensor& img) {
  return {img.height(), img.width(), img.channels(), img.data().data()};
}

BackendDescriptor plugin_descriptor(const PluginLibrary& lib, BackendKind kind) {
  // Real adapters are treated as single-consumer handles.
  return {kind, lib.name(), lib.api().deterministic != 0, false};
}

class PluginClassifier final : public Classifier {
 public:
  explicit PluginClassifier(std::shared_ptr<PluginLibrary> lib) : lib_(std::move(lib)) {
    auto shape = lib_->require(lib_->api().input_shape, "input_shape");
    std::size_t c = 0;
    lib_->check(shape(lib_->handle(), &dims_.height, &dims_.width, &c), "input_shape");
    channels_ = c;
  }

  BackendDescriptor descriptor() const override { return plugin_descriptor(*lib_, BackendKind::Classifier); }
  Dims input_dims() const override { return dims_; }
  std::size_t input_channels() const override { return channels_; }
  bool supports_gradients() const override {
    return lib_->api().input_gradient != nullptr && lib_->api().saliency_tensors != nullptr;
  }

  ClassifierOutput classify(const ImageTensor& img, bool with_activations) const override {
    check_input(img);
    auto fn = lib_->require(lib_->api().classify, "classify");
    ClassifierOutput out;
    const auto view = view_of(img);
    lib_->check(fn(lib_->handle(), &view, out.logits.data()), "classify");
    out.prediction = argmax_label(out.logits);
    if (with_activations) out.activations = saliency_tensors(img, out.prediction).activations;
    return out;
  }

  ImageGradient input_gradient(const ImageTensor& img, ClassLabel label) const override {
    check_input(img);
    if (!lib_->api().input_gradient) {
      throw Error(ErrorCode::GradientsUnsupported, lib_->name() + " has no input gradients");
    }
    ImageGradient g{img.height(), img.width(), img.channels(), std::vector<double>(img.size())};
    const auto view = view_of(img);
    lib_->check(lib_->api().input_gradient(lib_->handle(), &view, static_cast<int>(label), g.values.data()),
                "input_gradient");
    return g;
  }

  SaliencyTensors saliency_tensors(const ImageTensor& img, ClassLabel target) const override {
    check_input(img);
    if (!lib_->api().saliency_shape || !lib_->api().saliency_tensors) {
      throw Error(ErrorCode::GradientsUnsupported, lib_->name() + " has no saliency layer");
    }
    FeatureMaps shape;
    lib_->check(lib_->api().saliency_shape(lib_->handle(), &shape.maps, &shape.height, &shape.width),
                "saliency_shape");
    shape.values.assign(shape.maps * shape.height * shape.width, 0.0);
    SaliencyTensors t{shape, shape};
    const auto view = view_of(img);
    lib_->check(lib_->api().saliency_tensors(lib_->handle(), &view, static_cast<int>(target),
                                             t.activations.values.data(), t.gradients.values.data()),
                "saliency_tensors");
    return t;
  }

 private:
  std::shared_ptr<PluginLibrary> lib_;
  Dims dims_;
  std::size_t channels_ = 0;
};

class PluginEmbedder final : public Embedder {
 public:
  explicit PluginEmbedder(std::shared_ptr<PluginLibrary> lib) : lib_(std::move(lib)) {
    dim_ = lib_->require(lib_->api().embedding_dim, "embedding_dim")(lib_->handle());
    if (dim_ == 0) throw Error(ErrorCode::BackendUnavailable, lib_->name() + " reports a zero embedding dim");
  }

  BackendDescriptor descriptor() const override { return plugin_descriptor(*lib_, BackendKind::Embedder); }
  std::size_t dim() const override { return dim_; }

  Embedding embed_image(const ImageTensor& img) const override {
    if (img.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed an empty image");
    std::vector<double> out(dim_);
    const auto view = view_of(img);
    lib_->check(lib_->require(lib_->api().embed_image, "embed_image")(lib_->handle(), &view, out.data()),
                "embed_image");
    return Embedding::normalized(std::move(out));
  }

  Embedding embed_text(std::string_view text) const override {
    if (text.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed empty text");
    std::vector<double> out(dim_);
    const std::string owned(text);
    lib_->check(lib_->require(lib_->api().embed_text, "embed_text")(lib_->handle(), owned.c_str(), out.data()),
                "embed_text");
    return Embedding::normalized(std::move(out));
  }

 private:
  std::shared_ptr<PluginLibrary> lib_;
  std::size_t dim_ = 0;
};

class PluginSuperResolver final : public SuperResolver {
 public:
  explicit PluginSuperResolver(std::shared_ptr<PluginLibrary> lib) : lib_(std::move(lib)) {}

  BackendDescriptor descriptor() const override { return plugin_descriptor(*lib_, BackendKind::SuperResolver); }

  ImageTensor super_resolve(const ImageTensor& img, int factor) const override {
    check_sr_factor(factor);
    const auto f = static_cast<std::size_t>(factor);
    std::vector<double> out(img.size() * f * f);
    const auto view = view_of(img);
    lib_->check(lib_->require(lib_->api().super_resolve, "super_resolve")(lib_->handle(), &view, factor,
                                                                         out.data()),
                "super_resolve");
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
    return ImageTensor(img.height() * f, img.width() * f, img.channels(), std::move(out));
  }

 private:
  std::shared_ptr<PluginLibrary> lib_;
};

class PluginVlm final : public Vlm {
 public:
  explicit PluginVlm(std::shared_ptr<PluginLibrary> lib) : lib_(std::move(lib)) {}

  BackendDescriptor descriptor() const override { return plugin_descriptor(*lib_, BackendKind::Vlm); }

  std::string generate(std::string_view prompt, const ImageTensor& img) override {
    if (prompt.empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
    auto fn = lib_->require(lib_->api().vlm_generate, "vlm_generate");
    const std::string owned(prompt);
    const auto view = view_of(img);
    std::string buffer(4096, '\0');
    std::size_t len = 0;
    int status = fn(lib_->handle(), owned.c_str(), &view, buffer.data(), buffer.size(), &len);
    if (status == VERITAS_STATUS_BUFFER_TOO_SMALL) {
      buffer.assign(len + 1, '\0');
      status = fn(lib_->handle(), owned.c_str(), &view, buffer.data(), buffer.size(), &len);
    }
    lib_->check(status, "vlm_generate");
    buffer.resize(std::min(len, buffer.size()));
    return buffer;
  }

 private:
  std::shared_ptr<PluginLibrary> lib_;
};

[[noreturn]] void unavailable(const std::string& reason) {
  throw Error(ErrorCode::BackendUnavailable, reason);
}

}  // namespace

std::shared_ptr<Classifier> load_plugin_classifier(const std::filesystem::path& model_dir) {
  return std::make_shared<PluginClassifier>(std::make_shared<PluginLibrary>(model_dir, BackendKind::Classifier));
}

std::shared_ptr<Embedder> load_plugin_embedder(const std::filesystem::path& model_dir) {
  return std::make_shared<PluginEmbedder>(std::make_shared<PluginLibrary>(model_dir, BackendKind::Embedder));
}

std::shared_ptr<SuperResolver> load_plugin_super_resolver(const std::filesystem::path& model_dir) {
  return std::make_shared<PluginSuperResolver>(
      std::make_shared<PluginLibrary>(model_dir, BackendKind::SuperResolver));
}

std::shared_ptr<Vlm> load_plugin_vlm(const std::filesystem::path& model_dir) {
  return std::make_shared<PluginVlm>(std::make_shared<PluginLibrary>(model_dir, BackendKind::Vlm));
}

BackendDescriptor UnavailableClassifier::descriptor() const {
  return {BackendKind::Classifier, "unavailable", false, true};
}
Dims UnavailableClassifier::input_dims() const { return {32, 32}; }
std::size_t UnavailableClassifier::input_channels() const { return 3; }
ClassifierOutput UnavailableClassifier::classify(const ImageTensor&, bool) const { unavailable(reason_); }

BackendDescriptor UnavailableEmbedder::descriptor() const { return {BackendKind::Embedder, "unavailable", false, true}; }
std::size_t UnavailableEmbedder::dim() const { return 0; }
Embedding UnavailableEmbedder::embed_image(const ImageTensor&) const { unavailable(reason_); }
Embedding UnavailableEmbedder::embed_text(std::string_view) const { unavailable(reason_); }

BackendDescriptor UnavailableSuperResolver::descriptor() const {
  return {BackendKind::SuperResolver, "unavailable", false, true};
}
ImageTensor UnavailableSuperResolver::super_resolve(const ImageTensor&, int) const { unavailable(reason_); }

BackendDescriptor UnavailableVlm::descriptor() const { return {BackendKind::Vlm, "unavailable", false, true}; }
std::string UnavailableVlm::generate(std::string_view, const ImageTensor&) { unavailable(reason_); }

}  // namespace veritas
