#include <doctest.h>

#include <cmath>
#include <fstream>

#include "scratch_dir.hpp"
#include "support.hpp"
#include "veritas/explainer.hpp"
#include "veritas/mock_backends.hpp"
#include "veritas/plugin_backends.hpp"
#include "veritas/run_config.hpp"
#include "veritas/saliency.hpp"

using namespace veritas;
namespace fs = std::filesystem;

namespace {

fs::path install(const vt::ScratchDir& dir, std::initializer_list<const char*> kinds) {
  for (const char* kind : kinds) {
    fs::create_directories(dir.path() / kind);
    fs::copy_file(VERITAS_TEST_PLUGIN, dir.path() / kind / "plugin.so", fs::copy_options::overwrite_existing);
  }
  return dir.path();
}

}  // namespace

TEST_CASE("plugin classifier") {
  vt::ScratchDir dir("plugin-cls");
  const auto cls = load_plugin_classifier(install(dir, {"classifier"}));
  CHECK(cls->descriptor().name == "test-plugin");
  CHECK(cls->descriptor().deterministic);
  CHECK(cls->input_dims() == Dims{32, 32});
  const ImageTensor bright(32, 32, 3, std::vector<double>(32 * 32 * 3, 0.8));
  const auto out = cls->classify(bright);
  CHECK(out.logits[1] == doctest::Approx(0.3));
  CHECK(out.prediction == ClassLabel::Fake);
  CHECK_FALSE(cls->supports_gradients());
  CHECK(vt::error_code([&] { cls->input_gradient(bright, ClassLabel::Real); }) == ErrorCode::GradientsUnsupported);

  // GradCAM on one uniform-gradient map is the rectified channel mean.
  vt::Rng rng(90);
  const ImageTensor x = vt::random_image(rng, 32, 32, 3);
  const Heatmap h = gradcam(*cls, x, ClassLabel::Fake);
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t c = 0; c < 32; ++c)
      CHECK(h.at(r, c) == doctest::Approx((x.at(r, c, 0) + x.at(r, c, 1) + x.at(r, c, 2)) / 3.0 / 1024.0));
  CHECK(gradcam(*cls, x, ClassLabel::Real).max() == 0.0);
  CHECK(vt::error_code([&] { cls->classify(ImageTensor(8, 8, 3)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("plugin embedder, super-resolver and vlm") {
  vt::ScratchDir dir("plugin-all");
  const fs::path root = install(dir, {"embedder", "super_resolver", "vlm"});
  const auto emb = load_plugin_embedder(root);
  CHECK(emb->dim() == 4);
  CHECK(std::abs(emb->embed_text("abc").norm() - 1.0) <= 1e-12);
  // strlen("1234567") % 7 == 0, so the text lies on the same axis as a black image.
  CHECK(cosine_similarity(emb->embed_image(ImageTensor(2, 2, 3)), emb->embed_text("1234567")) == doctest::Approx(1.0));

  const auto sr = load_plugin_super_resolver(root);
  vt::Rng rng(91);
  const ImageTensor x = vt::random_image(rng, 4, 5, 3);
  const ImageTensor y = sr->super_resolve(x, 2);
  CHECK(y.dims() == Dims{8, 10});
  CHECK(y.at(7, 9, 2) == x.at(3, 4, 2));
  CHECK(vt::error_code([&] { sr->super_resolve(x, 3); }) == ErrorCode::UnsupportedFactor);

  const auto vlm = load_plugin_vlm(root);
  const ArtifactDescriptor d{"texture_artifact", ArtifactCategory::Generic, "Distorted texture.", "Realistic texture.",
                             "Background."};
  const std::vector<ArtifactDescriptor> lib{d};
  CHECK(parse_vlm_response(vlm->generate(build_prompt(d), x), lib).artifact == "texture_artifact");
  CHECK(vlm->generate("LONG", x).size() == 5000);
  CHECK(vt::error_code([&] { vlm->generate("TIMEOUT", x); }) == ErrorCode::GenerationTimeout);
}

TEST_CASE("missing or broken adapters are unavailable") {
  vt::ScratchDir dir("plugin-missing");
  CHECK(vt::error_code([&] { load_plugin_classifier(dir.path()); }) == ErrorCode::BackendUnavailable);
  fs::create_directories(dir.path() / "vlm");
  std::ofstream(dir.path() / "vlm" / "plugin.so") << "not a shared object";
  CHECK(vt::error_code([&] { load_plugin_vlm(dir.path()); }) == ErrorCode::BackendUnavailable);

  RunConfig cfg;
  cfg.backends = BackendMode::Real;
  cfg.model_dir = dir.path();
  BackendSet b = make_backends(cfg);
  CHECK(b.classifier->descriptor().name == "unavailable");
  CHECK(vt::error_code([&] { b.classifier->classify(ImageTensor(32, 32, 3)); }) == ErrorCode::BackendUnavailable);
  CHECK(vt::error_code([&] { b.super_resolver->super_resolve(ImageTensor(2, 2, 3), 2); }) ==
        ErrorCode::BackendUnavailable);

  cfg.sr_fallback = true;
  CHECK(make_backends(cfg).super_resolver->descriptor().name != "unavailable");
}

TEST_CASE("full real-mode analysis through plugins") {
  vt::ScratchDir dir("plugin-run");
  RunConfig cfg;
  cfg.backends = BackendMode::Real;
  cfg.model_dir = install(dir, {"classifier", "embedder", "super_resolver", "vlm"});
  BackendSet b = make_backends(cfg);
  const auto lib = load_descriptor_library(default_descriptor_library());
  AnalysisConfig a = to_analysis_config(cfg);
  a.threshold = 0.0;
  const ImageTensor bright(32, 32, 3, std::vector<double>(32 * 32 * 3, 0.8));
  const AnalysisReport r = analyze(bright, b, lib, a, "bright");
  CHECK(r.verdict == ClassLabel::Fake);
  CHECK(r.analysis == AnalysisStatus::Completed);
  CHECK(r.artifact_bearing);
  REQUIRE_FALSE(r.explanations.empty());
  for (const auto& e : r.explanations) CHECK(e.status == ExplanationStatus::Ok);
  for (const auto& [key, value] : r.pipeline_meta)
    if (key.rfind("backend_", 0) == 0 && key != "backend_mode") CHECK(std::get<std::string>(value) == "test-plugin");
}
