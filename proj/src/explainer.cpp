#include "veritas/explainer.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include <json.hpp>

#include "veritas/saliency.hpp"

namespace veritas {

namespace {

std::string strip_code_prefix(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0u) != 0x80u) ++n;
  return n;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

// End of the balanced {...} starting at `open`, honouring JSON strings, or npos.
std::size_t matching_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::optional<nlohmann::json> first_json_object(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    const std::size_t close = matching_brace(text, open);
    if (close == std::string_view::npos) continue;
    auto parsed = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

std::string straighten_quotes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    // U+201C / U+201D are E2 80 9C / E2 80 9D.
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x9C || static_cast<unsigned char>(text[i + 2]) == 0x9D)) {
      out.push_back('"');
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

}  // namespace

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), "stage " + stage + ": " + strip_code_prefix(cause)), stage_(std::move(stage)) {}

ArtifactCategory category_gate(const Embedding& image, const Embedding& animal, const Embedding& vehicle) {
  const double a = cosine_similarity(image, animal);
  const double v = cosine_similarity(image, vehicle);
  if (a > v) return ArtifactCategory::Animal;
  if (v > a) return ArtifactCategory::Vehicle;
  return ArtifactCategory::Generic;
}

ArtifactCategory category_gate(const Embedding& image, const Embedder& embedder, const CategoryTexts& texts) {
  return category_gate(image, embedder.embed_text(texts.animal), embedder.embed_text(texts.vehicle));
}

std::vector<const ArtifactDescriptor*> active_descriptors(std::span<const ArtifactDescriptor> library,
                                                          ArtifactCategory category) {
  std::vector<const ArtifactDescriptor*> out;
  for (const auto& d : library)
    if (category == ArtifactCategory::Generic || d.category == category || d.category == ArtifactCategory::Generic)
      out.push_back(&d);
  return out;
}

DescriptorEmbeddings embed_descriptor(const ArtifactDescriptor& d, const Embedder& embedder) {
  return {embedder.embed_text(d.positive_text), embedder.embed_text(d.negative_text),
          embedder.embed_text(d.neutral_text)};
}

PatchVote vote_patch(const Embedding& patch, const DescriptorEmbeddings& texts) {
  return make_vote({cosine_similarity(patch, texts.positive), cosine_similarity(patch, texts.negative),
                    cosine_similarity(patch, texts.neutral)});
}

PatchVote vote_patch(const ImageTensor& patch, const ArtifactDescriptor& d, const Embedder& embedder) {
  return vote_patch(embedder.embed_image(patch), embed_descriptor(d, embedder));
}

const char* to_string(ScoreStatus s) noexcept {
  return s == ScoreStatus::Scored ? "scored" : "inapplicable";
}

const char* to_string(ExplanationStatus s) noexcept {
  return s == ExplanationStatus::Ok ? "ok" : "unavailable";
}

const char* to_string(AnalysisStatus s) noexcept {
  return s == AnalysisStatus::Completed ? "completed" : "skipped_real_verdict";
}

std::vector<ArtifactOutcome> score_image_artifacts(const ImageTensor& image_sr, const Heatmap& heatmap,
                                                   const PatchGrid& grid,
                                                   std::span<const ArtifactDescriptor* const> descriptors,
                                                   const Embedder& embedder, double threshold) {
  if (heatmap.dims() != image_sr.dims() || grid.source_dims != image_sr.dims()) {
    throw Error(ErrorCode::DimMismatch, "heatmap, grid and super-resolved image must share dimensions");
  }
  std::vector<Embedding> patch_embeddings;
  std::vector<double> weights;
  patch_embeddings.reserve(grid.patches.size());
  weights.reserve(grid.patches.size());
  for (const auto& p : grid.patches) {
    patch_embeddings.push_back(embedder.embed_image(image_sr.crop(p.row_offset, p.col_offset, p.height, p.width)));
    weights.push_back(p.weight);
  }

  std::vector<ArtifactOutcome> out;
  out.reserve(descriptors.size());
  std::vector<PatchVote> votes(grid.patches.size());
  for (const ArtifactDescriptor* d : descriptors) {
    const DescriptorEmbeddings texts = embed_descriptor(*d, embedder);
    for (std::size_t k = 0; k < patch_embeddings.size(); ++k) votes[k] = vote_patch(patch_embeddings[k], texts);

    ArtifactOutcome o;
    o.artifact = d->name;
    try {
      const ArtifactScore s = artifact_score(weights, votes, threshold, d->name);
      o.score = s.score;
      o.retained = s.retained;
      o.counts = s.counts;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoRelevantPatches) throw;
      o.status = ScoreStatus::Inapplicable;
      for (const auto& v : votes) {
        if (v.kind == VoteKind::Positive) ++o.counts.positive;
        else if (v.kind == VoteKind::Negative) ++o.counts.negative;
        else ++o.counts.neutral;
      }
      o.reason = "no non-neutral patch carries heatmap weight";
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<ArtifactOutcome> score_image_artifacts(const ImageTensor& image_sr, const Heatmap& heatmap,
                                                   const PatchGrid& grid,
                                                   std::span<const ArtifactDescriptor> library,
                                                   const Embedder& embedder, double threshold) {
  std::vector<const ArtifactDescriptor*> all;
  for (const auto& d : library) all.push_back(&d);
  return score_image_artifacts(image_sr, heatmap, grid, all, embedder, threshold);
}

std::string build_prompt(const ArtifactDescriptor& d) {
  std::string p;
  p += "Instruction: You are a helpful assistant that identifies errors and artifacts in images. "
       "Given the error code, describe instances in the image where the error occurs.\n\n";
  p += "JSON Schema:\n{\"artifact\": \"...\", \"description\": \"...\" }\n\n";
  p += "Example:\n{\"artifact\": \"biological_asymmetry\", \"description\": \"In the given image, "
       "the horse has unsymmetrical eyes\" }\n\n";
  p += "Guidelines:\n";
  p += "- Only describe the given artifact. Do not mention unrelated defects.\n";
  p += "- Limit each response to 1–2 lines.\n";
  p += "- Use directional or anatomical terms (e.g., \"left paw,\" \"lower trunk\").\n";
  p += "- Highlight visibility using terms like \"noticeable,\" \"clearly seen,\" or \"subtle.\"\n";
  p += "- Follow the JSON schema strictly.\n\n";
  p += "Error code: " + d.name + "\n";
  p += "Artifact description: " + d.positive_text + "\n";
  return p;
}

ArtifactExplanation parse_vlm_response(std::string_view text, std::span<const ArtifactDescriptor> library) {
  auto obj = first_json_object(text);
  if (!obj) obj = first_json_object(straighten_quotes(text));
  if (!obj) throw Error(ErrorCode::MalformedResponse, "no JSON object in response");

  const auto artifact = obj->find("artifact");
  const auto description = obj->find("description");
  if (artifact == obj->end() || !artifact->is_string()) {
    throw Error(ErrorCode::MalformedResponse, "response lacks a string \"artifact\"");
  }
  if (description == obj->end() || !description->is_string()) {
    throw Error(ErrorCode::MalformedResponse, "response lacks a string \"description\"");
  }
  ArtifactExplanation out{artifact->get<std::string>(), description->get<std::string>()};
  if (blank(out.description)) throw Error(ErrorCode::MalformedResponse, "empty description");
  if (utf8_length(out.description) > kMaxDescriptionLength) {
    throw Error(ErrorCode::MalformedResponse, "description longer than 300 characters");
  }
  if (find_descriptor(library, out.artifact) == nullptr) {
    throw Error(ErrorCode::ArtifactMismatch, "artifact '" + out.artifact + "' is not in the library");
  }
  return out;
}

void explain_retained(AnalysisReport& report, Vlm& vlm, std::span<const ArtifactDescriptor> library,
                      const ImageTensor& image_sr, std::size_t retries) {
  report.explanations.clear();
  for (const auto& outcome : report.artifact_scores) {
    if (!outcome.retained) continue;
    const ArtifactDescriptor* d = find_descriptor(library, outcome.artifact);
    if (d == nullptr) throw Error(ErrorCode::ArtifactMismatch, "scored artifact '" + outcome.artifact + "' missing from library");
    const std::string prompt = build_prompt(*d);

    ExplanationRecord rec;
    rec.artifact = d->name;
    while (rec.attempts < 1 + retries) {
      ++rec.attempts;
      try {
        const ArtifactExplanation e = parse_vlm_response(vlm.generate(prompt, image_sr), library);
        if (e.artifact != d->name) {
          throw Error(ErrorCode::ArtifactMismatch, "asked about '" + d->name + "', got '" + e.artifact + "'");
        }
        rec.status = ExplanationStatus::Ok;
        rec.description = e.description;
        rec.error.clear();
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedResponse && e.code() != ErrorCode::ArtifactMismatch &&
            e.code() != ErrorCode::GenerationTimeout) {
          throw;
        }
        rec.error = e.what();
      }
    }
    report.explanations.push_back(std::move(rec));
  }
}

void AnalysisConfig::validate() const {
  check_sr_factor(sr_factor);
  if (patch_size == 0) throw Error(ErrorCode::InvalidArgument, "patch_size must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
}

PipelineMeta make_pipeline_meta(const AnalysisConfig& config, const BackendSet& backends) {
  auto name_of = [](const auto& handle) -> std::string { return handle ? handle->descriptor().name : "none"; };
  PipelineMeta meta{
      {"backend_classifier", name_of(backends.classifier)},
      {"backend_embedder", name_of(backends.embedder)},
      {"backend_super_resolver", name_of(backends.super_resolver)},
      {"backend_vlm", name_of(backends.vlm)},
      {"explain_real", config.explain_real},
      {"gradcam_target", std::string("fake")},
      {"normalize_heatmap", config.normalize_heatmap},
      {"patch_size", static_cast<std::int64_t>(config.patch_size)},
      {"retries", static_cast<std::int64_t>(config.retries)},
      {"sr_factor", static_cast<std::int64_t>(config.sr_factor)},
      {"threshold", config.threshold},
  };
  for (const auto& kv : config.extra_meta) {
    auto it = std::find_if(meta.begin(), meta.end(), [&](const auto& m) { return m.first == kv.first; });
    if (it != meta.end()) it->second = kv.second;
    else meta.push_back(kv);
  }
  std::sort(meta.begin(), meta.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return meta;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AnalysisReport analyze(const ImageTensor& img, BackendSet& backends, std::span<const ArtifactDescriptor> library,
                       const AnalysisConfig& config, std::string image_id, AnalysisTrace* trace) {
  config.validate();
  if (!backends.classifier || !backends.embedder || !backends.super_resolver || !backends.vlm) {
    throw Error(ErrorCode::BackendUnavailable, "backend set is incomplete");
  }

  AnalysisReport report;
  report.image_id = std::move(image_id);
  report.pipeline_meta = make_pipeline_meta(config, backends);

  const ClassifierOutput out = run_stage("classify", [&] { return backends.classifier->classify(img); });
  report.verdict = out.prediction;
  report.fake_probability = out.fake_probability();
  report.logits = out.logits;

  if (report.verdict == ClassLabel::Real && !config.explain_real) {
    report.analysis = AnalysisStatus::SkippedRealVerdict;
    report.generated_at = utc_timestamp();
    return report;
  }

  // Saliency on the classifier-native image only.
  Heatmap heatmap = run_stage("gradcam", [&] { return gradcam(*backends.classifier, img, ClassLabel::Fake); });
  if (config.normalize_heatmap) heatmap = normalize_heatmap(heatmap);

  ImageTensor image_sr =
      run_stage("super_resolve", [&] { return backends.super_resolver->super_resolve(img, config.sr_factor); });

  const Heatmap heatmap_sr = interpolate_heatmap(heatmap, image_sr.dims());
  const PatchGrid grid = weigh_patches(heatmap_sr, build_patch_grid(image_sr.dims(), config.patch_size));

  const ArtifactCategory category = run_stage("embed", [&] {
    return category_gate(backends.embedder->embed_image(image_sr), *backends.embedder, config.category_texts);
  });
  report.category = category;
  const auto active = active_descriptors(library, category);

  report.artifact_scores = run_stage("vote", [&] {
    return score_image_artifacts(image_sr, heatmap_sr, grid, active, *backends.embedder, config.threshold);
  });
  report.artifact_bearing = std::any_of(report.artifact_scores.begin(), report.artifact_scores.end(),
                                        [](const ArtifactOutcome& o) { return o.retained; });

  run_stage("vlm_generate", [&] { explain_retained(report, *backends.vlm, library, image_sr, config.retries); });

  if (trace != nullptr) {
    trace->heatmap_lr = std::move(heatmap);
    trace->image_sr = std::move(image_sr);
    trace->grid = grid;
  }
  report.generated_at = utc_timestamp();
  return report;
}

}  // namespace veritas
