#pragma once

// Artifact analysis of one image: classify, GradCAM on the native image,
// super-resolve, weigh patches by heatmap mass, vote each patch against the
// descriptor tuples, score, and ask the VLM to describe retained artifacts.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "veritas/backends.hpp"
#include "veritas/descriptors.hpp"
#include "veritas/error.hpp"
#include "veritas/forensic_core.hpp"
#include "veritas/image.hpp"

namespace veritas {

/// Error raised by `analyze`, tagged with the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

inline constexpr std::size_t kMaxDescriptionLength = 300;
inline constexpr std::size_t kDefaultRetries = 2;

struct ArtifactExplanation {
  std::string artifact;
  std::string description;

  friend bool operator==(const ArtifactExplanation&, const ArtifactExplanation&) = default;
};

/// Texts the category gate compares the image against.
struct CategoryTexts {
  std::string animal = "a photo of an animal";
  std::string vehicle = "a photo of a vehicle";
};

/// Highest cosine similarity wins; an exact tie gives Generic.
ArtifactCategory category_gate(const Embedding& image, const Embedding& animal, const Embedding& vehicle);
ArtifactCategory category_gate(const Embedding& image, const Embedder& embedder, const CategoryTexts& texts = {});

/// Descriptors voted on for a category: its own plus the generic ones.
/// Generic activates every descriptor.
std::vector<const ArtifactDescriptor*> active_descriptors(std::span<const ArtifactDescriptor> library,
                                                          ArtifactCategory category);

struct DescriptorEmbeddings {
  Embedding positive;
  Embedding negative;
  Embedding neutral;
};

DescriptorEmbeddings embed_descriptor(const ArtifactDescriptor& d, const Embedder& embedder);

PatchVote vote_patch(const Embedding& patch, const DescriptorEmbeddings& texts);
PatchVote vote_patch(const ImageTensor& patch, const ArtifactDescriptor& d, const Embedder& embedder);

enum class ScoreStatus { Scored, Inapplicable };
const char* to_string(ScoreStatus s) noexcept;

/// Score of one artifact on one image. `score` is absent (status
/// Inapplicable, `reason` set) when no non-neutral patch carries weight.
struct ArtifactOutcome {
  std::string artifact;
  ScoreStatus status = ScoreStatus::Scored;
  std::optional<double> score;
  bool retained = false;
  VoteCounts counts;
  std::string reason;

  friend bool operator==(const ArtifactOutcome&, const ArtifactOutcome&) = default;
};

/// `grid` must already carry weights from `heatmap` (weigh_patches). The
/// heatmap only matters through those weights; it is checked for alignment.
std::vector<ArtifactOutcome> score_image_artifacts(const ImageTensor& image_sr, const Heatmap& heatmap,
                                                   const PatchGrid& grid,
                                                   std::span<const ArtifactDescriptor* const> descriptors,
                                                   const Embedder& embedder, double threshold);
std::vector<ArtifactOutcome> score_image_artifacts(const ImageTensor& image_sr, const Heatmap& heatmap,
                                                   const PatchGrid& grid,
                                                   std::span<const ArtifactDescriptor> library,
                                                   const Embedder& embedder, double threshold);

std::string build_prompt(const ArtifactDescriptor& d);

/// First JSON object in `text` with a string "artifact" naming a library
/// entry and a non-empty string "description" of at most 300 characters.
/// Throws MalformedResponse or ArtifactMismatch.
ArtifactExplanation parse_vlm_response(std::string_view text, std::span<const ArtifactDescriptor> library);

enum class ExplanationStatus { Ok, Unavailable };
const char* to_string(ExplanationStatus s) noexcept;

struct ExplanationRecord {
  std::string artifact;
  ExplanationStatus status = ExplanationStatus::Unavailable;
  std::optional<std::string> description;
  std::size_t attempts = 0;
  /// Last validation error when unavailable.
  std::string error;

  friend bool operator==(const ExplanationRecord&, const ExplanationRecord&) = default;
};

using MetaValue = std::variant<bool, std::int64_t, double, std::string>;
/// Ordered key/value list; make_pipeline_meta emits keys sorted.
using PipelineMeta = std::vector<std::pair<std::string, MetaValue>>;

enum class AnalysisStatus { Completed, SkippedRealVerdict };
const char* to_string(AnalysisStatus s) noexcept;

struct AnalysisReport {
  std::string image_id;
  ClassLabel verdict = ClassLabel::Real;
  double fake_probability = 0.0;
  std::array<double, 2> logits{0.0, 0.0};
  AnalysisStatus analysis = AnalysisStatus::Completed;
  std::optional<ArtifactCategory> category;
  bool artifact_bearing = false;
  std::vector<ArtifactOutcome> artifact_scores;
  std::vector<ExplanationRecord> explanations;
  PipelineMeta pipeline_meta;
  /// Only non-deterministic field; masked in golden comparisons.
  std::string generated_at;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Calls the VLM for every retained artifact, up to 1 + retries times,
/// until a response validates and names that artifact. Validation failures
/// and GenerationTimeout leave an Unavailable record; BackendUnavailable
/// propagates.
void explain_retained(AnalysisReport& report, Vlm& vlm, std::span<const ArtifactDescriptor> library,
                      const ImageTensor& image_sr, std::size_t retries = kDefaultRetries);

struct AnalysisConfig {
  int sr_factor = 4;
  std::size_t patch_size = kDefaultPatchSize;
  double threshold = kDefaultThreshold;
  std::size_t retries = kDefaultRetries;
  bool explain_real = false;
  /// Divide the GradCAM map by its maximum before interpolation. Scores do
  /// not depend on it; the overlay does.
  bool normalize_heatmap = true;
  CategoryTexts category_texts;
  /// Echoed verbatim into pipeline_meta (config values not owned here).
  PipelineMeta extra_meta;

  /// Throws InvalidArgument / UnsupportedFactor.
  void validate() const;
};

/// Intermediate products kept for overlays and tests.
struct AnalysisTrace {
  Heatmap heatmap_lr;
  ImageTensor image_sr;
  PatchGrid grid;
};

/// Stages: classify, gradcam, super_resolve, embed, vote, vlm_generate.
/// Any Error from a backend is rethrown as StageError naming the stage.
AnalysisReport analyze(const ImageTensor& img, BackendSet& backends, std::span<const ArtifactDescriptor> library,
                       const AnalysisConfig& config, std::string image_id, AnalysisTrace* trace = nullptr);

PipelineMeta make_pipeline_meta(const AnalysisConfig& config, const BackendSet& backends);

/// ISO-8601 UTC, second resolution.
std::string utc_timestamp();

}  // namespace veritas
