#pragma once

// Batch orchestration: one report file per image plus an index, written
// atomically, with images fanned out over independent workers.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "veritas/backends.hpp"
#include "veritas/descriptors.hpp"
#include "veritas/explainer.hpp"

namespace veritas {

/// Writes to a sibling temporary file and renames it over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Resizes (bilinear) and adjusts channels (grey replicated, extra dropped)
/// to the classifier's native input.
ImageTensor prepare_input(const ImageTensor& img, const Classifier& classifier);

struct BatchItem {
  std::string id;
  std::filesystem::path path;
  std::optional<ClassLabel> label;
};

struct BatchOutcome {
  std::string id;
  bool ok = false;
  std::string report_file;
  std::optional<ClassLabel> label;
  ClassLabel verdict = ClassLabel::Real;
  double fake_probability = 0.0;
  bool artifact_bearing = false;
  /// Failing stage ("read", "classify", ...) and message when !ok.
  std::string stage;
  std::string error;
};

struct BatchOptions {
  std::size_t workers = 1;
  std::filesystem::path out_dir;
  bool overlays = false;
  /// Blank generated_at in written reports.
  bool mask_timestamps = false;
};

using BackendFactory = std::function<BackendSet()>;

/// Analyses every item; the factory is called once per worker. Outcomes are
/// returned in item order regardless of scheduling. Writes
/// <out>/<id>.report.json per success (and <id>.overlay.png on request),
/// then <out>/index.json.
std::vector<BatchOutcome> run_analyze_batch(std::span<const BatchItem> items, const BackendFactory& factory,
                                            std::span<const ArtifactDescriptor> library,
                                            const AnalysisConfig& config, const BatchOptions& options);

std::string serialize_index(std::span<const BatchOutcome> outcomes);

}  // namespace veritas
