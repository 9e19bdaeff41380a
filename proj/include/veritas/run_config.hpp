#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "veritas/backends.hpp"
#include "veritas/explainer.hpp"
#include "veritas/robustness.hpp"

namespace veritas {

enum class BackendMode { Mock, Real };

struct RunConfig {
  BackendMode backends = BackendMode::Mock;
  /// Real-backend plugin root; empty falls back to $VERITAS_MODEL_DIR.
  std::filesystem::path model_dir;
  /// Use the bicubic resizer when no super-resolution plugin is installed.
  bool sr_fallback = false;

  int sr_factor = 4;
  std::size_t patch_size = kDefaultPatchSize;
  double threshold = kDefaultThreshold;
  std::filesystem::path descriptor_library;
  std::size_t retries = kDefaultRetries;
  std::uint64_t seed = 0;
  bool explain_real = false;
  bool normalize_heatmap = true;
  CategoryTexts category_texts;

  std::size_t workers = 1;
  bool overlays = false;

  AttackKind attack = AttackKind::Fgsm;
  std::vector<double> epsilons{0.0, 0.01, 0.03, 0.1};
  AttackConfig attack_config;

  std::size_t ensemble_trials = 100;
  bool ensemble_inject_one_hot = true;

  /// Throws ConfigError.
  void validate() const;
};

const char* to_string(BackendMode m) noexcept;

/// Keys mirror the fields above (attack and ensemble settings nest under
/// "attack" / "ensemble"). Unknown keys and wrong types throw ConfigError.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// The configuration as JSON with every default filled in.
std::string dump_run_config(const RunConfig& config);

/// Library path when none is configured: the data directory shipped with
/// the sources.
std::filesystem::path default_descriptor_library();

std::filesystem::path resolve_model_dir(const RunConfig& config);

AnalysisConfig to_analysis_config(const RunConfig& config);

/// Fresh handles for one worker. Real mode loads plugins; a missing plugin
/// becomes a placeholder that fails at the stage that uses it.
BackendSet make_backends(const RunConfig& config);

}  // namespace veritas
