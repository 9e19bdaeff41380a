#include "veritas/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "veritas/mock_backends.hpp"
#include "veritas/plugin_backends.hpp"

#ifndef VERITAS_DATA_DIR
#define VERITAS_DATA_DIR "data"
#endif

namespace veritas {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error("config key '" + key + "' has the wrong type");
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || k == a;
    if (!known) config_error("unknown config key '" + where + k + "'");
  }
}

}  // namespace

const char* to_string(BackendMode m) noexcept { return m == BackendMode::Mock ? "mock" : "real"; }

void RunConfig::validate() const {
  try {
    to_analysis_config(*this).validate();
    attack_config.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (workers == 0) config_error("workers must be at least 1");
  if (epsilons.empty()) config_error("at least one epsilon is required");
  for (double e : epsilons)
    if (!(e >= 0.0)) config_error("epsilons must be >= 0");
  if (ensemble_trials == 0) config_error("ensemble trials must be at least 1");
}

RunConfig parse_run_config(std::string_view json_text, RunConfig c) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) config_error("config is not a JSON object");
  check_keys(j,
             {"backends", "model_dir", "sr_fallback", "sr_factor", "patch_size", "threshold", "descriptor_library",
              "retries", "seed", "explain_real", "normalize_heatmap", "category_texts", "workers", "overlays",
              "attack", "ensemble"},
             "");

  if (j.contains("backends")) {
    const auto mode = get_as<std::string>(j["backends"], "backends");
    if (mode == "mock") c.backends = BackendMode::Mock;
    else if (mode == "real") c.backends = BackendMode::Real;
    else config_error("backends must be mock or real");
  }
  if (j.contains("model_dir")) c.model_dir = get_as<std::string>(j["model_dir"], "model_dir");
  if (j.contains("sr_fallback")) c.sr_fallback = get_as<bool>(j["sr_fallback"], "sr_fallback");
  if (j.contains("sr_factor")) c.sr_factor = get_as<int>(j["sr_factor"], "sr_factor");
  if (j.contains("patch_size")) c.patch_size = get_as<std::size_t>(j["patch_size"], "patch_size");
  if (j.contains("threshold")) c.threshold = get_as<double>(j["threshold"], "threshold");
  if (j.contains("descriptor_library")) c.descriptor_library = get_as<std::string>(j["descriptor_library"], "descriptor_library");
  if (j.contains("retries")) c.retries = get_as<std::size_t>(j["retries"], "retries");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("explain_real")) c.explain_real = get_as<bool>(j["explain_real"], "explain_real");
  if (j.contains("normalize_heatmap")) c.normalize_heatmap = get_as<bool>(j["normalize_heatmap"], "normalize_heatmap");
  if (j.contains("workers")) c.workers = get_as<std::size_t>(j["workers"], "workers");
  if (j.contains("overlays")) c.overlays = get_as<bool>(j["overlays"], "overlays");
  if (j.contains("category_texts")) {
    const auto& t = j["category_texts"];
    check_keys(t, {"animal", "vehicle"}, "category_texts.");
    if (t.contains("animal")) c.category_texts.animal = get_as<std::string>(t["animal"], "category_texts.animal");
    if (t.contains("vehicle")) c.category_texts.vehicle = get_as<std::string>(t["vehicle"], "category_texts.vehicle");
  }
  if (j.contains("attack")) {
    const auto& a = j["attack"];
    check_keys(a, {"kind", "epsilons", "alpha", "iterations", "wavelet_levels", "clamp_valid_range", "pad_non_dyadic"},
               "attack.");
    if (a.contains("kind")) {
      try {
        c.attack = parse_attack_kind(get_as<std::string>(a["kind"], "attack.kind"));
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    if (a.contains("epsilons")) c.epsilons = get_as<std::vector<double>>(a["epsilons"], "attack.epsilons");
    if (a.contains("alpha")) c.attack_config.alpha = get_as<double>(a["alpha"], "attack.alpha");
    if (a.contains("iterations")) c.attack_config.iterations = get_as<std::size_t>(a["iterations"], "attack.iterations");
    if (a.contains("wavelet_levels")) c.attack_config.wavelet_levels = get_as<int>(a["wavelet_levels"], "attack.wavelet_levels");
    if (a.contains("clamp_valid_range")) c.attack_config.clamp_valid_range = get_as<bool>(a["clamp_valid_range"], "attack.clamp_valid_range");
    if (a.contains("pad_non_dyadic")) c.attack_config.pad_non_dyadic = get_as<bool>(a["pad_non_dyadic"], "attack.pad_non_dyadic");
  }
  if (j.contains("ensemble")) {
    const auto& e = j["ensemble"];
    check_keys(e, {"trials", "inject_one_hot"}, "ensemble.");
    if (e.contains("trials")) c.ensemble_trials = get_as<std::size_t>(e["trials"], "ensemble.trials");
    if (e.contains("inject_one_hot")) c.ensemble_inject_one_hot = get_as<bool>(e["inject_one_hot"], "ensemble.inject_one_hot");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base));
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["backends"] = to_string(c.backends);
  j["model_dir"] = c.model_dir.string();
  j["sr_fallback"] = c.sr_fallback;
  j["sr_factor"] = c.sr_factor;
  j["patch_size"] = c.patch_size;
  j["threshold"] = c.threshold;
  j["descriptor_library"] = c.descriptor_library.string();
  j["retries"] = c.retries;
  j["seed"] = c.seed;
  j["explain_real"] = c.explain_real;
  j["normalize_heatmap"] = c.normalize_heatmap;
  j["category_texts"] = {{"animal", c.category_texts.animal}, {"vehicle", c.category_texts.vehicle}};
  j["workers"] = c.workers;
  j["overlays"] = c.overlays;
  j["attack"] = {{"kind", to_string(c.attack)},
                 {"epsilons", c.epsilons},
                 {"alpha", c.attack_config.alpha},
                 {"iterations", c.attack_config.iterations},
                 {"wavelet_levels", c.attack_config.wavelet_levels},
                 {"clamp_valid_range", c.attack_config.clamp_valid_range},
                 {"pad_non_dyadic", c.attack_config.pad_non_dyadic}};
  j["ensemble"] = {{"trials", c.ensemble_trials}, {"inject_one_hot", c.ensemble_inject_one_hot}};
  return j.dump(2) + "\n";
}

std::filesystem::path default_descriptor_library() {
  return std::filesystem::path(VERITAS_DATA_DIR) / "descriptors.json";
}

std::filesystem::path resolve_model_dir(const RunConfig& config) {
  if (!config.model_dir.empty()) return config.model_dir;
  if (const char* env = std::getenv("VERITAS_MODEL_DIR"); env != nullptr && *env != '\0') return env;
  return {};
}

AnalysisConfig to_analysis_config(const RunConfig& c) {
  AnalysisConfig a;
  a.sr_factor = c.sr_factor;
  a.patch_size = c.patch_size;
  a.threshold = c.threshold;
  a.retries = c.retries;
  a.explain_real = c.explain_real;
  a.normalize_heatmap = c.normalize_heatmap;
  a.category_texts = c.category_texts;
  const auto library = c.descriptor_library.empty() ? default_descriptor_library() : c.descriptor_library;
  a.extra_meta = {
      {"backend_mode", std::string(to_string(c.backends))},
      {"category_text_animal", c.category_texts.animal},
      {"category_text_vehicle", c.category_texts.vehicle},
      {"descriptor_library", library.filename().string()},
      {"seed", static_cast<std::int64_t>(c.seed)},
  };
  return a;
}

BackendSet make_backends(const RunConfig& config) {
  if (config.backends == BackendMode::Mock) return make_mock_backends(config.seed);

  const auto dir = resolve_model_dir(config);
  BackendSet set;
  auto guarded = [&](auto load, auto make_stub) {
    try {
      if (dir.empty()) throw Error(ErrorCode::BackendUnavailable, "no model directory (set model_dir or VERITAS_MODEL_DIR)");
      return load(dir);
    } catch (const Error& e) {
      return make_stub(std::string(e.what()));
    }
  };
  set.classifier = guarded([](const auto& d) -> std::shared_ptr<Classifier> { return load_plugin_classifier(d); },
                           [](std::string r) -> std::shared_ptr<Classifier> { return std::make_shared<UnavailableClassifier>(r); });
  set.embedder = guarded([](const auto& d) -> std::shared_ptr<Embedder> { return load_plugin_embedder(d); },
                         [](std::string r) -> std::shared_ptr<Embedder> { return std::make_shared<UnavailableEmbedder>(r); });
  set.super_resolver = guarded(
      [](const auto& d) -> std::shared_ptr<SuperResolver> { return load_plugin_super_resolver(d); },
      [&](std::string r) -> std::shared_ptr<SuperResolver> {
        if (config.sr_fallback) return std::make_shared<BicubicSuperResolver>();
        return std::make_shared<UnavailableSuperResolver>(r);
      });
  set.vlm = guarded([](const auto& d) -> std::shared_ptr<Vlm> { return load_plugin_vlm(d); },
                    [](std::string r) -> std::shared_ptr<Vlm> { return std::make_shared<UnavailableVlm>(r); });
  return set;
}

}  // namespace veritas
