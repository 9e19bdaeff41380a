#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "veritas/batch.hpp"
#include "veritas/dataset.hpp"
#include "veritas/ensemble.hpp"
#include "veritas/error.hpp"
#include "veritas/format.hpp"
#include "veritas/image_io.hpp"
#include "veritas/report.hpp"
#include "veritas/robustness.hpp"
#include "veritas/run_config.hpp"

namespace fs = std::filesystem;
using namespace veritas;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitItemFailure = 1;
constexpr int kExitConfig = 2;

/// Command-line values; unset optionals leave the config file value alone.
struct Flags {
  std::string config;
  std::vector<std::string> images;
  std::string dataset;
  std::string out;
  std::optional<std::string> backends;
  std::optional<std::string> model_dir;
  std::optional<std::string> descriptors;
  std::optional<std::size_t> limit;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<std::size_t> patch_size;
  std::optional<int> sr_factor;
  std::vector<double> epsilons;
  std::optional<std::size_t> iterations;
  std::optional<double> alpha;
  std::optional<std::string> attack;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> trials;
  std::string members_csv;
  std::vector<std::string> report_paths;
  bool strict = false;
  bool overlays = false;
  bool explain_real = false;
  bool sr_fallback = false;
  bool mask_timestamps = false;
};

RunConfig resolve_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.backends) {
    if (*f.backends == "mock") c.backends = BackendMode::Mock;
    else if (*f.backends == "real") c.backends = BackendMode::Real;
    else throw Error(ErrorCode::ConfigError, "--backends must be mock or real");
  }
  if (f.model_dir) c.model_dir = *f.model_dir;
  if (f.descriptors) c.descriptor_library = *f.descriptors;
  if (f.seed) c.seed = *f.seed;
  if (f.threshold) c.threshold = *f.threshold;
  if (f.patch_size) c.patch_size = *f.patch_size;
  if (f.sr_factor) c.sr_factor = *f.sr_factor;
  if (!f.epsilons.empty()) c.epsilons = f.epsilons;
  if (f.iterations) c.attack_config.iterations = *f.iterations;
  if (f.alpha) c.attack_config.alpha = *f.alpha;
  if (f.attack) {
    try {
      c.attack = parse_attack_kind(*f.attack);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  if (f.workers) c.workers = *f.workers;
  if (f.trials) c.ensemble_trials = *f.trials;
  if (f.overlays) c.overlays = true;
  if (f.explain_real) c.explain_real = true;
  if (f.sr_fallback) c.sr_fallback = true;
  c.validate();
  return c;
}

std::vector<BatchItem> resolve_items(const Flags& f) {
  if (f.images.empty() == f.dataset.empty()) {
    throw Error(ErrorCode::ConfigError, "give either --image (repeatable) or --dataset");
  }
  std::vector<BatchItem> items;
  if (!f.dataset.empty()) {
    const DatasetIndex index = ingest_cifake(f.dataset, false);
    for (const auto& w : index.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& e : index.entries) items.push_back({e.id, e.path, e.label});
  } else {
    for (const auto& p : f.images) items.push_back({image_id_for(p), p, std::nullopt});
  }
  if (f.limit && *f.limit < items.size()) items.resize(*f.limit);
  return items;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(out_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file_atomic(p, text);
}

int cmd_classify(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const auto items = resolve_items(f);
  BackendSet backends = make_backends(cfg);
  std::ostringstream csv;
  csv << "image_id,label,verdict,fake_probability\n";
  std::size_t failures = 0;
  for (const auto& item : items) {
    try {
      const ImageTensor img = prepare_input(read_image(item.path), *backends.classifier);
      const ClassifierOutput out = backends.classifier->classify(img);
      csv << item.id << ',' << (item.label ? to_string(*item.label) : "") << ',' << to_string(out.prediction) << ','
          << format_double(out.fake_probability()) << '\n';
    } catch (const Error& e) {
      ++failures;
      std::cerr << "error: " << item.id << ": stage classify: " << e.what() << '\n';
    }
  }
  emit(f.out, csv.str());
  return failures > 0 && f.strict ? kExitItemFailure : kExitOk;
}

int cmd_analyze(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  if (f.out.empty()) throw Error(ErrorCode::ConfigError, "analyze needs --out <directory>");
  const auto items = resolve_items(f);
  const auto library_path = cfg.descriptor_library.empty() ? default_descriptor_library() : cfg.descriptor_library;
  std::vector<ArtifactDescriptor> library;
  try {
    library = load_descriptor_library(library_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }

  BatchOptions opts;
  opts.workers = cfg.workers;
  opts.out_dir = f.out;
  opts.overlays = cfg.overlays;
  opts.mask_timestamps = f.mask_timestamps;
  const auto outcomes = run_analyze_batch(items, [&] { return make_backends(cfg); }, library,
                                          to_analysis_config(cfg), opts);
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    if (o.ok) continue;
    ++failures;
    std::cerr << "error: " << o.id << ": stage " << o.stage << ": " << o.error << '\n';
  }
  std::cerr << "analyzed " << outcomes.size() - failures << "/" << outcomes.size() << " images into " << f.out << '\n';
  return failures > 0 && f.strict ? kExitItemFailure : kExitOk;
}

int cmd_attack(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  const auto items = resolve_items(f);
  BackendSet backends = make_backends(cfg);
  std::vector<LabeledImage> data;
  std::size_t failures = 0;
  for (const auto& item : items) {
    try {
      ImageTensor img = prepare_input(read_image(item.path), *backends.classifier);
      // Unlabelled inputs are attacked against the clean prediction.
      const ClassLabel label = item.label ? *item.label : backends.classifier->classify(img).prediction;
      data.push_back({item.id, std::move(img), label});
    } catch (const Error& e) {
      ++failures;
      std::cerr << "error: " << item.id << ": stage read: " << e.what() << '\n';
    }
  }
  if (failures > 0 && f.strict) return kExitItemFailure;
  const auto rows = evaluate_robustness(*backends.classifier, data, cfg.attack, cfg.epsilons, cfg.attack_config);
  std::ostringstream csv;
  write_robustness_csv(csv, rows);
  emit(f.out, csv.str());
  return kExitOk;
}

int cmd_tune_ensemble(const Flags& f) {
  const RunConfig cfg = resolve_config(f);
  if (f.members_csv.empty()) throw Error(ErrorCode::ConfigError, "tune-ensemble needs --members-csv");
  std::ifstream in(f.members_csv);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + f.members_csv);
  const ValidationTable table = read_member_table(in);
  SearchOptions opts;
  opts.trials = cfg.ensemble_trials;
  opts.seed = cfg.seed;
  opts.inject_one_hot = cfg.ensemble_inject_one_hot;
  const SearchResult r = search_weights(table, opts);

  nlohmann::ordered_json j;
  j["members"] = table.member_names;
  j["weights"] = r.best.weights;
  j["validation_accuracy"] = r.best_score;
  j["best_trial"] = r.best_trial;
  j["trials"] = opts.trials;
  j["seed"] = opts.seed;
  j["inject_one_hot"] = opts.inject_one_hot;
  j["samples"] = table.samples();
  emit(f.out, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_report_validate(const Flags& f) {
  if (f.report_paths.empty()) throw Error(ErrorCode::ConfigError, "report-validate needs at least one path");
  std::vector<fs::path> files;
  for (const auto& p : f.report_paths) {
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        if (name.size() > 12 && name.ends_with(".report.json")) files.push_back(e.path());
      }
    } else {
      files.emplace_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  std::size_t invalid = 0;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto problems = in ? validate_report(ss.str()) : std::vector<std::string>{"cannot read file"};
    if (problems.empty()) {
      std::cout << "valid   " << file.string() << '\n';
    } else {
      ++invalid;
      std::cout << "invalid " << file.string() << '\n';
      for (const auto& p : problems) std::cout << "  - " << p << '\n';
    }
  }
  return invalid > 0 ? kExitItemFailure : kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--backends", f.backends, "mock or real")->check(CLI::IsMember({"mock", "real"}));
  sub->add_option("--model-dir", f.model_dir, "plugin directory for real backends (else $VERITAS_MODEL_DIR)");
  sub->add_option("--seed", f.seed, "seed for mock backends and searches");
  sub->add_option("--out", f.out, "output file or directory");
  sub->add_flag("--strict", f.strict, "exit 1 when any item fails");
}

void add_inputs(CLI::App* sub, Flags& f) {
  sub->add_option("--image", f.images, "input image (repeatable)");
  sub->add_option("--dataset", f.dataset, "CIFAKE-layout root directory");
  sub->add_option("--limit", f.limit, "process at most N inputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"veritas: synthetic image detection with artifact explanations"};
  app.require_subcommand(1);
  Flags f;

  auto* classify = app.add_subcommand("classify", "real/fake verdict per image as CSV");
  add_common(classify, f);
  add_inputs(classify, f);

  auto* analyze = app.add_subcommand("analyze", "full artifact analysis, one report per image");
  add_common(analyze, f);
  add_inputs(analyze, f);
  analyze->add_option("--descriptors", f.descriptors, "artifact descriptor library (JSON)");
  analyze->add_option("--threshold", f.threshold, "artifact retention threshold");
  analyze->add_option("--patch-size", f.patch_size, "patch edge in super-resolved pixels");
  analyze->add_option("--sr-factor", f.sr_factor, "super-resolution factor (2 or 4)");
  analyze->add_option("--workers", f.workers, "images analysed concurrently");
  analyze->add_flag("--overlays", f.overlays, "also write heatmap overlay PNGs");
  analyze->add_flag("--explain-real", f.explain_real, "analyse images classified real too");
  analyze->add_flag("--sr-fallback", f.sr_fallback, "bicubic resize when no super-resolver plugin is installed");
  analyze->add_flag("--mask-timestamps", f.mask_timestamps, "blank generated_at for byte-stable output");

  auto* attack = app.add_subcommand("attack", "accuracy under adversarial attack as CSV");
  add_common(attack, f);
  add_inputs(attack, f);
  attack->add_option("--attack", f.attack, "fgsm, pgd, wavelet or autoattack");
  attack->add_option("--epsilon", f.epsilons, "L-infinity budget (repeatable)");
  attack->add_option("--iterations", f.iterations, "PGD iterations");
  attack->add_option("--alpha", f.alpha, "PGD step size");

  auto* tune = app.add_subcommand("tune-ensemble", "random search over ensemble weights");
  add_common(tune, f);
  tune->add_option("--members-csv", f.members_csv, "sample_id,label,<member>... probabilities")->required();
  tune->add_option("--trials", f.trials, "number of random trials");

  auto* validate = app.add_subcommand("report-validate", "check report files against the schema rules");
  validate->add_option("paths", f.report_paths, "report files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*classify) return cmd_classify(f);
    if (*analyze) return cmd_analyze(f);
    if (*attack) return cmd_attack(f);
    if (*tune) return cmd_tune_ensemble(f);
    if (*validate) return cmd_report_validate(f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::NoSuchDirectory:
      case ErrorCode::EmptyDataset:
      case ErrorCode::InvalidArgument:
      case ErrorCode::UnsupportedFactor:
        return kExitConfig;
      default:
        return kExitItemFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitItemFailure;
  }
  return kExitConfig;
}
