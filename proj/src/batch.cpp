#include "veritas/batch.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>

#include <unistd.h>

#include <json.hpp>

#include "veritas/error.hpp"
#include "veritas/image_io.hpp"
#include "veritas/kernels.hpp"
#include "veritas/report.hpp"
#include "veritas/saliency.hpp"

namespace veritas {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot create " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

ImageTensor prepare_input(const ImageTensor& img, const Classifier& classifier) {
  const Dims target = classifier.input_dims();
  const std::size_t channels = classifier.input_channels();
  ImageTensor out = img;
  if (out.channels() != channels) {
    std::vector<double> data(out.height() * out.width() * channels);
    for (std::size_t p = 0; p < out.height() * out.width(); ++p)
      for (std::size_t c = 0; c < channels; ++c)
        data[p * channels + c] = out.data()[p * out.channels() + std::min(c, out.channels() - 1)];
    out = ImageTensor(out.height(), out.width(), channels, std::move(data));
  }
  if (out.dims() != target) {
    std::vector<double> data(target.area() * channels);
    kernels::resize_bilinear(out.data(), out.dims(), channels, data, target);
    out = ImageTensor(target.height, target.width, channels, std::move(data));
  }
  return out;
}

std::vector<BatchOutcome> run_analyze_batch(std::span<const BatchItem> items, const BackendFactory& factory,
                                            std::span<const ArtifactDescriptor> library,
                                            const AnalysisConfig& config, const BatchOptions& options) {
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (!fs::is_directory(options.out_dir)) throw Error(ErrorCode::IoError, "cannot create " + options.out_dir.string());

  std::vector<BatchOutcome> outcomes(items.size());
  const int workers = static_cast<int>(std::max<std::size_t>(1, std::min(options.workers, items.size())));

#pragma omp parallel num_threads(workers)
  {
    std::optional<BackendSet> backends;
    std::string setup_error;
    try {
      backends = factory();
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(items.size()); ++i) {
      const BatchItem& item = items[static_cast<std::size_t>(i)];
      BatchOutcome& o = outcomes[static_cast<std::size_t>(i)];
      o.id = item.id;
      o.label = item.label;
      const char* stage = "backends";
      try {
        if (!backends) throw Error(ErrorCode::BackendUnavailable, setup_error);
        stage = "read";
        const ImageTensor raw = read_image(item.path);
        const ImageTensor img = prepare_input(raw, *backends->classifier);
        stage = "analyze";
        AnalysisTrace trace;
        AnalysisReport report = analyze(img, *backends, library, config, item.id, &trace);
        if (options.mask_timestamps) report = mask_timestamp(std::move(report));
        stage = "write";
        o.report_file = item.id + ".report.json";
        write_file_atomic(options.out_dir / o.report_file, serialize_report(report));
        if (options.overlays && !trace.image_sr.empty()) {
          write_png(options.out_dir / (item.id + ".overlay.png"), render_overlay(trace.image_sr, trace.heatmap_lr));
        }
        o.ok = true;
        o.verdict = report.verdict;
        o.fake_probability = report.fake_probability;
        o.artifact_bearing = report.artifact_bearing;
      } catch (const StageError& e) {
        o.stage = e.stage();
        o.error = e.what();
        o.report_file.clear();
      } catch (const std::exception& e) {
        o.stage = stage;
        o.error = e.what();
        o.report_file.clear();
      }
    }
  }

  write_file_atomic(options.out_dir / "index.json", serialize_index(outcomes));
  return outcomes;
}

std::string serialize_index(std::span<const BatchOutcome> outcomes) {
  using ojson = nlohmann::ordered_json;
  ojson entries = ojson::array();
  std::size_t ok = 0;
  std::size_t fake = 0;
  std::size_t bearing = 0;
  for (const auto& o : outcomes) {
    ojson e;
    e["image_id"] = o.id;
    e["status"] = o.ok ? "ok" : "error";
    e["label"] = o.label ? ojson(to_string(*o.label)) : ojson(nullptr);
    if (o.ok) {
      ++ok;
      fake += o.verdict == ClassLabel::Fake;
      bearing += o.artifact_bearing;
      e["report"] = o.report_file;
      e["verdict"] = to_string(o.verdict);
      e["fake_probability"] = o.fake_probability;
      e["artifact_bearing"] = o.artifact_bearing;
    } else {
      e["stage"] = o.stage;
      e["error"] = o.error;
    }
    entries.push_back(std::move(e));
  }
  ojson j;
  j["summary"] = {{"images", outcomes.size()},
                  {"succeeded", ok},
                  {"failed", outcomes.size() - ok},
                  {"fake_verdicts", fake},
                  {"artifact_bearing", bearing}};
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

}  // namespace veritas
