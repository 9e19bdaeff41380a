#include "veritas/dataset.hpp"

#include <algorithm>

#include "veritas/error.hpp"
#include "veritas/image_io.hpp"

namespace veritas {

namespace fs = std::filesystem;

const char* to_string(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

std::size_t DatasetIndex::count(ClassLabel label) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [label](const DatasetEntry& e) { return e.label == label; }));
}

std::string image_id_for(const fs::path& path) { return path.stem().string(); }

DatasetIndex ingest_cifake(const fs::path& root, bool inspect_images) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::NoSuchDirectory, root.string() + " is not a directory");

  DatasetIndex index;
  for (Split split : {Split::Train, Split::Test}) {
    for (ClassLabel label : {ClassLabel::Real, ClassLabel::Fake}) {
      const std::string label_dir = label == ClassLabel::Real ? "REAL" : "FAKE";
      const fs::path dir = root / to_string(split) / label_dir;
      if (!fs::is_directory(dir, ec)) continue;
      for (const auto& item : fs::directory_iterator(dir)) {
        if (!item.is_regular_file() || !is_image_file(item.path())) continue;
        DatasetEntry e;
        e.path = item.path();
        e.label = label;
        e.split = split;
        e.id = std::string(to_string(split)) + "_" + label_dir + "_" + image_id_for(item.path());
        index.entries.push_back(std::move(e));
      }
    }
  }
  if (index.entries.empty()) throw Error(ErrorCode::EmptyDataset, "no images under " + root.string());
  std::sort(index.entries.begin(), index.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id || (a.id == b.id && a.path < b.path); });
  for (std::size_t i = 1; i < index.entries.size(); ++i) {
    if (index.entries[i].id == index.entries[i - 1].id) {
      index.warnings.push_back("duplicate id " + index.entries[i].id + " (" + index.entries[i].path.string() + ")");
      index.entries[i].id += "_" + index.entries[i].path.extension().string().substr(1);
    }
  }

  if (inspect_images) {
    for (const auto& e : index.entries) {
      try {
        const ImageTensor img = read_image(e.path);
        if (img.height() != 32 || img.width() != 32) {
          index.warnings.push_back(e.path.string() + " is " + std::to_string(img.height()) + "x" +
                                   std::to_string(img.width()) + ", not 32x32");
        }
      } catch (const Error& err) {
        index.warnings.push_back(std::string("unreadable image: ") + err.what());
      }
    }
  }
  return index;
}

}  // namespace veritas
