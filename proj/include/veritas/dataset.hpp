#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "veritas/backends.hpp"

namespace veritas {

enum class Split { Train, Test };
const char* to_string(Split s) noexcept;

struct DatasetEntry {
  std::filesystem::path path;
  ClassLabel label = ClassLabel::Real;
  Split split = Split::Test;
  /// <split>_<LABEL>_<stem>, unique within the index.
  std::string id;
};

struct DatasetIndex {
  /// Sorted by id.
  std::vector<DatasetEntry> entries;
  /// Non-fatal findings such as images that are not 32x32.
  std::vector<std::string> warnings;

  std::size_t count(ClassLabel label) const noexcept;
};

/// Indexes <root>/{train,test}/{REAL,FAKE}/*.{png,jpg,jpeg}; any subset of
/// the four directories may exist. Labels come only from the directory
/// names. With `inspect_images`, every file is decoded once to flag
/// unreadable or non-32x32 images as warnings.
/// Throws NoSuchDirectory or EmptyDataset.
DatasetIndex ingest_cifake(const std::filesystem::path& root, bool inspect_images = true);

/// File stem, used as the report id for single-image runs.
std::string image_id_for(const std::filesystem::path& path);

}  // namespace veritas
