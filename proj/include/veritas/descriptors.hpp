#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace veritas {

enum class ArtifactCategory { Animal, Vehicle, Generic };

const char* to_string(ArtifactCategory c) noexcept;
/// Throws ParseError for anything but animal / vehicle / generic.
ArtifactCategory parse_category(std::string_view s);

/// Three-tuple description of one artifact: text for a patch that shows it,
/// one that is realistic with respect to it, and one where it cannot occur.
struct ArtifactDescriptor {
  std::string name;
  ArtifactCategory category = ArtifactCategory::Generic;
  std::string positive_text;
  std::string negative_text;
  std::string neutral_text;
};

/// JSON library: {"artifacts": [{"name", "category", "positive_text",
/// "negative_text", "neutral_text"}, ...]}.
/// Throws ParseError, MissingTupleField or DuplicateArtifactName.
std::vector<ArtifactDescriptor> parse_descriptor_library(std::string_view json_text);
std::vector<ArtifactDescriptor> load_descriptor_library(const std::filesystem::path& path);

/// Checks names (snake_case, unique) and the tuple texts (present, pairwise
/// distinct). Throws like parse_descriptor_library.
void validate_descriptor_library(std::span<const ArtifactDescriptor> library);

const ArtifactDescriptor* find_descriptor(std::span<const ArtifactDescriptor> library, std::string_view name);

}  // namespace veritas
