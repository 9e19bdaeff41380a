#include "veritas/descriptors.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "veritas/error.hpp"

namespace veritas {

const char* to_string(ArtifactCategory c) noexcept {
  switch (c) {
    case ArtifactCategory::Animal: return "animal";
    case ArtifactCategory::Vehicle: return "vehicle";
    case ArtifactCategory::Generic: return "generic";
  }
  return "generic";
}

ArtifactCategory parse_category(std::string_view s) {
  if (s == "animal") return ArtifactCategory::Animal;
  if (s == "vehicle") return ArtifactCategory::Vehicle;
  if (s == "generic") return ArtifactCategory::Generic;
  throw Error(ErrorCode::ParseError, "unknown artifact category '" + std::string(s) + "'");
}

namespace {

bool is_snake_case(std::string_view s) {
  if (s.empty() || !(s[0] >= 'a' && s[0] <= 'z')) return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string tuple_field(const nlohmann::json& entry, const char* key, const std::string& name) {
  auto it = entry.find(key);
  if (it == entry.end() || it->is_null()) {
    throw Error(ErrorCode::MissingTupleField, "artifact '" + name + "' has no " + key);
  }
  if (!it->is_string()) throw Error(ErrorCode::ParseError, "artifact '" + name + "': " + key + " must be a string");
  return it->get<std::string>();
}

}  // namespace

void validate_descriptor_library(std::span<const ArtifactDescriptor> library) {
  std::set<std::string, std::less<>> seen;
  for (const auto& d : library) {
    if (!is_snake_case(d.name)) throw Error(ErrorCode::ParseError, "artifact name '" + d.name + "' is not snake_case");
    if (!seen.insert(d.name).second) throw Error(ErrorCode::DuplicateArtifactName, "artifact '" + d.name + "' appears twice");
    if (blank(d.positive_text) || blank(d.negative_text) || blank(d.neutral_text)) {
      throw Error(ErrorCode::MissingTupleField, "artifact '" + d.name + "' has an empty description");
    }
    if (d.positive_text == d.negative_text || d.positive_text == d.neutral_text || d.negative_text == d.neutral_text) {
      throw Error(ErrorCode::ParseError, "artifact '" + d.name + "' repeats a description within its tuple");
    }
  }
}

std::vector<ArtifactDescriptor> parse_descriptor_library(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("descriptor library is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("artifacts") || !doc["artifacts"].is_array()) {
    throw Error(ErrorCode::ParseError, "descriptor library needs an \"artifacts\" array");
  }
  std::vector<ArtifactDescriptor> library;
  for (const auto& entry : doc["artifacts"]) {
    if (!entry.is_object()) throw Error(ErrorCode::ParseError, "descriptor entries must be objects");
    if (!entry.contains("name") || !entry["name"].is_string()) {
      throw Error(ErrorCode::ParseError, "descriptor entry without a string name");
    }
    ArtifactDescriptor d;
    d.name = entry["name"].get<std::string>();
    d.category = parse_category(entry.value("category", std::string("generic")));
    d.positive_text = tuple_field(entry, "positive_text", d.name);
    d.negative_text = tuple_field(entry, "negative_text", d.name);
    d.neutral_text = tuple_field(entry, "neutral_text", d.name);
    library.push_back(std::move(d));
  }
  validate_descriptor_library(library);
  return library;
}

std::vector<ArtifactDescriptor> load_descriptor_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read descriptor library " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_descriptor_library(ss.str());
}

const ArtifactDescriptor* find_descriptor(std::span<const ArtifactDescriptor> library, std::string_view name) {
  for (const auto& d : library)
    if (d.name == name) return &d;
  return nullptr;
}

}  // namespace veritas
