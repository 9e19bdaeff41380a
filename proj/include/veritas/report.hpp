#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "veritas/explainer.hpp"

namespace veritas {

inline constexpr int kReportSchemaVersion = 1;

/// Pretty JSON (two-space indent, trailing newline). Keys are emitted in a
/// fixed order and doubles in shortest round-trip form, so equal reports
/// serialise to equal bytes.
std::string serialize_report(const AnalysisReport& report);

/// Inverse of serialize_report. Throws ParseError.
AnalysisReport parse_report(std::string_view json_text);

/// Problems found in a report document: JSON syntax, required fields and
/// types, value ranges, and the retained <=> explanation-attempt invariant.
/// Empty when valid.
std::vector<std::string> validate_report(std::string_view json_text);

/// Copy with the timestamp blanked, for byte comparisons.
AnalysisReport mask_timestamp(AnalysisReport report);

}  // namespace veritas
