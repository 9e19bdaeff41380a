#include "veritas/report.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace veritas {

using ojson = nlohmann::ordered_json;

namespace {

ojson meta_to_json(const MetaValue& v) {
  return std::visit([](const auto& x) { return ojson(x); }, v);
}

MetaValue meta_from_json(const ojson& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorCode::ParseError, "pipeline_meta values must be scalars");
}

ClassLabel parse_verdict(const std::string& s) {
  if (s == "real") return ClassLabel::Real;
  if (s == "fake") return ClassLabel::Fake;
  throw Error(ErrorCode::ParseError, "verdict must be real or fake");
}

ScoreStatus parse_score_status(const std::string& s) {
  if (s == "scored") return ScoreStatus::Scored;
  if (s == "inapplicable") return ScoreStatus::Inapplicable;
  throw Error(ErrorCode::ParseError, "unknown artifact score status '" + s + "'");
}

ExplanationStatus parse_explanation_status(const std::string& s) {
  if (s == "ok") return ExplanationStatus::Ok;
  if (s == "unavailable") return ExplanationStatus::Unavailable;
  throw Error(ErrorCode::ParseError, "unknown explanation status '" + s + "'");
}

AnalysisStatus parse_analysis_status(const std::string& s) {
  if (s == "completed") return AnalysisStatus::Completed;
  if (s == "skipped_real_verdict") return AnalysisStatus::SkippedRealVerdict;
  throw Error(ErrorCode::ParseError, "unknown analysis status '" + s + "'");
}

ojson to_json(const AnalysisReport& r) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["image_id"] = r.image_id;
  j["verdict"] = to_string(r.verdict);
  j["fake_probability"] = r.fake_probability;
  j["logits"] = {r.logits[0], r.logits[1]};
  j["analysis"] = to_string(r.analysis);
  j["category"] = r.category ? ojson(to_string(*r.category)) : ojson(nullptr);
  j["artifact_bearing"] = r.artifact_bearing;

  ojson scores = ojson::array();
  for (const auto& o : r.artifact_scores) {
    ojson s;
    s["artifact"] = o.artifact;
    s["status"] = to_string(o.status);
    s["score"] = o.score ? ojson(*o.score) : ojson(nullptr);
    s["retained"] = o.retained;
    s["votes"] = {{"positive", o.counts.positive}, {"negative", o.counts.negative}, {"neutral", o.counts.neutral}};
    s["reason"] = o.reason.empty() ? ojson(nullptr) : ojson(o.reason);
    scores.push_back(std::move(s));
  }
  j["artifact_scores"] = std::move(scores);

  ojson expl = ojson::array();
  for (const auto& e : r.explanations) {
    ojson x;
    x["artifact"] = e.artifact;
    x["status"] = to_string(e.status);
    x["description"] = e.description ? ojson(*e.description) : ojson(nullptr);
    x["attempts"] = e.attempts;
    x["error"] = e.error.empty() ? ojson(nullptr) : ojson(e.error);
    expl.push_back(std::move(x));
  }
  j["explanations"] = std::move(expl);

  ojson meta = ojson::object();
  for (const auto& [k, v] : r.pipeline_meta) meta[k] = meta_to_json(v);
  j["pipeline_meta"] = std::move(meta);
  j["generated_at"] = r.generated_at;
  return j;
}

std::string optional_string(const ojson& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::string() : v.get<std::string>();
}

AnalysisReport from_json(const ojson& j) {
  AnalysisReport r;
  r.image_id = j.at("image_id").get<std::string>();
  r.verdict = parse_verdict(j.at("verdict").get<std::string>());
  r.fake_probability = j.at("fake_probability").get<double>();
  const auto& logits = j.at("logits");
  if (!logits.is_array() || logits.size() != 2) throw Error(ErrorCode::ParseError, "logits must have two entries");
  r.logits = {logits[0].get<double>(), logits[1].get<double>()};
  r.analysis = parse_analysis_status(j.at("analysis").get<std::string>());
  if (!j.at("category").is_null()) r.category = parse_category(j.at("category").get<std::string>());
  r.artifact_bearing = j.at("artifact_bearing").get<bool>();

  for (const auto& s : j.at("artifact_scores")) {
    ArtifactOutcome o;
    o.artifact = s.at("artifact").get<std::string>();
    o.status = parse_score_status(s.at("status").get<std::string>());
    if (!s.at("score").is_null()) o.score = s.at("score").get<double>();
    o.retained = s.at("retained").get<bool>();
    const auto& votes = s.at("votes");
    o.counts = {votes.at("positive").get<std::size_t>(), votes.at("negative").get<std::size_t>(),
                votes.at("neutral").get<std::size_t>()};
    o.reason = optional_string(s, "reason");
    r.artifact_scores.push_back(std::move(o));
  }
  for (const auto& x : j.at("explanations")) {
    ExplanationRecord e;
    e.artifact = x.at("artifact").get<std::string>();
    e.status = parse_explanation_status(x.at("status").get<std::string>());
    if (!x.at("description").is_null()) e.description = x.at("description").get<std::string>();
    e.attempts = x.at("attempts").get<std::size_t>();
    e.error = optional_string(x, "error");
    r.explanations.push_back(std::move(e));
  }
  for (const auto& [k, v] : j.at("pipeline_meta").items()) r.pipeline_meta.emplace_back(k, meta_from_json(v));
  r.generated_at = j.at("generated_at").get<std::string>();
  return r;
}

}  // namespace

std::string serialize_report(const AnalysisReport& report) { return to_json(report).dump(2) + "\n"; }

AnalysisReport parse_report(std::string_view json_text) {
  try {
    return from_json(ojson::parse(json_text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
}

AnalysisReport mask_timestamp(AnalysisReport report) {
  report.generated_at.clear();
  return report;
}

std::vector<std::string> validate_report(std::string_view json_text) {
  std::vector<std::string> problems;
  ojson j = ojson::parse(json_text, nullptr, false);
  if (j.is_discarded()) return {"not valid JSON"};
  if (!j.is_object()) return {"top level must be an object"};

  const auto need = [&](const ojson& obj, const char* key, auto pred, const char* what) {
    if (!obj.contains(key)) {
      problems.push_back(std::string("missing field ") + key);
      return false;
    }
    if (!pred(obj.at(key))) {
      problems.push_back(std::string(key) + " must be " + what);
      return false;
    }
    return true;
  };
  const auto is_string = [](const ojson& v) { return v.is_string(); };
  const auto is_bool = [](const ojson& v) { return v.is_boolean(); };
  const auto is_array = [](const ojson& v) { return v.is_array(); };
  const auto is_count = [](const ojson& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); };
  const auto is_string_or_null = [](const ojson& v) { return v.is_string() || v.is_null(); };
  const auto is_unit = [](const ojson& v) {
    return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0;
  };

  if (need(j, "schema_version", [](const ojson& v) { return v.is_number_integer(); }, "an integer") &&
      j["schema_version"].get<int>() != kReportSchemaVersion) {
    problems.push_back("unsupported schema_version");
  }
  need(j, "image_id", [](const ojson& v) { return v.is_string() && !v.get<std::string>().empty(); },
       "a non-empty string");
  need(j, "verdict", [](const ojson& v) { return v == "real" || v == "fake"; }, "real or fake");
  need(j, "fake_probability", is_unit, "a number in [0,1]");
  need(j, "logits",
       [](const ojson& v) { return v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number(); },
       "two numbers");
  need(j, "analysis", [](const ojson& v) { return v == "completed" || v == "skipped_real_verdict"; },
       "completed or skipped_real_verdict");
  need(j, "category", [](const ojson& v) { return v.is_null() || v == "animal" || v == "vehicle" || v == "generic"; },
       "animal, vehicle, generic or null");
  need(j, "artifact_bearing", is_bool, "a boolean");
  need(j, "pipeline_meta",
       [](const ojson& v) {
         if (!v.is_object()) return false;
         for (const auto& [k, x] : v.items())
           if (!(x.is_primitive() && !x.is_null())) return false;
         return true;
       },
       "an object of scalars");
  need(j, "generated_at", is_string, "a string");

  std::set<std::string> retained;
  bool any_retained = false;
  if (need(j, "artifact_scores", is_array, "an array")) {
    std::set<std::string> seen;
    for (const auto& s : j["artifact_scores"]) {
      if (!s.is_object()) {
        problems.push_back("artifact_scores entries must be objects");
        continue;
      }
      if (!need(s, "artifact", is_string, "a string")) continue;
      const std::string name = s["artifact"].get<std::string>();
      if (!seen.insert(name).second) problems.push_back("artifact " + name + " scored twice");
      const bool status_ok = need(s, "status", [](const ojson& v) { return v == "scored" || v == "inapplicable"; },
                                  "scored or inapplicable");
      const bool score_ok = need(s, "score", [&](const ojson& v) { return v.is_null() || is_unit(v); },
                                 "null or a number in [0,1]");
      need(s, "retained", is_bool, "a boolean");
      need(s, "reason", is_string_or_null, "a string or null");
      if (need(s, "votes", [](const ojson& v) { return v.is_object(); }, "an object")) {
        need(s["votes"], "positive", is_count, "a count");
        need(s["votes"], "negative", is_count, "a count");
        need(s["votes"], "neutral", is_count, "a count");
      }
      if (status_ok && score_ok && (s["status"] == "scored") != s["score"].is_number()) {
        problems.push_back("artifact " + name + ": score must be present exactly when status is scored");
      }
      if (s.contains("retained") && s["retained"] == true) {
        retained.insert(name);
        any_retained = true;
        if (score_ok && !s["score"].is_number()) problems.push_back("artifact " + name + ": retained without score");
      }
    }
  }
  if (j.contains("artifact_bearing") && j["artifact_bearing"].is_boolean() && j["artifact_bearing"] != any_retained) {
    problems.push_back("artifact_bearing disagrees with retained artifacts");
  }

  if (need(j, "explanations", is_array, "an array")) {
    std::set<std::string> explained;
    for (const auto& x : j["explanations"]) {
      if (!x.is_object()) {
        problems.push_back("explanations entries must be objects");
        continue;
      }
      if (!need(x, "artifact", is_string, "a string")) continue;
      const std::string name = x["artifact"].get<std::string>();
      if (!explained.insert(name).second) problems.push_back("artifact " + name + " explained twice");
      if (!retained.contains(name)) problems.push_back("explanation for non-retained artifact " + name);
      need(x, "attempts", [](const ojson& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 1; },
           "an integer >= 1");
      need(x, "error", is_string_or_null, "a string or null");
      if (need(x, "status", [](const ojson& v) { return v == "ok" || v == "unavailable"; }, "ok or unavailable") &&
          need(x, "description", is_string_or_null, "a string or null")) {
        const bool ok = x["status"] == "ok";
        const auto& d = x["description"];
        if (ok != d.is_string()) {
          problems.push_back("explanation " + name + ": description must be present exactly when status is ok");
        } else if (ok) {
          const std::string text = d.get<std::string>();
          std::size_t chars = 0;
          for (unsigned char c : text)
            if ((c & 0xC0u) != 0x80u) ++chars;
          if (text.find_first_not_of(" \t\r\n") == std::string::npos) problems.push_back("explanation " + name + ": empty description");
          if (chars > kMaxDescriptionLength) problems.push_back("explanation " + name + ": description over 300 characters");
        }
      }
    }
    for (const auto& name : retained)
      if (!explained.contains(name)) problems.push_back("retained artifact " + name + " has no explanation attempt");
  }
  return problems;
}

}  // namespace veritas
