#include "veritas/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <sstream>

#include "veritas/error.hpp"
#include "veritas/random.hpp"

namespace veritas {

EnsembleWeights normalize_weights(std::span<const double> raw) {
  if (raw.empty()) throw Error(ErrorCode::AllZeroWeights, "no weights given");
  double total = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "ensemble weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroWeights, "at least one weight must be positive");
  EnsembleWeights out{std::vector<double>(raw.begin(), raw.end())};
  for (double& w : out.weights) w /= total;
  return out;
}

double ensemble_predict(std::span<const double> member_probs, const EnsembleWeights& w) {
  if (member_probs.size() != w.weights.size()) {
    throw Error(ErrorCode::DimMismatch, "member probabilities and weights differ in length");
  }
  double acc = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < member_probs.size(); ++i) {
    const double p = member_probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "member probability outside [0,1]");
    acc += w.weights[i] * p;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  // Rounding can push the sum an ulp outside the members' range.
  return member_probs.empty() ? 0.0 : std::clamp(acc, lo, hi);
}

double ensemble_accuracy(const ValidationTable& table, const EnsembleWeights& w, double threshold) {
  if (table.samples() == 0) throw Error(ErrorCode::EmptyValidationSet, "validation table has no samples");
  std::size_t correct = 0;
  for (std::size_t s = 0; s < table.samples(); ++s) {
    const int predicted = ensemble_predict(table.probs[s], w) >= threshold ? 1 : 0;
    if (predicted == table.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(table.samples());
}

SearchResult search_weights(const ValidationTable& table, const SearchOptions& options) {
  if (table.samples() == 0) throw Error(ErrorCode::EmptyValidationSet, "validation table has no samples");
  if (table.members() == 0) throw Error(ErrorCode::InvalidArgument, "validation table has no members");
  if (options.trials == 0) throw Error(ErrorCode::InvalidArgument, "at least one trial is required");
  // Validate up front: nothing may throw inside the parallel region.
  if (table.probs.size() != table.samples()) throw Error(ErrorCode::DimMismatch, "probs/labels length mismatch");
  for (const auto& row : table.probs) {
    if (row.size() != table.members()) throw Error(ErrorCode::DimMismatch, "ragged probability table");
    for (double p : row)
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "member probability outside [0,1]");
  }

  const std::size_t n = table.members();
  SearchResult result;
  result.trials.resize(options.trials);

  // Sampling is serial so the stream of trials is fixed by the seed alone.
  std::mt19937_64 rng(options.seed);
  for (std::size_t t = 0; t < options.trials; ++t) {
    auto& raw = result.trials[t].raw_weights;
    raw.assign(n, 0.0);
    if (options.inject_one_hot && t < n) {
      raw[t] = 1.0;
    } else {
      for (double& w : raw) w = uniform01(rng);
    }
  }

  const auto count = static_cast<std::ptrdiff_t>(options.trials);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    TrialRecord& trial = result.trials[static_cast<std::size_t>(t)];
    const bool all_zero = std::all_of(trial.raw_weights.begin(), trial.raw_weights.end(),
                                      [](double w) { return w == 0.0; });
    trial.weights = all_zero ? EnsembleWeights{std::vector<double>(n, 1.0 / static_cast<double>(n))}
                             : normalize_weights(trial.raw_weights);
    trial.validation_score = ensemble_accuracy(table, trial.weights, options.decision_threshold);
  }

  std::size_t best = 0;
  for (std::size_t t = 1; t < options.trials; ++t) {
    if (result.trials[t].validation_score > result.trials[best].validation_score) best = t;
  }
  result.best_trial = best;
  result.best = result.trials[best].weights;
  result.best_score = result.trials[best].validation_score;
  return result;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int parse_label(const std::string& s, std::size_t line_no) {
  if (s == "1" || s == "fake" || s == "FAKE") return 1;
  if (s == "0" || s == "real" || s == "REAL") return 0;
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": label '" + s +
                                         "' is not one of 0, 1, real, fake");
}

}  // namespace

ValidationTable read_member_table(std::istream& in) {
  ValidationTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (!header) {
      if (cells.size() < 3 || cells[0] != "sample_id" || cells[1] != "label") {
        throw Error(ErrorCode::ParseError, "header must be sample_id,label,member_1[,member_2...]");
      }
      table.member_names.assign(cells.begin() + 2, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != table.members() + 2) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(table.members() + 2) + " columns");
    }
    std::vector<double> row;
    for (std::size_t m = 0; m < table.members(); ++m) {
      const std::string& cell = cells[m + 2];
      std::size_t used = 0;
      double p = 0.0;
      try {
        p = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty() || !(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": '" + cell +
                                               "' is not a probability in [0,1]");
      }
      row.push_back(p);
    }
    table.sample_ids.push_back(cells[0]);
    table.labels.push_back(parse_label(cells[1], line_no));
    table.probs.push_back(std::move(row));
  }
  if (!header) throw Error(ErrorCode::ParseError, "member table is empty");
  return table;
}

}  // namespace veritas
