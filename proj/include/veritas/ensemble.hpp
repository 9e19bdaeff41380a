#pragma once

// Weighted ensemble of per-model fake probabilities and a seeded random
// search for the weights over the probability simplex.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace veritas {

struct EnsembleWeights {
  std::vector<double> weights;
};

struct TrialRecord {
  std::vector<double> raw_weights;
  EnsembleWeights weights;
  double validation_score = 0.0;
};

/// Per-sample member probabilities with ground-truth labels (1 = fake).
struct ValidationTable {
  std::vector<std::string> member_names;
  std::vector<std::string> sample_ids;
  std::vector<int> labels;
  /// probs[s][m]: fake probability of member m on sample s.
  std::vector<std::vector<double>> probs;

  std::size_t members() const noexcept { return member_names.size(); }
  std::size_t samples() const noexcept { return labels.size(); }
};

struct SearchOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// The first min(trials, members) trials are the one-hot vectors.
  bool inject_one_hot = true;
  double decision_threshold = 0.5;
};

struct SearchResult {
  EnsembleWeights best;
  double best_score = 0.0;
  std::size_t best_trial = 0;
  std::vector<TrialRecord> trials;
};

/// Throws AllZeroWeights when nothing is positive, InvalidArgument for
/// negative or non-finite entries.
EnsembleWeights normalize_weights(std::span<const double> raw);

/// Convex combination sum_i w_i p_i. Throws DimMismatch.
double ensemble_predict(std::span<const double> member_probs, const EnsembleWeights& w);

/// Fraction of samples whose ensemble output falls on the labelled side of
/// the threshold (output >= threshold means fake).
double ensemble_accuracy(const ValidationTable& table, const EnsembleWeights& w, double threshold = 0.5);

/// Uniform random trials on [0,1]^n, each normalised and scored by
/// accuracy; ties keep the earliest trial. Trials are scored in parallel,
/// the result does not depend on the thread count. Throws
/// EmptyValidationSet and InvalidArgument (trials == 0).
SearchResult search_weights(const ValidationTable& table, const SearchOptions& options);

/// CSV with header `sample_id,label,<member>...`; label is 0/1 or real/fake.
/// Throws ParseError.
ValidationTable read_member_table(std::istream& in);

}  // namespace veritas
