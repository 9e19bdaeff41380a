#pragma once

// Hand-rolled generators and brute-force oracles shared by the tests.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "veritas/error.hpp"
#include "veritas/forensic_core.hpp"
#include "veritas/image.hpp"
#include "veritas/random.hpp"

namespace vt {

using Rng = std::mt19937_64;

inline std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = veritas::uniform(rng, lo, hi);
  return v;
}

inline veritas::ImageTensor random_image(Rng& rng, std::size_t h, std::size_t w, std::size_t c) {
  return veritas::ImageTensor(h, w, c, uniform_vector(rng, h * w * c, 0.0, 1.0));
}

inline veritas::Heatmap random_heatmap(Rng& rng, std::size_t h, std::size_t w, double hi = 1.0) {
  return veritas::Heatmap(h, w, uniform_vector(rng, h * w, 0.0, hi));
}

inline veritas::PatchVote random_vote(Rng& rng) {
  switch (uniform_size(rng, 0, 2)) {
    case 0: return veritas::make_vote({1.0, 0.0, 0.0});
    case 1: return veritas::make_vote({0.0, 1.0, 0.0});
    default: return veritas::make_vote({0.0, 0.0, 1.0});
  }
}

/// Scalar weighted mean of positive indicators over non-neutral entries.
inline double weighted_mean_oracle(const std::vector<double>& w, const std::vector<veritas::PatchVote>& votes) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (votes[i].kind == veritas::VoteKind::Neutral) continue;
    den += w[i];
    if (votes[i].kind == veritas::VoteKind::Positive) num += w[i];
  }
  return static_cast<double>(num / den);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Code of the veritas::Error thrown by f, or nullopt when nothing is thrown.
template <class F>
std::optional<veritas::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const veritas::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace vt
