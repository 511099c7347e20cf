#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcheb/rng.hpp"

namespace qcheb {

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

// Thrown when a convolution's support would exceed its configured cap.
struct SupportOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Half-open value window [a, b); the atom at 0 never contributes to windowed
// means, so [0, b) and "(0, b)" coincide for every quantity computed here.
struct TruncationWindow {
  double a = 0.0;
  double b = 0.0;
  TruncationWindow(double a_, double b_) : a(a_), b(b_) {
    if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("window requires 0 <= a < b");
  }
};

// An exactly represented distribution with finite support: sorted unique
// values, strictly positive probabilities summing to one. All moments and
// windowed statistics are exact (up to fp rounding), making it usable both as
// the object being estimated and as the oracle that tests freeze against.
class FiniteDistribution {
 public:
  FiniteDistribution() = default;

  // Sorts, merges duplicate values, drops zero-probability atoms, normalizes.
  // Throws on empty input, negative probabilities, or non-finite entries.
  static FiniteDistribution from_atoms(std::vector<Atom> atoms);

  static FiniteDistribution point_mass(double value) {
    return from_atoms({{value, 1.0}});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min_value() const { return atoms_.front().value; }
  double max_value() const { return atoms_.back().value; }

  double mean() const { return cum_vp_.back(); }
  double second_moment() const { return cum_v2p_.back(); }
  double variance() const;

  // Probability of one support point (0 if absent).
  double prob_of(double value) const;

  // P[a <= X < b].
  double mass_in(double a, double b) const;
  // E[X * 1{a <= X < b}] and E[X^2 * 1{a <= X < b}].
  double truncated_mean(double a, double b) const;
  double truncated_second_moment(double a, double b) const;
  double mean_below(double b) const { return truncated_mean(atoms_.front().value, b); }
  double mean_at_least(double b) const { return mean() - mean_below(b); }

  // Amplitude of the windowed-and-rescaled indicator: E[X * 1{a <= X < b}] / b.
  // This is the Bernoulli parameter the estimation engine sees for the window.
  double bernoulli_parameter(const TruncationWindow& w) const {
    return truncated_mean(w.a, w.b) / w.b;
  }

  double sample(Rng& rng) const;

  nlohmann::json to_json() const;
  static FiniteDistribution from_json(const nlohmann::json& j);

 private:
  void rebuild_prefix_sums();

  std::vector<Atom> atoms_;
  // cum_*[i] = sum over the first i atoms; size = atoms_.size() + 1.
  std::vector<double> cum_p_, cum_vp_, cum_v2p_;
};

struct ConvolveOptions {
  // Geometric merge-grid ratio for intermediate supports. Atoms whose values
  // fall in the same grid cell are merged into their probability-weighted
  // average, which preserves the mean exactly and never increases variance.
  double grid_ratio = 1e-3;
  std::size_t support_cap = std::size_t{1} << 20;
  bool use_grid = true;  // false: merge only exactly equal values
};

// Distribution of the average of `count` independent copies of `dist`.
// Requires nonnegative support. Throws SupportOverflow if an intermediate
// support would exceed options.support_cap.
FiniteDistribution convolve_average(const FiniteDistribution& dist, std::uint64_t count,
                                    const ConvolveOptions& options = {});

}  // namespace qcheb
