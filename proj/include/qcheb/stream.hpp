#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qcheb/cheb.hpp"
#include "qcheb/distribution.hpp"
#include "qcheb/ledger.hpp"

namespace qcheb {

// Turnstile stream over a vector f in Z^n: a sequence of (index, increment)
// updates, indices 1-based. Only the final vector matters for the moments.
class TurnstileStream {
 public:
  static TurnstileStream from_updates(int n,
                                      std::vector<std::pair<int, long long>> updates);
  // File format: one "index increment" pair per line (1-based indices),
  // '#' comments allowed; the dimension is max index unless overridden.
  static TurnstileStream from_file(const std::string& path, int n_override = 0);

  int dimension() const { return n_; }
  std::size_t update_count() const { return updates_.size(); }
  const std::vector<std::pair<int, long long>>& updates() const { return updates_; }
  const std::vector<long long>& final_vector() const { return freq_; }

 private:
  int n_ = 0;
  std::vector<std::pair<int, long long>> updates_;
  std::vector<long long> freq_;
};

// F_k = sum_i |f_i|^k.
double frequency_moment(const std::vector<long long>& freq, int k);

// Distribution of the index under l2 sampling: index i (as a value) with
// probability f_i^2 / F_2. Optional seeded multiplicative perturbation of
// each probability by at most min(envelope, 1/n^2), renormalized; models an
// imperfect sampler. Throws on the zero vector.
FiniteDistribution l2_sampling_distribution(const std::vector<long long>& freq,
                                            double perturb_envelope = 0.0,
                                            std::uint64_t perturb_seed = 0);

// Outcome law of the moment estimator: draw i by l2 sampling, output
// f2_est * |f_i|^(k-2). Mean is (f2_est / F_2) * F_k; exact F_2 gives F_k.
FiniteDistribution fk_estimator_distribution(const std::vector<long long>& freq, int k,
                                             double f2_est, double perturb_envelope = 0.0,
                                             std::uint64_t perturb_seed = 0);

struct FkOptions {
  int pass_budget = 1;    // P: copies traded against passes
  double eps = 0.2;       // target relative accuracy, in (0, 1/2)
  double failure = 0.25;  // failure budget, in (0, 1/2)
  double spread_per_pass = 4.0;  // spread bound used is ceil(1 + this * P)
  double grid_ratio = 1e-3;      // convolution merge grid
  bool inject_f2_error = false;  // push the F2 pre-estimate to its tolerance edge
  double perturb_envelope = 0.0;  // l2 sampler perturbation (0 = exact)
  std::uint64_t perturb_seed = 0;
};

struct FkReport {
  double estimate = 0.0;
  double f2_used = 0.0;
  std::uint64_t copies = 0;       // averaged copies per quantum sample
  double delta_ratio = 0.0;       // spread bound handed to the estimator
  double upper_bound = 0.0;       // mean upper bound handed to the estimator
  EstimateReport inner;
  PassLedger passes;  // total passes (2 per circuit run + 1 setup) and memory gauge
};

// Frequency-moment estimation for k >= 3: averages ceil(n^(1-2/k) / P^2)
// copies of the moment estimator (trading passes for spread), then runs the
// no-lower-bound mean estimator. Each circuit run costs 2 passes; memory is
// gauged at copies * ceil(eps^-2 * log2(n)^3) cells.
FkReport estimate_fk(const TurnstileStream& stream, int k, const FkOptions& options,
                     Rng& rng);

}  // namespace qcheb
