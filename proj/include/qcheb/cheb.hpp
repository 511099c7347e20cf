#pragma once

#include <cmath>
#include <vector>

#include "qcheb/ae.hpp"
#include "qcheb/distribution.hpp"
#include "qcheb/ledger.hpp"
#include "qcheb/rng.hpp"

namespace qcheb {

// Scale-dependent spread bound f(x) = offset + amplitude / x^exponent, used
// when the spread ratio is supplied implicitly as a function of the unknown
// mean's scale instead of as one number.
struct DeltaFunction {
  double amplitude = 1.0;
  double exponent = 0.5;
  double offset = 0.0;

  double operator()(double x) const {
    return offset + amplitude / std::pow(x, exponent);
  }
};

// Parameters of mean estimation for a nonnegative sampler X:
//   delta_ratio >= sqrt(E[X^2]) / E[X], lower <= E[X] <= upper.
struct ChebParams {
  double delta_ratio = 1.0;  // >= 1
  double lower = 0.0;
  double upper = 0.0;
  double eps = 0.1;      // target relative accuracy, in (0, 1/2)
  double failure = 0.1;  // failure budget, in (0, 1/2)

  void validate() const;
};

struct SearchStep {
  double threshold_m = 0.0;  // scale probed
  double estimate = 0.0;     // raw probe estimate at that scale
};

struct EstimateReport {
  double estimate = 0.0;
  // True when the scale search ran below the lower bound and declared zero.
  bool stopped_at_lower_bound = false;
  double final_threshold_m = 0.0;  // scale at which the search stopped
  std::vector<SearchStep> trace;
  CostLedger ledger;
};

// Halving-search mean estimator: probes scales M = 8*upper, 4*upper, ... with
// short windowed amplitude estimates until one is nonzero, then refines once
// on the window [0, M*delta^2/eps) with a long run. Output within
// (1 +- eps) * mean with probability >= 1 - failure.
EstimateReport estimate_mean_basic(const SamplerHandle& s, const ChebParams& params,
                                   Rng& rng);

// Scale-split refinement: estimates E[X * 1{X < 2^k * sigma}] by one windowed
// amplitude estimate per dyadic slice [2^(l-1)*sigma, 2^l*sigma), l <= k =
// ceil(log2 t) - 1, each at time parameter ceil(3*pi^2*t*sqrt(log2 t)).
// Additive error (sqrt(sigma) + sqrt(E[X^2])/sqrt(sigma))^2 / t with
// probability >= 1 - delta.
double s_approx(const SamplerHandle& s, double sigma, long long t, double delta, Rng& rng,
                CostLedger* ledger = nullptr);

// Error bound of s_approx, for checking: (sqrt(sigma) + phi/sqrt(sigma))^2 / t
// where phi = sqrt(E[X^2]).
inline double s_approx_error_bound(double sigma, long long t, double phi) {
  const double r = std::sqrt(sigma) + phi / std::sqrt(sigma);
  return r * r / static_cast<double>(t);
}

// Same search as estimate_mean_basic but the refinement step uses the
// scale-split estimator, improving the eps-dependence of the total cost from
// eps^(-3/2) to eps^(-1) up to logs.
EstimateReport estimate_mean_fast(const SamplerHandle& s, const ChebParams& params,
                                  Rng& rng);

// Runs the fast estimator without a known lower bound on the mean: probes
// lower bounds upper/2^i with geometrically shrinking failure budgets until a
// probe returns nonzero, then reruns with the implied safe lower bound.
EstimateReport estimate_mean_auto_L(const SamplerHandle& s, double delta_ratio,
                                    double upper, double eps, double failure, Rng& rng);

// Fast estimator with the spread ratio supplied implicitly: the search
// maintains Delta = max(1, f(M)) per scale and stops once the probe estimate
// reaches M/6; the refinement reruns with Delta taken at the scale the exit
// condition certifies for the true mean.
EstimateReport estimate_mean_implicit(const SamplerHandle& s, const DeltaFunction& f,
                                      double lower, double upper, double eps,
                                      double failure, Rng& rng);

namespace detail {

// Core runners that accept eps up to 1 (the implicit search probes at
// eps = 5/6); public wrappers validate eps < 1/2.
EstimateReport run_basic(const SamplerHandle& s, const ChebParams& params, Rng& rng);
EstimateReport run_fast(const SamplerHandle& s, const ChebParams& params, Rng& rng);
EstimateReport run_implicit(const SamplerHandle& s, const DeltaFunction& f, double lower,
                            double upper, double eps, double failure, Rng& rng);

}  // namespace detail

}  // namespace qcheb
