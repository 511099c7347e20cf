#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "qcheb/distribution.hpp"
#include "qcheb/ledger.hpp"
#include "qcheb/rng.hpp"

namespace qcheb {

// Number of repetitions whose median meets failure budget delta:
// 2*ceil(6*ln(1/delta)) + 1 (each repetition lands in the confidence
// interval with probability >= 8/pi^2, so a Chernoff bound applies).
int median_repetitions(double delta);

// Phase-estimation outcome kernel F_t(x) = sin^2(tx) / (t^2 sin^2(x)),
// extended by its limit F_t(k*pi) = 1. Stable for any magnitude of x via
// argument reduction mod pi.
double ae_kernel(double x, long long t);

// Closed-form outcome law on y in {0..t-1}: Pr[y] = F_t(theta - pi*y/t) with
// theta = asin(sqrt(p)). Materializes all t outcomes; guarded for large t.
std::vector<double> ae_outcome_probabilities(double p, long long t);

// Law of the point estimate sin^2(pi*y/t) under the closed-form outcome law
// (outcomes y and t-y merge onto the same estimate).
FiniteDistribution ae_outcome_distribution(double p, long long t);

// Exact unitary simulation of the same measurement: evolve the two-dimensional
// rotation subspace under the Grover iterate, apply the inverse Fourier
// transform on a t-point phase register, and read Born-rule probabilities.
// Quadratic in t; restricted to t <= 64. Agrees with the closed form as a
// distribution over estimates.
std::vector<double> ae_statevector_probabilities(double p, long long t);
FiniteDistribution ae_statevector_distribution(double p, long long t);

// Draws one outcome y from the closed-form law without materializing it:
// inverse-CDF walk outward from the peak of the outcome ring. Expected
// O(log t) kernel evaluations per draw.
long long ae_draw_outcome(double p, long long t, Rng& rng);

// One amplitude estimate sin^2(pi*y/t) from a single drawn outcome.
double ae_estimate_once(double p, long long t, Rng& rng);

// Median of r repetitions of single-run estimation at time parameter t.
// Charges 2t+1 circuit runs, t reflections, and one invocation per repetition
// against `ledger` (if given), with query/pass prices `per` per circuit run
// and `sim_time_per_sample` simulated machine-time units per circuit run.
double basic_est_amplitude(double p, long long t, double delta, Rng& rng,
                           CostLedger* ledger = nullptr, const PerSampleCost& per = {},
                           double sim_time_per_sample = 0.0);

// A distribution bundled with the query/pass prices of one coherent sample.
struct SamplerHandle {
  FiniteDistribution dist;
  PerSampleCost per_sample;
};

// Median amplitude estimation applied to the windowed-and-rescaled sampler:
// estimates p = E[X * 1{a <= X < b}] / b. Multiply by w.b for the windowed mean.
double basic_est(const SamplerHandle& s, const TruncationWindow& w, long long t,
                 double delta, Rng& rng, CostLedger* ledger = nullptr);

struct AmplEstOptions {
  long long max_t = 1LL << 34;  // exhaustion bound for the doubling search
  double sim_time_per_sample = 0.0;
  double sim_time_budget = std::numeric_limits<double>::infinity();
};

struct AmplEstResult {
  double estimate = 0.0;
  bool zero_exhausted = false;   // doubling search hit max_t with all stages zero
  bool budget_exhausted = false; // simulated-time budget stopped the run
  std::uint64_t samples_used = 0;
};

// Relative-error amplitude estimation without a prior lower bound on p:
// doubling schedule t_k = 2^k (k >= 2) with per-stage failure budget
// delta/(2k(k+1)); the first nonzero coarse estimate p0 fixes the final time
// parameter t* = ceil(8(1+2pi) / (eps*sqrt(p0))), run with budget delta/2.
// Output is within (1 +- eps)p with probability >= 1 - delta whenever the
// search terminates before max_t.
AmplEstResult ampl_est_s_amplitude(double p, double eps, double delta, Rng& rng,
                                   CostLedger* ledger = nullptr,
                                   const PerSampleCost& per = {},
                                   const AmplEstOptions& options = {});

AmplEstResult ampl_est_s(const SamplerHandle& s, const TruncationWindow& w, double eps,
                         double delta, Rng& rng, CostLedger* ledger = nullptr,
                         const AmplEstOptions& options = {});

// Amplitude after k rounds of amplification: sin^2((2k+1) * asin(sqrt(b))).
double amplify_angle(double b, long long k);

}  // namespace qcheb
