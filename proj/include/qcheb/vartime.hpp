#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "qcheb/ae.hpp"
#include "qcheb/cheb.hpp"
#include "qcheb/distribution.hpp"
#include "qcheb/ledger.hpp"
#include "qcheb/rng.hpp"

namespace qcheb {

// Stopping profile of a variable-time algorithm over stages 1..m: a run stops
// at stage i (machine time t_i = 2^i) with flag reject or accept; every run
// stops by stage m. Acceptance probability p = sum of accept masses.
class VariableTimeProfile {
 public:
  static VariableTimeProfile from_stage_probabilities(std::vector<double> rej,
                                                      std::vector<double> acc);

  int stages() const { return static_cast<int>(rej_.size()); }
  double stop_rej_at(int i) const { return rej_.at(static_cast<std::size_t>(i) - 1); }
  double stop_acc_at(int i) const { return acc_.at(static_cast<std::size_t>(i) - 1); }
  // Cumulative masses up to and including stage i; index 0 gives 0.
  double rej_upto(int i) const { return cum_rej_.at(static_cast<std::size_t>(i)); }
  double acc_upto(int i) const { return cum_acc_.at(static_cast<std::size_t>(i)); }
  double p_acc() const { return cum_acc_.back(); }

  // l2 average of the stopping time: sqrt(sum_i p_stop(i) * t_i^2).
  double t_ell2() const;
  double t_max() const;  // 2^m

 private:
  std::vector<double> rej_, acc_;
  std::vector<double> cum_rej_, cum_acc_;
};

// Amplification rounds for one stage: smallest k with
// (2k+1)^2 * b_estimate in [1/(9m), 1/m], or k = 0 when the estimate already
// exceeds 1/(9m). Invalid when the estimate is not positive.
struct AmplifyChoice {
  long long k = 0;
  bool valid = true;
};
AmplifyChoice choose_amplification(double b_estimate, int m);

// The nested-machine amplitudes induced by a profile:
//   b[i]  = good amplitude of the stage-(i+1) continuation machine,
//   a[i]  = b[i] after k[i] amplification rounds,
//   b1[i] = accepted-only amplitude within that machine,
// plus worst-case machine times of both. Amplification rounds are chosen from
// the supplied estimates (or from the exact amplitudes in the _exact variant).
struct StageAmplitudes {
  std::vector<double> b, a, b1;
  std::vector<long long> k;
  std::vector<double> t_max_b, t_max_a;
  bool choice_failed = false;  // some stage estimate was nonpositive
};
StageAmplitudes stage_amplitudes(const VariableTimeProfile& profile,
                                 const std::vector<double>& b_estimates);
StageAmplitudes stage_amplitudes_exact(const VariableTimeProfile& profile);

struct VarTimeOptions {
  // Scales the machine-time budget of a run. Calibrated so that estimation in
  // the resolvable regime (time parameter >= 2/sqrt(amplitude)) completes with
  // at least a 2x margin, including the single-stage worst case; runs beyond
  // the resolvable regime are cut off by the budget and report zero.
  double budget_constant = 8192.0;
  long long max_t = 1LL << 34;  // exhaustion bound of the amplitude search
};

struct PaccResult {
  double estimate = 0.0;
  bool aborted = false;  // machine-time budget exceeded mid-run
  std::vector<long long> amplification_rounds;
};

// Estimates the cumulative acceptance probability p_acc(<= upto_stage) of the
// profile to relative accuracy eps with failure budget delta, charging
// machine time (samples times the worst-case time of the machine being
// sampled) against sim_time_budget. Amplification rounds are chosen from
// estimated stage amplitudes; exact amplitudes drive the simulated draws.
PaccResult approx_pacc(const VariableTimeProfile& profile, int upto_stage, double eps,
                       double delta, Rng& rng, CostLedger* ledger = nullptr,
                       const PerSampleCost& per = {},
                       double sim_time_budget = std::numeric_limits<double>::infinity(),
                       const VarTimeOptions& options = {});

struct VarTimeResult {
  double estimate = 0.0;
  bool aborted = false;          // budget cut the run short
  bool below_threshold = false;  // estimate too small for the time parameter
  double time_budget = 0.0;      // machine-time budget that was allotted
  int stage_used = 0;            // cutoff stage the run estimated up to
};

// Variable-time amplitude estimation: picks the cutoff stage from t and the
// l2 stopping time, estimates the truncated acceptance probability within a
// machine-time budget, and reports 0 when the run aborts or the estimate is
// below the resolution 1/t^2 of the time parameter. With probability
// >= 1 - delta: the estimate is at most 2p; it is within (1 +- eps)p whenever
// t >= 2/sqrt(p); and it is 0 whenever t < 1/sqrt(2p).
VarTimeResult vartime_estimate(const VariableTimeProfile& profile, long long t, double eps,
                               double delta, Rng& rng, CostLedger* ledger = nullptr,
                               const PerSampleCost& per = {},
                               const VarTimeOptions& options = {});

// A finite distribution whose sampler is a variable-time machine: each atom
// carries the stage at which its computation stops.
struct TimedAtom {
  double value = 0.0;
  double prob = 0.0;
  int stage = 1;
};

class VariableTimeSampler {
 public:
  static VariableTimeSampler from_atoms(std::vector<TimedAtom> atoms,
                                        const PerSampleCost& per = {});

  const FiniteDistribution& distribution() const { return dist_; }
  const PerSampleCost& per_sample() const { return per_; }
  const std::vector<TimedAtom>& atoms() const { return atoms_; }
  int stages() const { return stages_; }
  double t_ell2() const;  // window-independent

  // Profile of the windowed-and-rescaled acceptance event: an atom (v, p,
  // stage s) accepts at stage s with probability p * (v/b) * 1{a <= v < b}
  // and rejects at stage s with the rest of its mass.
  VariableTimeProfile induced_profile(const TruncationWindow& w) const;

 private:
  std::vector<TimedAtom> atoms_;
  FiniteDistribution dist_;
  PerSampleCost per_;
  int stages_ = 1;
};

// Mean estimation driven by variable-time amplitude estimation: the halving
// search of the basic estimator with each windowed amplitude estimate
// replaced by a budgeted variable-time run. Cost scales with the l2 average
// stopping time instead of the worst case.
EstimateReport var_eps_approx(const VariableTimeSampler& s, const ChebParams& params,
                              Rng& rng, const VarTimeOptions& options = {});

// Implicit-spread variant (same structure as estimate_mean_implicit).
EstimateReport var_eps_approx_implicit(const VariableTimeSampler& s,
                                       const DeltaFunction& f, double lower, double upper,
                                       double eps, double failure, Rng& rng,
                                       const VarTimeOptions& options = {});

namespace detail {

EstimateReport run_var(const VariableTimeSampler& s, const ChebParams& params, Rng& rng,
                       const VarTimeOptions& options);

}  // namespace detail

}  // namespace qcheb
