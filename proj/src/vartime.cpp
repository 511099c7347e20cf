#include "qcheb/vartime.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcheb {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kAmpGrowth = (1.0 + 2.0 * kPi) * (1.0 + 2.0 * kPi);

double stage_time(int i) { return std::ldexp(1.0, i); }  // t_i = 2^i, t_0 = 0
double stage_len(int i) { return i == 1 ? 2.0 : std::ldexp(1.0, i - 1); }

void validate_var_params(const ChebParams& p, double eps_cap) {
  if (!(p.delta_ratio >= 1.0)) throw std::invalid_argument("spread ratio must be >= 1");
  if (!(p.lower > 0.0) || !(p.upper > p.lower))
    throw std::invalid_argument("bounds must satisfy 0 < lower < upper");
  if (!(p.eps > 0.0) || !(p.eps < eps_cap))
    throw std::invalid_argument("relative accuracy out of range");
  if (!(p.failure > 0.0) || !(p.failure < 0.5))
    throw std::invalid_argument("failure budget must be in (0, 1/2)");
}

}  // namespace

VariableTimeProfile VariableTimeProfile::from_stage_probabilities(std::vector<double> rej,
                                                                  std::vector<double> acc) {
  if (rej.empty() || rej.size() != acc.size())
    throw std::invalid_argument("profile needs equal, nonempty stage arrays");
  if (rej.size() > 60) throw std::invalid_argument("profile limited to 60 stages");
  double total = 0.0;
  for (std::size_t i = 0; i < rej.size(); ++i) {
    if (!std::isfinite(rej[i]) || !std::isfinite(acc[i]) || rej[i] < 0.0 || acc[i] < 0.0)
      throw std::invalid_argument("stage masses must be finite and nonnegative");
    total += rej[i] + acc[i];
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("stage masses must sum to one");

  VariableTimeProfile p;
  p.rej_ = std::move(rej);
  p.acc_ = std::move(acc);
  const std::size_t m = p.rej_.size();
  p.cum_rej_.assign(m + 1, 0.0);
  p.cum_acc_.assign(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    p.rej_[i] /= total;
    p.acc_[i] /= total;
    p.cum_rej_[i + 1] = p.cum_rej_[i] + p.rej_[i];
    p.cum_acc_[i + 1] = p.cum_acc_[i] + p.acc_[i];
  }
  return p;
}

double VariableTimeProfile::t_ell2() const {
  double s = 0.0;
  for (int i = 1; i <= stages(); ++i) {
    const double w = stop_rej_at(i) + stop_acc_at(i);
    s += w * std::ldexp(1.0, 2 * i);  // t_i^2 = 4^i
  }
  return std::sqrt(s);
}

double VariableTimeProfile::t_max() const { return stage_time(stages()); }

AmplifyChoice choose_amplification(double b_estimate, int m) {
  if (m < 1) throw std::invalid_argument("profile needs at least one stage");
  AmplifyChoice c;
  if (!(b_estimate > 0.0)) {
    c.valid = false;
    return c;
  }
  if (b_estimate > 1.0 / (9.0 * static_cast<double>(m))) return c;  // k = 0
  const double s = std::sqrt(1.0 / (9.0 * static_cast<double>(m) * b_estimate));  // >= 1
  long long k = static_cast<long long>(std::ceil((s - 1.0) / 2.0));
  while (2.0 * static_cast<double>(k) + 1.0 < s) ++k;
  while (k > 0 && 2.0 * static_cast<double>(k - 1) + 1.0 >= s) --k;
  c.k = k;
  return c;
}

namespace {

// Shared recursion over the nested machines; `chooser(i, b_true)` supplies
// the amplification decision for stage i.
template <typename ChoiceFn>
StageAmplitudes build_stages(const VariableTimeProfile& pf, ChoiceFn chooser) {
  StageAmplitudes sa;
  const int m = pf.stages();
  double a_prev = 0.0, surv_prev = 1.0, tmax_a_prev = 0.0;
  for (int i = 1; i <= m; ++i) {
    const double surv = 1.0 - pf.rej_upto(i);
    double b, b1;
    if (i == 1) {
      b = surv;
      b1 = pf.acc_upto(1);
    } else if (surv_prev > 0.0) {
      b = a_prev * (surv / surv_prev);
      b1 = a_prev * (pf.acc_upto(i) / surv_prev);
    } else {
      b = 0.0;
      b1 = 0.0;
    }
    b = std::clamp(b, 0.0, 1.0);
    b1 = std::clamp(b1, 0.0, 1.0);

    AmplifyChoice ch = chooser(i, b);
    if (!ch.valid) {
      sa.choice_failed = true;
      ch.k = 0;
    }
    const double a = amplify_angle(b, ch.k);
    const double tb = tmax_a_prev + stage_len(i);
    const double ta = (2.0 * static_cast<double>(ch.k) + 1.0) * tb;

    sa.b.push_back(b);
    sa.b1.push_back(b1);
    sa.a.push_back(a);
    sa.k.push_back(ch.k);
    sa.t_max_b.push_back(tb);
    sa.t_max_a.push_back(ta);

    a_prev = a;
    surv_prev = surv;
    tmax_a_prev = ta;
  }
  return sa;
}

}  // namespace

StageAmplitudes stage_amplitudes(const VariableTimeProfile& profile,
                                 const std::vector<double>& b_estimates) {
  if (b_estimates.size() != static_cast<std::size_t>(profile.stages()))
    throw std::invalid_argument("need one estimate per stage");
  return build_stages(profile, [&](int i, double) {
    return choose_amplification(b_estimates.at(static_cast<std::size_t>(i) - 1),
                                profile.stages());
  });
}

StageAmplitudes stage_amplitudes_exact(const VariableTimeProfile& profile) {
  return build_stages(profile,
                      [&](int, double b) { return choose_amplification(b, profile.stages()); });
}

PaccResult approx_pacc(const VariableTimeProfile& profile, int upto_stage, double eps,
                       double delta, Rng& rng, CostLedger* ledger, const PerSampleCost& per,
                       double sim_time_budget, const VarTimeOptions& options) {
  const int m = profile.stages();
  if (upto_stage < 1 || upto_stage > m)
    throw std::invalid_argument("cutoff stage out of range");
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("relative accuracy must be in (0, 1)");
  if (!(delta > 0.0) || !(delta < 0.5))
    throw std::invalid_argument("failure budget must be in (0, 1/2)");

  const double eps_b = eps / (4.0 * static_cast<double>(m));
  const double eps_a = eps / (8.0 * static_cast<double>(m));
  const double delta_each = delta / (2.0 * static_cast<double>(m));

  CostLedger local;
  PaccResult result;
  AmplEstOptions base;
  base.max_t = options.max_t;

  auto run_amps = [&](double amplitude, double acc, double tmax) {
    AmplEstOptions o = base;
    o.sim_time_per_sample = tmax;
    o.sim_time_budget = sim_time_budget - local.simulated_time;
    return ampl_est_s_amplitude(amplitude, acc, delta_each, rng, &local, per, o);
  };

  double a_prev = 0.0, a_prev_est = 1.0, surv_prev = 1.0, tmax_a_prev = 0.0;
  double product = 1.0;
  bool done = false;

  for (int j = 1; j < upto_stage && !done; ++j) {
    const double surv = 1.0 - profile.rej_upto(j);
    const double b_j =
        std::clamp(j == 1 ? surv : (surv_prev > 0.0 ? a_prev * (surv / surv_prev) : 0.0),
                   0.0, 1.0);
    const double tmax_b = tmax_a_prev + stage_len(j);

    AmplEstResult rb = run_amps(b_j, eps_b, tmax_b);
    if (rb.budget_exhausted) {
      result.aborted = true;
      done = true;
      break;
    }
    if (!(rb.estimate > 0.0)) {
      product = 0.0;
      done = true;
      break;
    }
    product *= (j == 1) ? rb.estimate : rb.estimate / a_prev_est;

    const AmplifyChoice ch = choose_amplification(rb.estimate, m);
    result.amplification_rounds.push_back(ch.k);
    const double a_j = amplify_angle(b_j, ch.k);
    const double tmax_a = (2.0 * static_cast<double>(ch.k) + 1.0) * tmax_b;

    AmplEstResult ra = run_amps(a_j, eps_a, tmax_a);
    if (ra.budget_exhausted) {
      result.aborted = true;
      done = true;
      break;
    }
    if (!(ra.estimate > 0.0)) {
      product = 0.0;
      done = true;
      break;
    }

    a_prev = a_j;
    a_prev_est = ra.estimate;
    surv_prev = surv;
    tmax_a_prev = tmax_a;
  }

  if (!done) {
    const int i = upto_stage;
    const double b_i1 = std::clamp(
        i == 1 ? profile.acc_upto(1)
               : (surv_prev > 0.0 ? a_prev * (profile.acc_upto(i) / surv_prev) : 0.0),
        0.0, 1.0);
    const double tmax_b = tmax_a_prev + stage_len(i);
    AmplEstResult rf = run_amps(b_i1, eps_b, tmax_b);
    if (rf.budget_exhausted) {
      result.aborted = true;
    } else {
      product *= (i == 1) ? rf.estimate : rf.estimate / a_prev_est;
      result.estimate = std::max(0.0, product);
    }
  }

  if (result.aborted) result.estimate = 0.0;
  if (ledger) ledger->add(local);
  return result;
}

VarTimeResult vartime_estimate(const VariableTimeProfile& profile, long long t, double eps,
                               double delta, Rng& rng, CostLedger* ledger,
                               const PerSampleCost& per, const VarTimeOptions& options) {
  if (t < 1) throw std::invalid_argument("time parameter must be >= 1");
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("relative accuracy must be in (0, 1)");
  if (!(delta > 0.0) || !(delta < 0.5))
    throw std::invalid_argument("failure budget must be in (0, 1/2)");

  const int m = profile.stages();
  const double tl2 = profile.t_ell2();
  const double arg = static_cast<double>(t) * tl2 / std::sqrt(eps);
  int i = static_cast<int>(std::ceil(std::log2(std::max(2.0, arg))));
  i = std::clamp(i, 1, m);

  const double md = static_cast<double>(m);
  const double budget = 2.0 * options.budget_constant * (md * md * md / eps) *
                        (stage_time(i) + static_cast<double>(i) * static_cast<double>(t) * tl2) *
                        std::log(md / delta + 1.0);

  CostLedger local;
  PaccResult pr = approx_pacc(profile, i, eps / 2.0, delta, rng, &local, per, budget, options);

  VarTimeResult r;
  r.time_budget = budget;
  r.stage_used = i;
  if (pr.aborted) {
    r.aborted = true;
  } else if (pr.estimate > 0.0) {
    if (static_cast<double>(t) < 1.0 / std::sqrt(pr.estimate)) {
      r.below_threshold = true;
    } else {
      r.estimate = pr.estimate;
    }
  }
  if (ledger) ledger->add(local);
  return r;
}

VariableTimeSampler VariableTimeSampler::from_atoms(std::vector<TimedAtom> atoms,
                                                    const PerSampleCost& per) {
  std::vector<TimedAtom> kept;
  for (const TimedAtom& a : atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.prob))
      throw std::invalid_argument("non-finite atom");
    if (a.value < 0.0) throw std::invalid_argument("values must be nonnegative");
    if (a.prob < 0.0) throw std::invalid_argument("negative probability");
    if (a.stage < 1 || a.stage > 60) throw std::invalid_argument("stage out of range");
    if (a.prob > 0.0) kept.push_back(a);
  }
  if (kept.empty()) throw std::invalid_argument("sampler has no positive mass");
  double total = 0.0;
  int m = 1;
  for (const TimedAtom& a : kept) {
    total += a.prob;
    m = std::max(m, a.stage);
  }

  VariableTimeSampler s;
  std::vector<Atom> plain;
  plain.reserve(kept.size());
  for (TimedAtom& a : kept) {
    a.prob /= total;
    plain.push_back({a.value, a.prob});
  }
  s.atoms_ = std::move(kept);
  s.dist_ = FiniteDistribution::from_atoms(std::move(plain));
  s.per_ = per;
  s.stages_ = m;
  return s;
}

double VariableTimeSampler::t_ell2() const {
  double sum = 0.0;
  for (const TimedAtom& a : atoms_) sum += a.prob * std::ldexp(1.0, 2 * a.stage);
  return std::sqrt(sum);
}

VariableTimeProfile VariableTimeSampler::induced_profile(const TruncationWindow& w) const {
  std::vector<double> rej(static_cast<std::size_t>(stages_), 0.0);
  std::vector<double> acc(static_cast<std::size_t>(stages_), 0.0);
  for (const TimedAtom& a : atoms_) {
    const double nu = (a.value >= w.a && a.value < w.b) ? a.value / w.b : 0.0;
    acc[static_cast<std::size_t>(a.stage) - 1] += a.prob * nu;
    rej[static_cast<std::size_t>(a.stage) - 1] += a.prob * (1.0 - nu);
  }
  return VariableTimeProfile::from_stage_probabilities(std::move(rej), std::move(acc));
}

namespace detail {

EstimateReport run_var(const VariableTimeSampler& s, const ChebParams& params, Rng& rng,
                       const VarTimeOptions& options) {
  validate_var_params(params, 1.0);
  const double d2 = params.delta_ratio * params.delta_ratio;
  const double dprime =
      params.failure / (2.0 * (3.0 + std::log2(params.upper / params.lower)));
  const long long t_probe = static_cast<long long>(std::ceil(25.0 * params.delta_ratio));

  EstimateReport report;
  double m = 8.0 * params.upper;
  double p = 0.0;
  while (p == 0.0 && m >= 2.0 * params.lower) {
    m /= 2.0;
    const VariableTimeProfile pf = s.induced_profile(TruncationWindow(0.0, m * d2));
    const VarTimeResult vr =
        vartime_estimate(pf, t_probe, 0.5, dprime, rng, &report.ledger, s.per_sample(),
                         options);
    p = vr.estimate;
    report.trace.push_back({m, p});
  }
  report.final_threshold_m = m;
  if (p == 0.0) {
    report.stopped_at_lower_bound = true;
    return report;
  }

  const double b = m * d2 / params.eps;
  const long long t_fin =
      static_cast<long long>(std::ceil(100.0 * params.delta_ratio / std::sqrt(params.eps)));
  const VariableTimeProfile pf = s.induced_profile(TruncationWindow(0.0, b));
  const VarTimeResult vr = vartime_estimate(pf, t_fin, params.eps / 2.0, params.failure / 2.0,
                                            rng, &report.ledger, s.per_sample(), options);
  report.estimate = b * vr.estimate;
  return report;
}

}  // namespace detail

EstimateReport var_eps_approx(const VariableTimeSampler& s, const ChebParams& params,
                              Rng& rng, const VarTimeOptions& options) {
  params.validate();
  return detail::run_var(s, params, rng, options);
}

EstimateReport var_eps_approx_implicit(const VariableTimeSampler& s, const DeltaFunction& f,
                                       double lower, double upper, double eps,
                                       double failure, Rng& rng,
                                       const VarTimeOptions& options) {
  if (!(lower > 0.0) || !(upper > lower))
    throw std::invalid_argument("bounds must satisfy 0 < lower < upper");
  if (!(eps > 0.0) || !(eps < 0.5))
    throw std::invalid_argument("relative accuracy out of range");
  if (!(f.exponent >= 0.0) || !(f.exponent <= 1.0) || !(f.amplitude > 0.0) ||
      !(f.offset >= 0.0))
    throw std::invalid_argument("spread function needs amplitude > 0, exponent in [0,1]");
  if (!(failure > 0.0) || !(failure < std::pow(2.0, -2.0 * f.exponent)) || !(failure < 0.5))
    throw std::invalid_argument("failure budget too large for this spread exponent");

  const double dprime = failure / (2.0 * (2.0 + std::log2(upper / lower)));
  EstimateReport report;
  double m = 2.0 * upper;
  double mu = 0.0;
  while (mu < m / 6.0 && m >= lower / 2.0) {
    m /= 2.0;
    ChebParams probe{std::max(1.0, f(m)), lower, upper, 5.0 / 6.0, dprime};
    EstimateReport inner = detail::run_var(s, probe, rng, options);
    report.ledger.add(inner.ledger);
    mu = inner.estimate;
    report.trace.push_back({m, mu});
  }
  report.final_threshold_m = m;
  if (m < lower / 2.0) {
    report.stopped_at_lower_bound = true;
    return report;
  }

  ChebParams fin{std::max(1.0, f(m / (6.0 * kAmpGrowth))), lower, upper, eps, failure / 2.0};
  EstimateReport inner = detail::run_var(s, fin, rng, options);
  report.ledger.add(inner.ledger);
  report.estimate = inner.estimate;
  return report;
}

}  // namespace qcheb
