#include "qcheb/ae.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace qcheb {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_prob(double p) {
  if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument("amplitude must be in [0,1]");
}

void check_failure_budget(double delta) {
  if (!(delta > 0.0) || !(delta < 0.5))
    throw std::invalid_argument("failure budget must be in (0, 1/2)");
}

}  // namespace

int median_repetitions(double delta) {
  check_failure_budget(delta);
  return 2 * static_cast<int>(std::ceil(6.0 * std::log(1.0 / delta))) + 1;
}

double ae_kernel(double x, long long t) {
  if (t < 1) throw std::invalid_argument("time parameter must be >= 1");
  const double d = std::remainder(x, kPi);
  if (d == 0.0) return 1.0;
  const double td = static_cast<double>(t) * d;
  const double num = std::sin(td);  // sin^2(t*x) == sin^2(t*d): t*(x-d) is an integer multiple of pi
  if (std::fabs(d) < 1e-6) {
    const double r = num / td;  // sin(d) = d up to relative d^2/6 <= 2e-13 here
    return r * r;
  }
  const double r = num / (static_cast<double>(t) * std::sin(d));
  return r * r;
}

namespace {

double outcome_prob(double theta, long long y, long long t) {
  // Phase is reduced before anything large multiplies it: y/t stays in [0,1).
  const double q = static_cast<double>(y) / static_cast<double>(t);
  return ae_kernel(theta - kPi * q, t);
}

double estimate_of_outcome(long long y, long long t) {
  const double s = std::sin(kPi * (static_cast<double>(y) / static_cast<double>(t)));
  return s * s;
}

}  // namespace

std::vector<double> ae_outcome_probabilities(double p, long long t) {
  check_prob(p);
  if (t < 1 || t > (1LL << 20))
    throw std::invalid_argument("materialized outcome law limited to t <= 2^20");
  const double theta = std::asin(std::sqrt(p));
  std::vector<double> probs(static_cast<std::size_t>(t));
  for (long long y = 0; y < t; ++y) probs[static_cast<std::size_t>(y)] = outcome_prob(theta, y, t);
  return probs;
}

FiniteDistribution ae_outcome_distribution(double p, long long t) {
  const std::vector<double> probs = ae_outcome_probabilities(p, t);
  std::vector<Atom> atoms;
  atoms.reserve(probs.size());
  for (long long y = 0; y < t; ++y)
    atoms.push_back({estimate_of_outcome(y, t), probs[static_cast<std::size_t>(y)]});
  return FiniteDistribution::from_atoms(std::move(atoms));
}

std::vector<double> ae_statevector_probabilities(double p, long long t) {
  check_prob(p);
  if (t < 1 || t > 64)
    throw std::invalid_argument("statevector simulation limited to t <= 64");
  const double theta = std::asin(std::sqrt(p));
  const std::size_t n = static_cast<std::size_t>(t);

  // Grover iterate acts as a rotation by 2*theta on span{bad, good}; after j
  // iterations the sampler register holds (cos((2j+1)theta), sin((2j+1)theta)).
  std::vector<std::array<double, 2>> reg(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ang = (2.0 * static_cast<double>(j) + 1.0) * theta;
    reg[j] = {std::cos(ang), std::sin(ang)};
  }

  // Inverse Fourier transform over Z_t on the uniformly weighted phase
  // register, then Born probabilities summed over the sampler register.
  std::vector<double> probs(n, 0.0);
  const double inv = 1.0 / static_cast<double>(t);
  for (std::size_t y = 0; y < n; ++y) {
    std::complex<double> amp0 = 0.0, amp1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double phase = -2.0 * kPi * static_cast<double>(j) * static_cast<double>(y) * inv;
      const std::complex<double> w(std::cos(phase), std::sin(phase));
      amp0 += w * reg[j][0];
      amp1 += w * reg[j][1];
    }
    probs[y] = (std::norm(amp0) + std::norm(amp1)) * inv * inv;
  }
  return probs;
}

FiniteDistribution ae_statevector_distribution(double p, long long t) {
  const std::vector<double> probs = ae_statevector_probabilities(p, t);
  std::vector<Atom> atoms;
  atoms.reserve(probs.size());
  for (long long y = 0; y < t; ++y)
    atoms.push_back({estimate_of_outcome(y, t), probs[static_cast<std::size_t>(y)]});
  return FiniteDistribution::from_atoms(std::move(atoms));
}

long long ae_draw_outcome(double p, long long t, Rng& rng) {
  check_prob(p);
  if (t < 1) throw std::invalid_argument("time parameter must be >= 1");
  const double theta = std::asin(std::sqrt(p));
  const double u = rng.next_double();

  const long long ystar = (std::llround(theta * static_cast<double>(t) / kPi) + t) % t;
  double cum = outcome_prob(theta, ystar, t);
  if (u < cum || t == 1) return ystar;

  long long last = ystar;
  for (long long m = 1; 2 * m - 1 < t; ++m) {
    long long yp = ystar + m;
    if (yp >= t) yp -= t;
    cum += outcome_prob(theta, yp, t);
    if (u < cum) return yp;
    last = yp;
    if (2 * m < t) {
      long long ym = ystar - m;
      if (ym < 0) ym += t;
      cum += outcome_prob(theta, ym, t);
      if (u < cum) return ym;
      last = ym;
    }
  }
  return last;  // float residual after exhausting the ring; farthest outcome
}

double ae_estimate_once(double p, long long t, Rng& rng) {
  return estimate_of_outcome(ae_draw_outcome(p, t, rng), t);
}

double basic_est_amplitude(double p, long long t, double delta, Rng& rng, CostLedger* ledger,
                           const PerSampleCost& per, double sim_time_per_sample) {
  check_prob(p);
  check_failure_budget(delta);
  if (t < 3) throw std::invalid_argument("estimation requires time parameter >= 3");
  const int r = median_repetitions(delta);
  std::vector<double> estimates(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    estimates[static_cast<std::size_t>(i)] = ae_estimate_once(p, t, rng);
    if (ledger) {
      charge_ae_run(*ledger, t, per);
      ledger->simulated_time += (2.0 * static_cast<double>(t) + 1.0) * sim_time_per_sample;
    }
  }
  auto mid = estimates.begin() + r / 2;
  std::nth_element(estimates.begin(), mid, estimates.end());
  return *mid;
}

double basic_est(const SamplerHandle& s, const TruncationWindow& w, long long t, double delta,
                 Rng& rng, CostLedger* ledger) {
  return basic_est_amplitude(s.dist.bernoulli_parameter(w), t, delta, rng, ledger,
                             s.per_sample);
}

namespace {

// Projected simulated time of one median run at time parameter t.
double projected_time(long long t, double delta, double per_sample_time) {
  const double r = static_cast<double>(median_repetitions(delta));
  return r * (2.0 * static_cast<double>(t) + 1.0) * per_sample_time;
}

}  // namespace

AmplEstResult ampl_est_s_amplitude(double p, double eps, double delta, Rng& rng,
                                   CostLedger* ledger, const PerSampleCost& per,
                                   const AmplEstOptions& options) {
  check_prob(p);
  check_failure_budget(delta);
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("relative accuracy must be in (0, 1)");

  CostLedger local;
  AmplEstResult result;
  const bool timed = options.sim_time_per_sample > 0.0 &&
                     options.sim_time_budget < std::numeric_limits<double>::infinity();

  double coarse = 0.0;
  bool found = false;
  for (int k = 2;; ++k) {
    const long long tk = 1LL << k;
    if (tk > options.max_t) {
      result.zero_exhausted = true;
      break;
    }
    const double dk = delta / (2.0 * k * (k + 1));
    if (timed && local.simulated_time + projected_time(tk, dk, options.sim_time_per_sample) >
                     options.sim_time_budget) {
      result.budget_exhausted = true;
      break;
    }
    coarse = basic_est_amplitude(p, tk, dk, rng, &local, per, options.sim_time_per_sample);
    if (coarse > 0.0) {
      found = true;
      break;
    }
  }

  if (found) {
    double td = std::ceil(8.0 * (1.0 + 2.0 * kPi) / (eps * std::sqrt(coarse)));
    if (!(td < 9e17)) td = 9e17;
    const long long tstar = std::max<long long>(3, static_cast<long long>(td));
    if (timed &&
        local.simulated_time + projected_time(tstar, delta / 2.0, options.sim_time_per_sample) >
            options.sim_time_budget) {
      result.budget_exhausted = true;
    } else {
      result.estimate =
          basic_est_amplitude(p, tstar, delta / 2.0, rng, &local, per,
                              options.sim_time_per_sample);
    }
  }

  result.samples_used = local.samples.quantum_samples;
  if (ledger) ledger->add(local);
  return result;
}

AmplEstResult ampl_est_s(const SamplerHandle& s, const TruncationWindow& w, double eps,
                         double delta, Rng& rng, CostLedger* ledger,
                         const AmplEstOptions& options) {
  return ampl_est_s_amplitude(s.dist.bernoulli_parameter(w), eps, delta, rng, ledger,
                              s.per_sample, options);
}

double amplify_angle(double b, long long k) {
  check_prob(b);
  if (k < 0) throw std::invalid_argument("amplification rounds must be >= 0");
  const double s = std::sin((2.0 * static_cast<double>(k) + 1.0) * std::asin(std::sqrt(b)));
  return s * s;
}

}  // namespace qcheb
