#include "qcheb/cheb.hpp"

#include <cmath>
#include <stdexcept>

namespace qcheb {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kAmpGrowth = (1.0 + 2.0 * kPi) * (1.0 + 2.0 * kPi);  // worst over-estimation factor

void validate_params(const ChebParams& p, double eps_cap) {
  if (!(p.delta_ratio >= 1.0))
    throw std::invalid_argument("spread ratio must be >= 1");
  if (!(p.lower > 0.0) || !(p.upper > p.lower))
    throw std::invalid_argument("bounds must satisfy 0 < lower < upper");
  if (!(p.eps > 0.0) || !(p.eps < eps_cap))
    throw std::invalid_argument("relative accuracy out of range");
  if (!(p.failure > 0.0) || !(p.failure < 0.5))
    throw std::invalid_argument("failure budget must be in (0, 1/2)");
}

long long ceil_ll(double x) { return static_cast<long long>(std::ceil(x)); }

// Shared first phase: probe scales m = 4*upper, 2*upper, ... with short
// windowed estimates until one is nonzero or the scale falls below 2*lower.
// Returns true if a nonzero probe was found; report.final_threshold_m holds
// the stopping scale either way.
bool search_phase(const SamplerHandle& s, const ChebParams& params, Rng& rng,
                  EstimateReport& report) {
  const double d2 = params.delta_ratio * params.delta_ratio;
  const double dprime =
      params.failure / (2.0 * (3.0 + std::log2(params.upper / params.lower)));
  const long long t_search = ceil_ll(25.0 * params.delta_ratio);

  double m = 8.0 * params.upper;
  double p = 0.0;
  while (p == 0.0 && m >= 2.0 * params.lower) {
    m /= 2.0;
    p = basic_est(s, TruncationWindow(0.0, m * d2), t_search, dprime, rng, &report.ledger);
    report.trace.push_back({m, p});
  }
  report.final_threshold_m = m;
  if (p == 0.0) {
    report.stopped_at_lower_bound = true;
    return false;
  }
  return true;
}

}  // namespace

void ChebParams::validate() const { validate_params(*this, 0.5); }

namespace detail {

EstimateReport run_basic(const SamplerHandle& s, const ChebParams& params, Rng& rng) {
  validate_params(params, 1.0);
  EstimateReport report;
  if (!search_phase(s, params, rng, report)) return report;

  const double d2 = params.delta_ratio * params.delta_ratio;
  const double b = report.final_threshold_m * d2 / params.eps;
  const long long t_final =
      ceil_ll(1225.0 * params.delta_ratio / std::pow(params.eps, 1.5));
  const double q = basic_est(s, TruncationWindow(0.0, b), t_final, params.failure / 2.0,
                             rng, &report.ledger);
  report.estimate = b * q;
  return report;
}

EstimateReport run_fast(const SamplerHandle& s, const ChebParams& params, Rng& rng) {
  validate_params(params, 1.0);
  EstimateReport report;
  if (!search_phase(s, params, rng, report)) return report;

  const double sigma = report.final_threshold_m * params.delta_ratio;
  const long long t_split = ceil_ll(2601.0 * params.delta_ratio / params.eps);
  report.estimate =
      s_approx(s, sigma, t_split, params.failure / 2.0, rng, &report.ledger);
  return report;
}

EstimateReport run_implicit(const SamplerHandle& s, const DeltaFunction& f, double lower,
                            double upper, double eps, double failure, Rng& rng) {
  if (!(lower > 0.0) || !(upper > lower))
    throw std::invalid_argument("bounds must satisfy 0 < lower < upper");
  if (!(eps > 0.0) || !(eps < 1.0))
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
    EstimateReport inner = run_fast(s, probe, rng);
    report.ledger.add(inner.ledger);
    mu = inner.estimate;
    report.trace.push_back({m, mu});
  }
  report.final_threshold_m = m;
  if (m < lower / 2.0) {
    report.stopped_at_lower_bound = true;
    return report;
  }

  ChebParams fin{std::max(1.0, f(m / (6.0 * kAmpGrowth))), lower, upper, eps,
                 failure / 2.0};
  EstimateReport inner = run_fast(s, fin, rng);
  report.ledger.add(inner.ledger);
  report.estimate = inner.estimate;
  return report;
}

}  // namespace detail

EstimateReport estimate_mean_basic(const SamplerHandle& s, const ChebParams& params,
                                   Rng& rng) {
  params.validate();
  return detail::run_basic(s, params, rng);
}

EstimateReport estimate_mean_fast(const SamplerHandle& s, const ChebParams& params,
                                  Rng& rng) {
  params.validate();
  return detail::run_fast(s, params, rng);
}

double s_approx(const SamplerHandle& s, double sigma, long long t, double delta, Rng& rng,
                CostLedger* ledger) {
  if (!(sigma > 0.0)) throw std::invalid_argument("scale must be positive");
  if (t < 2) throw std::invalid_argument("time parameter must be >= 2");
  const double lg = std::log2(static_cast<double>(t));
  const long long k = ceil_ll(lg) - 1;
  const long long t0 = ceil_ll(3.0 * kPi * kPi * static_cast<double>(t) * std::sqrt(lg));
  const double d_each = delta / static_cast<double>(k + 1);

  double total =
      sigma * basic_est(s, TruncationWindow(0.0, sigma), t0, d_each, rng, ledger);
  for (long long l = 1; l <= k; ++l) {
    const double lo = std::ldexp(sigma, static_cast<int>(l) - 1);
    const double hi = std::ldexp(sigma, static_cast<int>(l));
    total += hi * basic_est(s, TruncationWindow(lo, hi), t0, d_each, rng, ledger);
  }
  return total;
}

EstimateReport estimate_mean_auto_L(const SamplerHandle& s, double delta_ratio,
                                    double upper, double eps, double failure, Rng& rng) {
  if (!(delta_ratio >= 1.0)) throw std::invalid_argument("spread ratio must be >= 1");
  if (!(upper > 0.0)) throw std::invalid_argument("upper bound must be positive");
  if (!(eps > 0.0) || !(eps < 0.5))
    throw std::invalid_argument("relative accuracy out of range");
  if (!(failure > 0.0) || !(failure < 0.5))
    throw std::invalid_argument("failure budget must be in (0, 1/2)");

  EstimateReport report;
  for (int i = 1; i <= 60; ++i) {
    const double li = upper / std::ldexp(1.0, i);
    ChebParams probe{delta_ratio, li, upper, eps, failure / std::ldexp(1.0, i)};
    EstimateReport pr = detail::run_fast(s, probe, rng);
    report.ledger.add(pr.ledger);
    report.trace.push_back({li, pr.estimate});
    if (pr.estimate > 0.0) {
      // Nonzero at scale li certifies mean >= li / 1250; rerun with that bound.
      ChebParams fin{delta_ratio, li / 1250.0, upper, eps,
                     failure / std::ldexp(1.0, i + 1)};
      EstimateReport fr = detail::run_fast(s, fin, rng);
      report.ledger.add(fr.ledger);
      report.estimate = fr.estimate;
      report.final_threshold_m = fr.final_threshold_m;
      return report;
    }
  }
  report.stopped_at_lower_bound = true;
  return report;
}

EstimateReport estimate_mean_implicit(const SamplerHandle& s, const DeltaFunction& f,
                                      double lower, double upper, double eps,
                                      double failure, Rng& rng) {
  if (!(eps < 0.5)) throw std::invalid_argument("relative accuracy out of range");
  return detail::run_implicit(s, f, lower, upper, eps, failure, rng);
}

}  // namespace qcheb
