#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "qcheb/ae.hpp"
#include "qcheb/ledger.hpp"
#include "qcheb/rng.hpp"

using namespace qcheb;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("kernel spot values and pole handling") {
  // Poles of sin^2(x) are limits of the kernel, all equal to 1.
  CHECK(ae_kernel(0.0, 7) == 1.0);
  CHECK(ae_kernel(kPi, 7) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ae_kernel(-3.0 * kPi, 12) == doctest::Approx(1.0).epsilon(1e-10));
  // Frozen reference values.
  CHECK(ae_kernel(kPi / 2.0, 3) == doctest::Approx(0.1111111111111111).epsilon(1e-13));
  CHECK(ae_kernel(0.3, 5) == doctest::Approx(0.45572942545130524).epsilon(1e-13));
  // Near-pole branch stays smooth.
  CHECK(ae_kernel(1e-8, 5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ae_kernel(kPi + 1e-9, 9) == doctest::Approx(1.0).epsilon(1e-10));
  // Kernel is bounded by 1 everywhere.
  for (int i = 1; i <= 200; ++i) CHECK(ae_kernel(0.013 * i, 17) <= 1.0 + 1e-12);
}

TEST_CASE("outcome law is normalized, including huge time parameters") {
  for (long long t : {3LL, 4LL, 17LL, 64LL, 513LL, 4096LL}) {
    for (double p : {0.0, 1e-6, 0.01, 0.25, 0.5, 0.93, 1.0}) {
      std::vector<double> probs = ae_outcome_probabilities(p, t);
      double sum = 0.0;
      for (double q : probs) sum += q;
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("zero-outcome probability matches the closed form") {
  // Frozen: p = 1/4, t = 3 gives Pr[estimate = 0] = 4/9.
  FiniteDistribution d = ae_outcome_distribution(0.25, 3);
  CHECK(d.prob_of(0.0) == doctest::Approx(0.4444444444444444).epsilon(1e-13));
  CHECK(d.prob_of(0.75) == doctest::Approx(5.0 / 9.0).epsilon(1e-13));

  for (double p : {0.05, 0.3, 0.8}) {
    for (long long t : {5LL, 16LL, 41LL}) {
      const double theta = std::asin(std::sqrt(p));
      const double want = std::sin(t * theta) * std::sin(t * theta) /
                          (static_cast<double>(t) * static_cast<double>(t) *
                           std::sin(theta) * std::sin(theta));
      CHECK(ae_outcome_distribution(p, t).prob_of(0.0) ==
            doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("statevector simulation agrees with the closed form") {
  for (double p : {0.02, 0.25, 0.5, 0.77}) {
    for (long long t : {2LL, 3LL, 8LL, 16LL, 31LL}) {
      FiniteDistribution a = ae_outcome_distribution(p, t);
      FiniteDistribution b = ae_statevector_distribution(p, t);
      double tv = 0.0;
      for (const Atom& atom : a.atoms()) tv += std::fabs(atom.prob - b.prob_of(atom.value));
      CHECK(tv / 2.0 < 1e-8);
    }
  }
}

TEST_CASE("lazy outcome draws reproduce the closed-form law") {
  const double p = 0.3;
  const long long t = 16;
  std::vector<double> law = ae_outcome_probabilities(p, t);
  Rng rng(404);
  std::vector<int> counts(static_cast<std::size_t>(t), 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const long long y = ae_draw_outcome(p, t, rng);
    REQUIRE(y >= 0);
    REQUIRE(y < t);
    counts[static_cast<std::size_t>(y)] += 1;
  }
  for (long long y = 0; y < t; ++y) {
    const double freq = counts[static_cast<std::size_t>(y)] / static_cast<double>(n);
    const double sd = std::sqrt(law[static_cast<std::size_t>(y)] *
                                (1.0 - law[static_cast<std::size_t>(y)]) / n);
    CHECK(std::fabs(freq - law[static_cast<std::size_t>(y)]) < 5.0 * sd + 3e-4);
  }
}

TEST_CASE("median estimation keeps its four guarantees") {
  const double delta = 0.1;
  Rng rng(2024);

  SUBCASE("additive accuracy and constant-factor overshoot") {
    const double p = 0.04;
    const long long t = 25;
    int ok_add = 0, ok_mult = 0;
    const int trials = 400;
    for (int i = 0; i < trials; ++i) {
      const double est = basic_est_amplitude(p, t, delta, rng);
      const double bound = 2.0 * kPi * std::sqrt(p) / t + kPi * kPi / (t * t);
      ok_add += (std::fabs(est - p) <= bound) ? 1 : 0;
      ok_mult += (est <= (1.0 + 2.0 * kPi) * (1.0 + 2.0 * kPi) * p) ? 1 : 0;
    }
    CHECK(ok_add >= static_cast<int>(trials * (1.0 - delta)));
    CHECK(ok_mult >= static_cast<int>(trials * (1.0 - delta)));
  }

  SUBCASE("small time parameters cannot resolve small amplitudes") {
    const double p = 1e-4;  // 1/(2 sqrt(p)) = 50
    const long long t = 40;
    int zeros = 0;
    const int trials = 400;
    for (int i = 0; i < trials; ++i)
      zeros += (basic_est_amplitude(p, t, delta, rng) == 0.0) ? 1 : 0;
    CHECK(zeros >= static_cast<int>(trials * (1.0 - delta)));
  }

  SUBCASE("large time parameters give relative accuracy") {
    const double p = 0.01, eps = 0.5;
    const long long t = 161;  // >= 8 / (eps * sqrt(p))
    int ok = 0;
    const int trials = 400;
    for (int i = 0; i < trials; ++i) {
      const double est = basic_est_amplitude(p, t, delta, rng);
      ok += (std::fabs(est - p) <= eps * p) ? 1 : 0;
    }
    CHECK(ok >= static_cast<int>(trials * (1.0 - delta)));
  }
}

TEST_CASE("median estimation charges the advertised costs") {
  CostLedger led;
  Rng rng(8);
  PerSampleCost per;
  per.degree = 2;
  per.neighbor = 1;
  basic_est_amplitude(0.2, 10, 0.1, rng, &led, per, 1.5);
  // 29 repetitions at delta = 0.1, each costing 2t+1 runs and t reflections.
  CHECK(led.samples.quantum_samples == 29 * 21);
  CHECK(led.samples.reflections == 29 * 10);
  CHECK(led.samples.ae_invocations == 29);
  CHECK(led.queries.degree == 2 * 29 * 21);
  CHECK(led.queries.neighbor == 29 * 21);
  CHECK(led.simulated_time == doctest::Approx(1.5 * 29 * 21));
  CHECK(median_repetitions(0.1) == 29);
}

TEST_CASE("windowed estimation targets the rescaled truncated mean") {
  // Uniform on {0,1,2,3}: window [0,4) has Bernoulli parameter 0.375.
  SamplerHandle s{FiniteDistribution::from_atoms(
                      {{0.0, 0.25}, {1.0, 0.25}, {2.0, 0.25}, {3.0, 0.25}}),
                  PerSampleCost{}};
  Rng rng(77);
  int ok = 0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    const double est = basic_est(s, TruncationWindow(0.0, 4.0), 256, 0.1, rng);
    ok += (std::fabs(est - 0.375) <= 0.05) ? 1 : 0;
  }
  CHECK(ok >= 180);
}

TEST_CASE("doubling-search amplitude estimation reaches relative accuracy") {
  Rng rng(3003);
  const double eps = 0.3, delta = 0.1;
  for (double p : {0.2, 0.003}) {
    int ok = 0;
    const int trials = 200;
    for (int i = 0; i < trials; ++i) {
      AmplEstResult r = ampl_est_s_amplitude(p, eps, delta, rng);
      REQUIRE(!r.zero_exhausted);
      ok += (std::fabs(r.estimate - p) <= eps * p) ? 1 : 0;
    }
    CHECK(ok >= static_cast<int>(trials * (1.0 - delta)));
  }
}

TEST_CASE("doubling search flags exhaustion on a zero amplitude") {
  Rng rng(5);
  AmplEstOptions opt;
  opt.max_t = 1 << 12;
  AmplEstResult r = ampl_est_s_amplitude(0.0, 0.3, 0.1, rng, nullptr, {}, opt);
  CHECK(r.zero_exhausted);
  CHECK(r.estimate == 0.0);
}

TEST_CASE("amplification formula") {
  CHECK(amplify_angle(0.01, 2) == doctest::Approx(0.23055362559999998).epsilon(1e-13));
  CHECK(amplify_angle(0.3, 0) == doctest::Approx(0.3).epsilon(1e-13));
  // Lower bound of the amplification guarantee at a valid round count.
  const double b = 0.003;
  for (long long k = 0; k <= 8; ++k) {
    const double s = (2.0 * k + 1.0);
    if (s * std::asin(std::sqrt(b)) > kPi / 2.0) break;
    CHECK(amplify_angle(b, k) >= (1.0 - s * s * b / 3.0) * s * s * b - 1e-12);
  }
}
