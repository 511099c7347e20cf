#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qcheb/rng.hpp"
#include "qcheb/vartime.hpp"

using namespace qcheb;

namespace {

VariableTimeProfile random_profile(Rng& rng, int m) {
  std::vector<double> rej(static_cast<std::size_t>(m)), acc(static_cast<std::size_t>(m));
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    rej[static_cast<std::size_t>(i)] = 0.05 + rng.next_double();
    acc[static_cast<std::size_t>(i)] = 0.05 + rng.next_double();
    total += rej[static_cast<std::size_t>(i)] + acc[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < m; ++i) {
    rej[static_cast<std::size_t>(i)] /= total;
    acc[static_cast<std::size_t>(i)] /= total;
  }
  return VariableTimeProfile::from_stage_probabilities(rej, acc);
}

}  // namespace

TEST_CASE("profile validation and summary statistics") {
  VariableTimeProfile p =
      VariableTimeProfile::from_stage_probabilities({0.5, 0.0, 0.25}, {0.0, 0.0, 0.25});
  CHECK(p.stages() == 3);
  CHECK(p.p_acc() == doctest::Approx(0.25).epsilon(1e-14));
  // Stops: mass 1/2 at time 2, mass 1/2 at time 8.
  CHECK(p.t_ell2() == doctest::Approx(std::sqrt(34.0)).epsilon(1e-14));
  CHECK(p.t_max() == doctest::Approx(8.0).epsilon(1e-14));

  CHECK_THROWS_AS(VariableTimeProfile::from_stage_probabilities({0.5}, {0.4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(VariableTimeProfile::from_stage_probabilities({}, {}),
                  std::invalid_argument);
}

TEST_CASE("amplification round selection") {
  // Above the floor 1/(9m): no amplification.
  CHECK(choose_amplification(0.05, 5).k == 0);
  // Below the floor: smallest k with (2k+1)^2 b in [1/(9m), 1/m].
  AmplifyChoice c = choose_amplification(0.001, 5);
  CHECK(c.valid);
  CHECK(c.k == 2);
  const double s = 2.0 * static_cast<double>(c.k) + 1.0;
  CHECK(s * s * 0.001 >= 1.0 / 45.0);
  CHECK(s * s * 0.001 <= 1.0 / 5.0);
  // A positive estimate always admits a valid choice; zero does not.
  CHECK(choose_amplification(1e-12, 7).valid);
  CHECK(!choose_amplification(0.0, 7).valid);
}

TEST_CASE("stage recurrence and accepted-mass telescoping on random profiles") {
  Rng rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng.next_below(6));
    VariableTimeProfile prof = random_profile(rng, m);
    StageAmplitudes st = stage_amplitudes_exact(prof);
    REQUIRE(!st.choice_failed);
    REQUIRE(static_cast<int>(st.b.size()) == m);

    // Stage 1 amplitudes read off the profile directly.
    CHECK(st.b[0] == doctest::Approx(1.0 - prof.rej_upto(1)).epsilon(1e-13));
    CHECK(st.b1[0] == doctest::Approx(prof.acc_upto(1)).epsilon(1e-13));

    for (int i = 2; i <= m; ++i) {
      const std::size_t ix = static_cast<std::size_t>(i) - 1;
      // Continuation amplitude of stage i relates to the amplified stage i-1.
      CHECK(st.b[ix] * (1.0 - prof.rej_upto(i - 1)) ==
            doctest::Approx(st.a[ix - 1] * (1.0 - prof.rej_upto(i))).epsilon(1e-12));
      // Accepted amplitude within stage i.
      CHECK(st.b1[ix] * (1.0 - prof.rej_upto(i - 1)) ==
            doctest::Approx(st.a[ix - 1] * prof.acc_upto(i)).epsilon(1e-12));
      // Amplification is the exact trigonometric map.
      CHECK(st.a[ix] ==
            doctest::Approx(amplify_angle(st.b[ix], st.k[ix])).epsilon(1e-12));
    }

    // Telescoping product recovers the cumulative acceptance probability.
    for (int i = 1; i <= m; ++i) {
      double prod = (i == 1) ? st.b1[0] : st.b[0];
      for (int j = 2; j <= i - 1; ++j)
        prod *= st.b[static_cast<std::size_t>(j) - 1] / st.a[static_cast<std::size_t>(j) - 2];
      if (i >= 2)
        prod *= st.b1[static_cast<std::size_t>(i) - 1] / st.a[static_cast<std::size_t>(i) - 2];
      CHECK(prod == doctest::Approx(prof.acc_upto(i)).epsilon(1e-12));
    }

    // Machine times follow the doubling schedule.
    CHECK(st.t_max_b[0] == doctest::Approx(2.0));
    for (int i = 2; i <= m; ++i) {
      const std::size_t ix = static_cast<std::size_t>(i) - 1;
      const double dt = std::ldexp(1.0, i) - std::ldexp(1.0, i - 1);
      CHECK(st.t_max_b[ix] == doctest::Approx(st.t_max_a[ix - 1] + dt).epsilon(1e-12));
    }
    for (int i = 1; i <= m; ++i) {
      const std::size_t ix = static_cast<std::size_t>(i) - 1;
      CHECK(st.t_max_a[ix] ==
            doctest::Approx((2.0 * st.k[ix] + 1.0) * st.t_max_b[ix]).epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate size mismatch is rejected") {
  Rng rng(3);
  VariableTimeProfile prof = random_profile(rng, 4);
  CHECK_THROWS_AS(stage_amplitudes(prof, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("acceptance-probability estimation is accurate") {
  Rng rng(99);
  VariableTimeProfile prof = VariableTimeProfile::from_stage_probabilities(
      {0.3, 0.2, 0.1}, {0.1, 0.1, 0.2});
  int ok = 0;
  const int trials = 60;
  for (int i = 0; i < trials; ++i) {
    PaccResult r = approx_pacc(prof, 3, 0.25, 0.1, rng);
    REQUIRE(!r.aborted);
    ok += (std::fabs(r.estimate - prof.acc_upto(3)) <= 0.25 * prof.acc_upto(3)) ? 1 : 0;
  }
  CHECK(ok >= 54);
}

TEST_CASE("variable-time estimation keeps its three guarantees") {
  Rng rng(1234);
  VariableTimeProfile prof = VariableTimeProfile::from_stage_probabilities(
      {0.5, 0.3, 0.16}, {0.0, 0.01, 0.03});
  const double p = prof.p_acc();  // 0.04
  const double eps = 0.5, delta = 0.1;
  const int trials = 150;

  SUBCASE("small time parameter reports zero") {
    const long long t = 3;  // < 1 / sqrt(2p) = 3.53
    int zeros = 0;
    for (int i = 0; i < trials; ++i)
      zeros += (vartime_estimate(prof, t, eps, delta, rng).estimate == 0.0) ? 1 : 0;
    CHECK(zeros >= static_cast<int>(trials * (1.0 - delta)));
  }
  SUBCASE("large time parameter reaches relative accuracy") {
    const long long t = 20;  // >= 2 / sqrt(p) = 10
    int ok = 0;
    for (int i = 0; i < trials; ++i) {
      VarTimeResult r = vartime_estimate(prof, t, eps, delta, rng);
      ok += (std::fabs(r.estimate - p) <= eps * p) ? 1 : 0;
    }
    CHECK(ok >= static_cast<int>(trials * (1.0 - delta)));
  }
  SUBCASE("estimates never blow past twice the amplitude") {
    int ok = 0;
    for (int i = 0; i < trials; ++i) {
      const long long t = 2 + static_cast<long long>(rng.next_below(40));
      VarTimeResult r = vartime_estimate(prof, t, eps, delta, rng);
      ok += (r.estimate <= 2.0 * p) ? 1 : 0;
    }
    CHECK(ok >= static_cast<int>(trials * (1.0 - delta)));
  }
}

TEST_CASE("a starved machine-time budget aborts cleanly") {
  Rng rng(7);
  VariableTimeProfile prof = VariableTimeProfile::from_stage_probabilities(
      {0.5, 0.3, 0.16}, {0.0, 0.01, 0.03});
  VarTimeOptions opt;
  opt.budget_constant = 1e-9;
  VarTimeResult r = vartime_estimate(prof, 20, 0.5, 0.1, rng, nullptr, {}, opt);
  CHECK(r.aborted);
  CHECK(r.estimate == 0.0);
}

TEST_CASE("timed sampler bookkeeping and induced profiles") {
  VariableTimeSampler s = VariableTimeSampler::from_atoms(
      {{0.0, 0.9, 1}, {10.0, 0.1, 3}});
  CHECK(s.distribution().mean() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.stages() == 3);
  CHECK(s.t_ell2() == doctest::Approx(std::sqrt(0.9 * 4.0 + 0.1 * 64.0)).epsilon(1e-14));

  // Window [0, 20): the value-10 atom accepts at stage 3 with rate 10/20.
  VariableTimeProfile prof = s.induced_profile(TruncationWindow(0.0, 20.0));
  CHECK(prof.stages() == 3);
  CHECK(prof.stop_acc_at(3) == doctest::Approx(0.1 * 0.5).epsilon(1e-14));
  CHECK(prof.stop_rej_at(3) == doctest::Approx(0.1 * 0.5).epsilon(1e-14));
  CHECK(prof.stop_rej_at(1) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(prof.p_acc() ==
        doctest::Approx(s.distribution().bernoulli_parameter(TruncationWindow(0.0, 20.0)))
            .epsilon(1e-14));

  CHECK_THROWS_AS(VariableTimeSampler::from_atoms({{1.0, 1.0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(VariableTimeSampler::from_atoms({{1.0, 1.0, 61}}), std::invalid_argument);
}

TEST_CASE("variable-time mean estimation hits the relative-error contract") {
  VariableTimeSampler s = VariableTimeSampler::from_atoms(
      {{0.0, 0.9, 1}, {10.0, 0.1, 3}});
  const ChebParams params{3.2, 0.5, 2.0, 0.25, 0.15};
  int ok = 0;
  const int trials = 20;
  for (int i = 0; i < trials; ++i) {
    Rng rng(Rng::split(4242, static_cast<std::uint64_t>(i)));
    EstimateReport rep = var_eps_approx(s, params, rng);
    ok += (std::fabs(rep.estimate - 1.0) <= 0.25) ? 1 : 0;
  }
  CHECK(ok >= 17);
}

TEST_CASE("variable-time implicit variant") {
  VariableTimeSampler s = VariableTimeSampler::from_atoms(
      {{0.0, 0.9, 1}, {10.0, 0.1, 2}});
  const DeltaFunction f{3.2, 0.5, 0.0};
  int ok = 0;
  const int trials = 15;
  for (int i = 0; i < trials; ++i) {
    Rng rng(Rng::split(555, static_cast<std::uint64_t>(i)));
    EstimateReport rep = var_eps_approx_implicit(s, f, 0.25, 4.0, 0.25, 0.2, rng);
    ok += (std::fabs(rep.estimate - 1.0) <= 0.25) ? 1 : 0;
  }
  CHECK(ok >= 13);
}
