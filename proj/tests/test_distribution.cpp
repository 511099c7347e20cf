#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "qcheb/distribution.hpp"
#include "qcheb/rng.hpp"

using namespace qcheb;

namespace {

FiniteDistribution mix_124() {
  return FiniteDistribution::from_atoms({{1.0, 0.25}, {2.0, 0.25}, {4.0, 0.5}});
}

// Brute-force law of the average of `count` i.i.d. copies, by full expansion.
std::map<double, double> brute_average(const std::vector<Atom>& atoms, int count) {
  std::map<double, double> acc{{0.0, 1.0}};
  for (int c = 0; c < count; ++c) {
    std::map<double, double> next;
    for (const auto& [v, p] : acc)
      for (const Atom& a : atoms) next[v + a.value] += p * a.prob;
    acc = std::move(next);
  }
  std::map<double, double> out;
  for (const auto& [v, p] : acc) out[v / count] += p;
  return out;
}

}  // namespace

TEST_CASE("moments of a three-point law") {
  FiniteDistribution d = mix_124();
  CHECK(d.mean() == doctest::Approx(2.75).epsilon(1e-14));
  CHECK(d.second_moment() == doctest::Approx(9.25).epsilon(1e-14));
  CHECK(d.variance() == doctest::Approx(1.6875).epsilon(1e-14));
}

TEST_CASE("atom merging, normalization, and validation") {
  FiniteDistribution d =
      FiniteDistribution::from_atoms({{2.0, 1.0}, {2.0, 1.0}, {5.0, 2.0}});
  CHECK(d.atoms().size() == 2);
  CHECK(d.prob_of(2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.prob_of(5.0) == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(FiniteDistribution::from_atoms({}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution::from_atoms({{1.0, -0.5}, {2.0, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution::from_atoms({{1.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("windowed quantities") {
  FiniteDistribution d = mix_124();
  CHECK(d.mass_in(2.0, 4.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(d.truncated_mean(2.0, 4.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d.truncated_second_moment(2.0, 4.0) == doctest::Approx(1.0).epsilon(1e-14));
  // Window [1, 4) keeps 1 and 2; [0, 5) keeps everything.
  CHECK(d.truncated_mean(1.0, 4.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(d.truncated_mean(0.0, 5.0) == doctest::Approx(2.75).epsilon(1e-14));
  CHECK_THROWS_AS(TruncationWindow(3.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(TruncationWindow(-1.0, 2.0), std::invalid_argument);
}

TEST_CASE("bernoulli parameter of a window is the rescaled truncated mean") {
  FiniteDistribution u =
      FiniteDistribution::from_atoms({{0.0, 0.25}, {1.0, 0.25}, {2.0, 0.25}, {3.0, 0.25}});
  CHECK(u.bernoulli_parameter(TruncationWindow(0.0, 4.0)) ==
        doctest::Approx(0.375).epsilon(1e-14));
  // Only values in [2, 4) contribute: (2 + 3)/4 / 4.
  CHECK(u.bernoulli_parameter(TruncationWindow(2.0, 4.0)) ==
        doctest::Approx(0.3125).epsilon(1e-14));
}

TEST_CASE("point mass") {
  FiniteDistribution d = FiniteDistribution::point_mass(3.5);
  CHECK(d.mean() == 3.5);
  CHECK(d.variance() == doctest::Approx(0.0));
  CHECK(d.prob_of(3.5) == 1.0);
  CHECK(d.prob_of(3.0) == 0.0);
}

TEST_CASE("sampling frequencies match probabilities") {
  FiniteDistribution d = mix_124();
  Rng rng(31);
  std::map<double, int> counts;
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[d.sample(rng)] += 1;
  CHECK(std::fabs(counts[1.0] / static_cast<double>(n) - 0.25) < 0.01);
  CHECK(std::fabs(counts[2.0] / static_cast<double>(n) - 0.25) < 0.01);
  CHECK(std::fabs(counts[4.0] / static_cast<double>(n) - 0.50) < 0.01);
}

TEST_CASE("json round trip") {
  FiniteDistribution d = mix_124();
  FiniteDistribution e = FiniteDistribution::from_json(d.to_json());
  REQUIRE(e.atoms().size() == d.atoms().size());
  for (std::size_t i = 0; i < d.atoms().size(); ++i) {
    CHECK(e.atoms()[i].value == d.atoms()[i].value);
    CHECK(e.atoms()[i].prob == d.atoms()[i].prob);
  }
}

TEST_CASE("exact-mode convolution average matches brute force") {
  FiniteDistribution d = FiniteDistribution::from_atoms({{0.0, 0.9}, {10.0, 0.1}});
  ConvolveOptions opt;
  opt.use_grid = false;
  FiniteDistribution avg = convolve_average(d, 3, opt);

  std::map<double, double> want = brute_average(d.atoms(), 3);
  REQUIRE(avg.atoms().size() == want.size());
  for (const Atom& a : avg.atoms()) {
    auto it = want.find(a.value);
    REQUIRE(it != want.end());
    CHECK(a.prob == doctest::Approx(it->second).epsilon(1e-12));
  }
  // Averaging preserves the mean and shrinks the variance by the count.
  CHECK(avg.mean() == doctest::Approx(d.mean()).epsilon(1e-12));
  CHECK(avg.variance() == doctest::Approx(d.variance() / 3.0).epsilon(1e-9));
}

TEST_CASE("grid-mode convolution keeps the mean exact and never inflates spread") {
  FiniteDistribution d = FiniteDistribution::from_atoms(
      {{0.5, 0.3}, {1.0, 0.3}, {7.0, 0.2}, {40.0, 0.2}});
  ConvolveOptions opt;
  opt.grid_ratio = 1e-3;
  FiniteDistribution avg = convolve_average(d, 16, opt);
  CHECK(avg.mean() == doctest::Approx(d.mean()).epsilon(1e-9));
  const double exact_second = d.variance() / 16.0 + d.mean() * d.mean();
  CHECK(avg.second_moment() <= exact_second * (1.0 + 1e-6));
  CHECK(avg.second_moment() >= d.mean() * d.mean() * (1.0 - 1e-9));
}

TEST_CASE("convolution validation") {
  FiniteDistribution d = FiniteDistribution::from_atoms({{1.0, 1.0}});
  CHECK_THROWS_AS(convolve_average(d, 0, {}), std::invalid_argument);
  FiniteDistribution neg = FiniteDistribution::from_atoms({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK_THROWS_AS(convolve_average(neg, 2, {}), std::invalid_argument);
}
