#include "qcheb/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

namespace qcheb {

namespace {

bool nearly_equal(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) <= 1e-12 * scale;
}

}  // namespace

FiniteDistribution FiniteDistribution::from_atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("distribution needs at least one atom");
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.prob))
      throw std::invalid_argument("non-finite atom");
    if (a.prob < 0.0) throw std::invalid_argument("negative probability");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return x.value < y.value; });

  FiniteDistribution d;
  for (const Atom& a : atoms) {
    if (a.prob <= 0.0) continue;
    if (!d.atoms_.empty() && nearly_equal(d.atoms_.back().value, a.value)) {
      Atom& last = d.atoms_.back();
      const double p = last.prob + a.prob;
      last.value = (last.value * last.prob + a.value * a.prob) / p;
      last.prob = p;
    } else {
      d.atoms_.push_back(a);
    }
  }
  if (d.atoms_.empty()) throw std::invalid_argument("distribution has no positive mass");

  double total = 0.0;
  for (const Atom& a : d.atoms_) total += a.prob;
  if (!(total > 0.0)) throw std::invalid_argument("distribution has no positive mass");
  for (Atom& a : d.atoms_) a.prob /= total;

  d.rebuild_prefix_sums();
  return d;
}

void FiniteDistribution::rebuild_prefix_sums() {
  const std::size_t n = atoms_.size();
  cum_p_.assign(n + 1, 0.0);
  cum_vp_.assign(n + 1, 0.0);
  cum_v2p_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cum_p_[i + 1] = cum_p_[i] + atoms_[i].prob;
    cum_vp_[i + 1] = cum_vp_[i] + atoms_[i].value * atoms_[i].prob;
    cum_v2p_[i + 1] = cum_v2p_[i] + atoms_[i].value * atoms_[i].value * atoms_[i].prob;
  }
}

double FiniteDistribution::variance() const {
  const double m = mean();
  return std::max(0.0, second_moment() - m * m);
}

double FiniteDistribution::prob_of(double value) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value,
                             [](const Atom& a, double v) { return a.value < v; });
  if (it != atoms_.end() && nearly_equal(it->value, value)) return it->prob;
  if (it != atoms_.begin() && nearly_equal(std::prev(it)->value, value))
    return std::prev(it)->prob;
  return 0.0;
}

namespace {

// Index of the first atom with value >= v.
std::size_t first_at_least(const std::vector<Atom>& atoms, double v) {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), v,
                             [](const Atom& a, double x) { return a.value < x; });
  return static_cast<std::size_t>(it - atoms.begin());
}

}  // namespace

double FiniteDistribution::mass_in(double a, double b) const {
  if (!(b > a)) return 0.0;
  const std::size_t lo = first_at_least(atoms_, a);
  const std::size_t hi = first_at_least(atoms_, b);
  return cum_p_[hi] - cum_p_[lo];
}

double FiniteDistribution::truncated_mean(double a, double b) const {
  if (!(b > a)) return 0.0;
  const std::size_t lo = first_at_least(atoms_, a);
  const std::size_t hi = first_at_least(atoms_, b);
  return cum_vp_[hi] - cum_vp_[lo];
}

double FiniteDistribution::truncated_second_moment(double a, double b) const {
  if (!(b > a)) return 0.0;
  const std::size_t lo = first_at_least(atoms_, a);
  const std::size_t hi = first_at_least(atoms_, b);
  return cum_v2p_[hi] - cum_v2p_[lo];
}

double FiniteDistribution::sample(Rng& rng) const {
  const double u = rng.next_double();
  auto it = std::upper_bound(cum_p_.begin() + 1, cum_p_.end() - 1, u);
  const std::size_t idx = static_cast<std::size_t>(it - (cum_p_.begin() + 1));
  return atoms_[idx].value;
}

nlohmann::json FiniteDistribution::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Atom& a : atoms_) arr.push_back({a.value, a.prob});
  return arr;
}

FiniteDistribution FiniteDistribution::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("distribution json must be an array");
  std::vector<Atom> atoms;
  atoms.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("distribution json entries must be [value, prob]");
    atoms.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return from_atoms(std::move(atoms));
}

namespace {

// Convolution support kept as a hash map keyed by grid cell. Values are
// probability-weighted cell averages so the running mean is exact.
struct GridSupport {
  double log_ratio;  // log(1 + grid_ratio); <= 0 disables snapping
  std::size_t cap;

  std::unordered_map<long long, Atom> cells;

  long long key_of(double v) const {
    if (v == 0.0) return std::numeric_limits<long long>::min();
    if (log_ratio <= 0.0) {
      // Exact mode: key by bit pattern of the value.
      long long k;
      static_assert(sizeof(k) == sizeof(v));
      std::memcpy(&k, &v, sizeof(v));
      return k;
    }
    return std::llround(std::log(v) / log_ratio);
  }

  void deposit(double v, double p) {
    const long long k = key_of(v);
    auto [it, fresh] = cells.try_emplace(k, Atom{v, p});
    if (!fresh) {
      Atom& cell = it->second;
      const double total = cell.prob + p;
      cell.value = (cell.value * cell.prob + v * p) / total;
      cell.prob = total;
    }
    if (cells.size() > cap) throw SupportOverflow("convolution support exceeds cap");
  }

  FiniteDistribution to_distribution() const {
    std::vector<Atom> atoms;
    atoms.reserve(cells.size());
    for (const auto& [k, a] : cells) atoms.push_back(a);
    return FiniteDistribution::from_atoms(std::move(atoms));
  }
};

FiniteDistribution convolve_pair(const FiniteDistribution& x, const FiniteDistribution& y,
                                 double log_ratio, std::size_t cap) {
  GridSupport out{log_ratio, cap, {}};
  out.cells.reserve(x.size() * 2);
  for (const Atom& ax : x.atoms())
    for (const Atom& ay : y.atoms()) out.deposit(ax.value + ay.value, ax.prob * ay.prob);
  return out.to_distribution();
}

}  // namespace

FiniteDistribution convolve_average(const FiniteDistribution& dist, std::uint64_t count,
                                    const ConvolveOptions& options) {
  if (count == 0) throw std::invalid_argument("convolve_average needs count >= 1");
  if (dist.min_value() < 0.0)
    throw std::invalid_argument("convolve_average requires nonnegative support");
  const double log_ratio = options.use_grid ? std::log1p(options.grid_ratio) : 0.0;

  FiniteDistribution acc = FiniteDistribution::point_mass(0.0);
  FiniteDistribution base = dist;
  std::uint64_t n = count;
  bool acc_used = false;
  while (true) {
    if (n & 1ULL) {
      acc = acc_used ? convolve_pair(acc, base, log_ratio, options.support_cap) : base;
      acc_used = true;
    }
    n >>= 1;
    if (n == 0) break;
    base = convolve_pair(base, base, log_ratio, options.support_cap);
  }

  std::vector<Atom> atoms = acc.atoms();
  for (Atom& a : atoms) a.value /= static_cast<double>(count);
  return FiniteDistribution::from_atoms(std::move(atoms));
}

}  // namespace qcheb
