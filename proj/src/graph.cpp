#include "qcheb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qcheb {

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
  Graph g;
  g.n_ = n;
  g.adj_.assign(static_cast<std::size_t>(n), {});
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self loops not allowed");
    const std::pair<int, int> key{std::min(u, v), std::max(u, v)};
    if (!seen.insert(key).second) continue;
    g.adj_[static_cast<std::size_t>(u)].push_back(v);
    g.adj_[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& a : g.adj_) std::sort(a.begin(), a.end());
  g.m_ = static_cast<long long>(seen.size());
  return g;
}

Graph Graph::from_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    if (n < 0) {
      if (ss >> n) continue;
      continue;  // blank/comment before the header
    }
    int u, v;
    if (ss >> u >> v) edges.emplace_back(u, v);
  }
  if (n < 1) throw std::runtime_error("graph file missing vertex count header");
  return from_edges(n, edges);
}

Graph Graph::erdos_renyi(int n, double p, std::uint64_t seed) {
  if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument("edge probability in [0,1]");
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.next_bernoulli(p)) edges.emplace_back(u, v);
  return from_edges(n, edges);
}

Graph Graph::complete(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return from_edges(n, edges);
}

Graph Graph::star(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(0, v);
  return from_edges(n, edges);
}

Graph Graph::path(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return from_edges(n, edges);
}

Graph Graph::planted_clique(int n, double p, int clique_size, std::uint64_t seed) {
  if (clique_size < 0 || clique_size > n) throw std::invalid_argument("clique size out of range");
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (v < clique_size || rng.next_bernoulli(p)) edges.emplace_back(u, v);
  return from_edges(n, edges);
}

int Graph::degree(int v) const {
  return static_cast<int>(adj_.at(static_cast<std::size_t>(v)).size());
}

const std::vector<int>& Graph::neighbors(int v) const {
  return adj_.at(static_cast<std::size_t>(v));
}

bool Graph::adjacent(int u, int v) const {
  const auto& a = adj_.at(static_cast<std::size_t>(u));
  return std::binary_search(a.begin(), a.end(), v);
}

long long Graph::triangles_at(int v) const {
  const auto& nv = neighbors(v);
  long long t = 0;
  for (std::size_t i = 0; i < nv.size(); ++i)
    for (std::size_t j = i + 1; j < nv.size(); ++j)
      if (adjacent(nv[i], nv[j])) ++t;
  return t;
}

long long Graph::triangle_count() const {
  long long t = 0;
  for (int v = 0; v < n_; ++v) t += triangles_at(v);
  return t / 3;
}

bool Graph::precedes(int u, int v) const {
  const int du = degree(u), dv = degree(v);
  return du < dv || (du == dv && u < v);
}

int Graph::dv_plus(int v) const {
  int c = 0;
  for (int w : neighbors(v))
    if (precedes(v, w)) ++c;
  return c;
}

FiniteDistribution edge_estimator_distribution(const Graph& g) {
  const int n = g.vertex_count();
  std::vector<Atom> atoms;
  double zero_mass = 0.0;
  const double pv = 1.0 / static_cast<double>(n);
  for (int v = 0; v < n; ++v) {
    const int d = g.degree(v);
    if (d == 0) {
      zero_mass += pv;
      continue;
    }
    const double up = static_cast<double>(g.dv_plus(v)) / static_cast<double>(d);
    if (up > 0.0) atoms.push_back({static_cast<double>(n) * d, pv * up});
    zero_mass += pv * (1.0 - up);
  }
  atoms.push_back({0.0, zero_mass});
  return FiniteDistribution::from_atoms(std::move(atoms));
}

PerSampleCost edge_estimator_cost() { return PerSampleCost{2, 1, 0, 0}; }

GraphEstimateReport estimate_edges(const Graph& g, double eps, double failure, Rng& rng) {
  GraphEstimateReport rep;
  const double n = static_cast<double>(g.vertex_count());
  if (g.vertex_count() < 2) {
    rep.trivial_zero = true;
    return rep;
  }
  SamplerHandle s{edge_estimator_distribution(g), edge_estimator_cost()};
  DeltaFunction f{std::pow(8.0, 0.25) * std::sqrt(n), 0.25, 0.0};
  rep.inner = estimate_mean_implicit(s, f, 1.0, n * n, eps, failure, rng);
  rep.estimate = rep.inner.estimate;
  return rep;
}

namespace {

// Smallest stage s with 2^s >= cost.
int stage_of_cost(long long cost) {
  int s = 1;
  while (std::ldexp(1.0, s) < static_cast<double>(cost)) ++s;
  return s;
}

}  // namespace

VariableTimeSampler tv_estimator_sampler(const Graph& g, int v) {
  const int dv = g.degree(v);
  if (dv == 0) throw std::invalid_argument("vertex has no neighbors");
  const double sqrt2m = std::sqrt(2.0 * static_cast<double>(g.edge_count()));
  const double pw = 1.0 / static_cast<double>(dv);

  std::vector<TimedAtom> atoms;
  long long r_max = 1;
  for (int w : g.neighbors(v)) {
    const int u = g.precedes(v, w) ? v : w;
    const int other = (u == v) ? w : v;
    const int du = g.degree(u);
    long long cnt = 0;
    for (int x : g.neighbors(u))
      if (g.adjacent(x, other) && g.precedes(w, x)) ++cnt;
    const double q = static_cast<double>(cnt) / static_cast<double>(du);

    if (static_cast<double>(du) <= sqrt2m) {
      const double pfire = static_cast<double>(du) / sqrt2m;
      atoms.push_back({0.0, pw * (1.0 - pfire * q), 1});
      if (q > 0.0) atoms.push_back({sqrt2m, pw * pfire * q, 1});
    } else {
      const long long r = static_cast<long long>(std::ceil(static_cast<double>(du) / sqrt2m));
      r_max = std::max(r_max, r);
      const int stage = stage_of_cost(1 + r);
      double comb = 1.0;  // C(r, h), updated incrementally
      for (long long h = 0; h <= r; ++h) {
        if (h > 0) comb *= static_cast<double>(r - h + 1) / static_cast<double>(h);
        const double prob =
            comb * std::pow(q, static_cast<double>(h)) *
            std::pow(1.0 - q, static_cast<double>(r - h));
        if (prob > 0.0)
          atoms.push_back({static_cast<double>(du) * static_cast<double>(h) /
                               static_cast<double>(r),
                           pw * prob, stage});
      }
    }
  }

  const auto rm = static_cast<std::uint64_t>(r_max);
  return VariableTimeSampler::from_atoms(std::move(atoms),
                                         PerSampleCost{2 + rm, 1 + rm, rm, 0});
}

GraphEstimateReport estimate_tv(const Graph& g, int v, double lower, double eps,
                                double failure, Rng& rng, const TvOptions& options) {
  GraphEstimateReport rep;
  const int dv = g.degree(v);
  if (dv == 0) {
    rep.trivial_zero = true;
    return rep;
  }
  if (!(lower > 0.0)) throw std::invalid_argument("lower bound must be positive");
  if (g.triangles_at(v) == 0) {
    // Every window amplitude of the estimator is exactly zero, so every probe
    // reads zero and the search declares zero deterministically; skip it.
    rep.trivial_zero = true;
    return rep;
  }
  const double n = static_cast<double>(g.vertex_count());
  const double lmu = lower / static_cast<double>(dv);
  const double hmu = n * n;
  if (lmu >= hmu) {
    rep.trivial_zero = true;  // claimed lower bound exceeds any possible count
    return rep;
  }
  VariableTimeSampler s = tv_estimator_sampler(g, v);
  DeltaFunction f{std::pow(options.spread_coeff * static_cast<double>(g.edge_count()), 0.25),
                  0.5, 1.0};
  rep.inner = var_eps_approx_implicit(s, f, lmu, hmu, eps, failure, rng, options.vartime);
  rep.estimate = rep.inner.estimate * static_cast<double>(dv);
  return rep;
}

TriangleReport estimate_triangles(const Graph& g, double eps, Rng& rng,
                                  const TriangleOptions& options) {
  if (!(eps > 0.0) || !(eps < 0.5))
    throw std::invalid_argument("relative accuracy out of range");
  TriangleReport rep;
  const int n = g.vertex_count();
  if (n < 3) {
    rep.no_triangles = true;
    return rep;
  }

  const double c = eps / 4.0;
  const double log1c = std::log1p(c);
  const int k_buckets =
      static_cast<int>(std::ceil(3.0 * std::log(static_cast<double>(n)) / log1c));
  const double delta_memb =
      std::min(0.4, eps / (static_cast<double>(n) * static_cast<double>(n) *
                           static_cast<double>(n)));

  // Realize bucket membership once per plausible (vertex, bucket) pair; a
  // pair is plausible when the bucket overlaps the estimator's accuracy band
  // around the true count (elsewhere membership probability is below the
  // per-run failure budget and realizes as non-membership).
  std::vector<long long> bucket_count(static_cast<std::size_t>(k_buckets) + 1, 0);
  for (int v = 0; v < n; ++v) {
    const long long tv = g.triangles_at(v);
    if (tv == 0) continue;  // all-zero estimator: the membership run returns 0
    const int iv =
        static_cast<int>(std::floor(std::log(static_cast<double>(tv)) / log1c + 1e-9)) + 1;
    for (int i = std::max(1, iv - 1); i <= std::min(k_buckets, iv + 1); ++i) {
      const double lo = std::pow(1.0 + c, i - 1);
      const double hi = std::pow(1.0 + c, i);
      Rng child(Rng::split(rng.next_u64(),
                           static_cast<std::uint64_t>(v) * (k_buckets + 1) +
                               static_cast<std::uint64_t>(i)));
      const GraphEstimateReport er =
          estimate_tv(g, v, lo, c / 2.0, delta_memb, child, options.tv);
      rep.ledger.add(er.inner.ledger);
      ++rep.membership_runs;
      if (er.estimate >= lo * (1.0 - 1e-12) && er.estimate <= hi * (1.0 + 1e-12))
        ++bucket_count[static_cast<std::size_t>(i)];
    }
  }

  const double d_bucket =
      1.0 / (8.0 * static_cast<double>(k_buckets + 1) *
             std::max(1.0, 3.0 * std::log2(static_cast<double>(n))));
  const double band = options.accept_band;

  for (double tbar = std::pow(static_cast<double>(n), 3.0); tbar >= 0.25; tbar /= 2.0) {
    double sum = 0.0;
    std::vector<int> kept;
    for (int i = 1; i <= k_buckets; ++i) {
      const double value = std::pow(1.0 + c, i);
      const double thr = std::max(std::cbrt(c * tbar) / (k_buckets + 1),
                                  c * tbar / ((k_buckets + 1) * value));
      double size_est = 0.0;
      if (bucket_count[static_cast<std::size_t>(i)] > 0) {
        const double phat =
            static_cast<double>(bucket_count[static_cast<std::size_t>(i)]) /
            static_cast<double>(n);
        SamplerHandle sh{FiniteDistribution::from_atoms(
                             {{0.0, 1.0 - phat}, {static_cast<double>(n), phat}}),
                         {}};
        ChebParams bp{std::max(1.0, std::sqrt(static_cast<double>(n) / thr)), 1.0,
                      static_cast<double>(n), eps / 8.0, d_bucket};
        EstimateReport er = estimate_mean_fast(sh, bp, rng);
        rep.ledger.add(er.ledger);
        size_est = er.estimate;
      }
      if (size_est >= thr) {
        kept.push_back(i);
        sum += size_est * value;
      }
    }
    if (sum / 3.0 >= tbar / band && sum / 3.0 <= tbar * band) {
      rep.estimate = sum / 5.0;
      rep.accepted_scale = tbar;
      rep.kept_buckets = std::move(kept);
      return rep;
    }
  }
  rep.no_triangles = true;
  return rep;
}

}  // namespace qcheb
