#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qcheb/cheb.hpp"
#include "qcheb/distribution.hpp"
#include "qcheb/rng.hpp"
#include "qcheb/vartime.hpp"

namespace qcheb {

// Simple undirected graph with adjacency-list storage and the exact
// combinatorial quantities the estimators are checked against.
class Graph {
 public:
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& edges);
  // File format: first non-comment line is the vertex count, then one
  // 0-based "u v" pair per line; '#' starts a comment.
  static Graph from_edge_list_file(const std::string& path);
  static Graph erdos_renyi(int n, double p, std::uint64_t seed);
  static Graph complete(int n);
  static Graph star(int n);  // vertex 0 joined to all others
  static Graph path(int n);
  // Erdos-Renyi background with a clique planted on vertices 0..k-1.
  static Graph planted_clique(int n, double p, int clique_size, std::uint64_t seed);

  int vertex_count() const { return n_; }
  long long edge_count() const { return m_; }
  int degree(int v) const;
  const std::vector<int>& neighbors(int v) const;
  bool adjacent(int u, int v) const;

  long long triangle_count() const;
  long long triangles_at(int v) const;  // triangles containing v

  // Degree-based total order used to orient edges: u comes first when its
  // degree is smaller, ties broken by vertex id.
  bool precedes(int u, int v) const;
  // Number of neighbors w of v with v preceding w (edges charged to v).
  int dv_plus(int v) const;

 private:
  int n_ = 0;
  long long m_ = 0;
  std::vector<std::vector<int>> adj_;
};

// Exact outcome law of the edge-counting estimator: pick a uniform vertex v,
// a uniform neighbor w, output n * degree(v) if v precedes w else 0. Mean is
// the edge count; one sample costs 2 degree queries and 1 neighbor query.
FiniteDistribution edge_estimator_distribution(const Graph& g);
PerSampleCost edge_estimator_cost();

struct GraphEstimateReport {
  double estimate = 0.0;
  bool trivial_zero = false;  // answered without estimation (no mass to probe)
  EstimateReport inner;
};

// Sublinear edge counting: runs the implicit-spread mean estimator on the
// edge estimator with spread function (8)^(1/4) * sqrt(n) / x^(1/4),
// lower bound 1, upper bound n^2.
GraphEstimateReport estimate_edges(const Graph& g, double eps, double failure, Rng& rng);

// Exact outcome law (with per-outcome stopping stages) of the per-vertex
// triangle estimator at v: pick a uniform neighbor w, orient the edge to its
// degree-smaller endpoint u, and count triangle-closing neighbors of u that
// sit above w in the order, subsampled at rate sqrt(2m)/degree(u). Mean is
// triangles_at(v) / degree(v); outcome cost is 1, or 1 + r when r neighbors
// of u are inspected.
VariableTimeSampler tv_estimator_sampler(const Graph& g, int v);

struct TvOptions {
  double spread_coeff = 8.0;  // c in the (c*m)^(1/4) spread amplitude
  VarTimeOptions vartime;
};

// Estimates triangles_at(v) given a lower bound on it, via the variable-time
// implicit-spread mean estimator; the result is scaled back by degree(v).
GraphEstimateReport estimate_tv(const Graph& g, int v, double lower, double eps,
                                double failure, Rng& rng, const TvOptions& options = {});

struct TriangleOptions {
  TvOptions tv;
  double accept_band = 20.0;  // accept a scale when the partial sum is within this factor
};

struct TriangleReport {
  double estimate = 0.0;
  bool no_triangles = false;   // scale search exhausted without acceptance
  double accepted_scale = 0.0;
  std::vector<int> kept_buckets;
  int membership_runs = 0;  // nested estimator simulations performed
  CostLedger ledger;
};

// Whole-graph triangle counting: buckets vertices by estimated triangle
// count with ratio 1 + eps/4, discards buckets too small to matter at the
// probed total scale, and sums bucket sizes (estimated by the plain mean
// estimator on the realized membership indicator) times bucket values.
// Guarantee: within (4/5 + eps) * t of the true count t with probability
// >= 2/3. Membership of each plausible (vertex, bucket) pair is realized
// once per run by an independent seeded estimator simulation and reused
// across probed scales.
TriangleReport estimate_triangles(const Graph& g, double eps, Rng& rng,
                                  const TriangleOptions& options = {});

}  // namespace qcheb
