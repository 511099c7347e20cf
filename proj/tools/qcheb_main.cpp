// Command-line driver for the estimation library: amplitude-estimation
// diagnostics, mean estimation on explicit distributions, variable-time
// estimation, graph edge/triangle counting, frequency moments, experiment
// sweeps, and a quick self-test.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcheb/ae.hpp"
#include "qcheb/cheb.hpp"
#include "qcheb/distribution.hpp"
#include "qcheb/experiment.hpp"
#include "qcheb/graph.hpp"
#include "qcheb/ledger.hpp"
#include "qcheb/rng.hpp"
#include "qcheb/stream.hpp"
#include "qcheb/vartime.hpp"

namespace {

using nlohmann::json;
using namespace qcheb;

FiniteDistribution load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distribution file: " + path);
  json j;
  in >> j;
  return FiniteDistribution::from_json(j);
}

VariableTimeSampler load_timed_sampler(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open timed distribution file: " + path);
  json j;
  in >> j;
  std::vector<TimedAtom> atoms;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 3) {
      throw std::runtime_error("timed distribution rows must be [value, prob, stage]");
    }
    atoms.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<int>()});
  }
  return VariableTimeSampler::from_atoms(std::move(atoms));
}

// Graph specs: gnp:<n>:<p>:<seed>, clique:<n>, star:<n>, path:<n>,
// planted:<n>:<p>:<clique>:<seed>, file:<path>.
Graph load_graph(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw std::runtime_error("empty graph spec");
  const std::string& kind = parts[0];
  auto want = [&](std::size_t k) {
    if (parts.size() != k) throw std::runtime_error("graph spec '" + kind + "' needs " +
                                                    std::to_string(k - 1) + " arguments");
  };
  if (kind == "gnp") {
    want(4);
    return Graph::erdos_renyi(std::stoi(parts[1]), std::stod(parts[2]),
                              std::stoull(parts[3]));
  }
  if (kind == "clique") {
    want(2);
    return Graph::complete(std::stoi(parts[1]));
  }
  if (kind == "star") {
    want(2);
    return Graph::star(std::stoi(parts[1]));
  }
  if (kind == "path") {
    want(2);
    return Graph::path(std::stoi(parts[1]));
  }
  if (kind == "planted") {
    want(5);
    return Graph::planted_clique(std::stoi(parts[1]), std::stod(parts[2]),
                                 std::stoi(parts[3]), std::stoull(parts[4]));
  }
  if (kind == "file") {
    want(2);
    return Graph::from_edge_list_file(parts[1]);
  }
  throw std::runtime_error("unknown graph spec kind: " + kind);
}

json ledger_json(const CostLedger& led) {
  json j;
  j["quantum_samples"] = led.samples.quantum_samples;
  j["reflections"] = led.samples.reflections;
  j["ae_invocations"] = led.samples.ae_invocations;
  j["classical_samples"] = led.samples.classical_samples;
  j["degree_queries"] = led.queries.degree;
  j["neighbor_queries"] = led.queries.neighbor;
  j["pair_queries"] = led.queries.pair;
  j["passes"] = led.passes.passes;
  j["memory_cells"] = led.passes.memory_cells;
  j["simulated_time"] = led.simulated_time;
  return j;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& name) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  // Outcome law sums to one and the closed form matches the unitary simulation.
  {
    std::vector<double> probs = ae_outcome_probabilities(0.3, 17);
    double sum = 0.0;
    for (double q : probs) sum += q;
    check(std::fabs(sum - 1.0) < 1e-12, "outcome law normalized");
    FiniteDistribution a = ae_outcome_distribution(0.3, 16);
    FiniteDistribution b = ae_statevector_distribution(0.3, 16);
    double tv = 0.0;
    for (const auto& atom : a.atoms()) tv += std::fabs(atom.prob - b.prob_of(atom.value));
    check(tv < 1e-8, "closed form matches unitary simulation");
  }
  // Mean estimation hits the advertised accuracy on a skewed two-point law.
  {
    SamplerHandle s{two_point_family(1.0, 4.0), PerSampleCost{}};
    ChebParams params{4.0, 0.5, 2.0, 0.25, 0.1};
    int hits = 0;
    for (int i = 0; i < 20; ++i) {
      Rng rng(Rng::split(7, static_cast<std::uint64_t>(i)));
      EstimateReport rep = estimate_mean_fast(s, params, rng);
      if (std::fabs(rep.estimate - 1.0) <= 0.25) ++hits;
    }
    check(hits >= 18, "mean estimator accuracy");
  }
  // Edge counting on a known graph.
  {
    Graph g = Graph::complete(12);
    Rng rng(11);
    GraphEstimateReport rep = estimate_edges(g, 0.2, 0.1, rng);
    check(std::fabs(rep.estimate - 66.0) <= 0.2 * 66.0, "edge count on K12");
  }
  // Moment estimation on a short stream.
  {
    TurnstileStream st = TurnstileStream::from_updates(
        3, {{1, 1}, {2, 2}, {3, 4}});
    FkOptions opt;
    opt.eps = 0.2;
    opt.failure = 0.2;
    Rng rng(5);
    FkReport rep = estimate_fk(st, 3, opt, rng);
    check(std::fabs(rep.estimate - 73.0) <= 0.2 * 73.0, "third moment of (1,2,4)");
  }
  std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean estimation with quadratically fewer samples: amplitude-estimation "
               "simulators, sublinear graph counting, and streaming moments"};
  app.require_subcommand(1);

  // --- ae-dist ---------------------------------------------------------
  auto* ae_cmd = app.add_subcommand(
      "ae-dist", "Print the outcome distribution of amplitude estimation");
  double ae_p = 0.25;
  long long ae_t = 16;
  bool ae_statevector = false;
  ae_cmd->add_option("--p", ae_p, "Amplitude to estimate, in [0,1]")->required();
  ae_cmd->add_option("--t", ae_t, "Time parameter (number of phase values)")->required();
  ae_cmd->add_flag("--statevector", ae_statevector,
                   "Use the explicit unitary simulation (t <= 64) instead of the closed form");

  // --- mean ------------------------------------------------------------
  auto* mean_cmd = app.add_subcommand(
      "mean", "Estimate the mean of a distribution loaded from a JSON file");
  std::string mean_dist_path;
  std::string mean_algorithm = "fast";
  double mean_delta = 2.0, mean_lower = 0.0, mean_upper = 0.0;
  double mean_eps = 0.1, mean_failure = 0.1;
  double mean_f_amp = 0.0, mean_f_exp = 0.5, mean_f_off = 0.0;
  std::uint64_t mean_seed = 1;
  int mean_trials = 1;
  bool mean_classical = false;
  mean_cmd->add_option("--dist", mean_dist_path, "JSON file: [[value, prob], ...]")
      ->required();
  mean_cmd->add_option("--algorithm", mean_algorithm,
                       "One of: basic, fast, auto, implicit")
      ->check(CLI::IsMember({"basic", "fast", "auto", "implicit"}));
  mean_cmd->add_option("--delta", mean_delta, "Spread bound sqrt(E[X^2])/E[X] (>= 1)");
  mean_cmd->add_option("--lower", mean_lower, "Lower bound on the mean");
  mean_cmd->add_option("--upper", mean_upper, "Upper bound on the mean")->required();
  mean_cmd->add_option("--eps", mean_eps, "Relative accuracy target, in (0, 1/2)");
  mean_cmd->add_option("--failure", mean_failure, "Failure probability budget, in (0, 1/2)");
  mean_cmd->add_option("--f-amplitude", mean_f_amp,
                       "Implicit spread f(x) = offset + amplitude/x^exponent: amplitude");
  mean_cmd->add_option("--f-exponent", mean_f_exp, "Implicit spread: exponent");
  mean_cmd->add_option("--f-offset", mean_f_off, "Implicit spread: offset");
  mean_cmd->add_option("--seed", mean_seed, "Random seed");
  mean_cmd->add_option("--trials", mean_trials, "Independent repetitions to run");
  mean_cmd->add_flag("--classical", mean_classical,
                     "Also run the median-of-means baseline at the same accuracy");

  // --- vartime ---------------------------------------------------------
  auto* var_cmd = app.add_subcommand(
      "vartime", "Estimate the mean of a timed distribution (variable-time sampler)");
  std::string var_dist_path;
  double var_delta = 2.0, var_lower = 0.0, var_upper = 0.0;
  double var_eps = 0.1, var_failure = 0.1;
  std::uint64_t var_seed = 1;
  int var_trials = 1;
  var_cmd->add_option("--dist", var_dist_path, "JSON file: [[value, prob, stage], ...]")
      ->required();
  var_cmd->add_option("--delta", var_delta, "Spread bound (>= 1)");
  var_cmd->add_option("--lower", var_lower, "Lower bound on the mean");
  var_cmd->add_option("--upper", var_upper, "Upper bound on the mean")->required();
  var_cmd->add_option("--eps", var_eps, "Relative accuracy target, in (0, 1/2)");
  var_cmd->add_option("--failure", var_failure, "Failure probability budget, in (0, 1/2)");
  var_cmd->add_option("--seed", var_seed, "Random seed");
  var_cmd->add_option("--trials", var_trials, "Independent repetitions to run");

  // --- edges -----------------------------------------------------------
  auto* edges_cmd = app.add_subcommand("edges", "Estimate the edge count of a graph");
  std::string edges_spec;
  double edges_eps = 0.2, edges_failure = 1.0 / 3.0;
  std::uint64_t edges_seed = 1;
  int edges_trials = 1;
  edges_cmd
      ->add_option("--graph", edges_spec,
                   "Graph spec: gnp:n:p:seed | clique:n | star:n | path:n | "
                   "planted:n:p:k:seed | file:path")
      ->required();
  edges_cmd->add_option("--eps", edges_eps, "Relative accuracy target");
  edges_cmd->add_option("--failure", edges_failure, "Failure probability budget");
  edges_cmd->add_option("--seed", edges_seed, "Random seed");
  edges_cmd->add_option("--trials", edges_trials, "Independent repetitions to run");

  // --- triangles -------------------------------------------------------
  auto* tri_cmd = app.add_subcommand("triangles", "Estimate the triangle count of a graph");
  std::string tri_spec;
  double tri_eps = 0.2;
  std::uint64_t tri_seed = 1;
  int tri_trials = 1;
  tri_cmd->add_option("--graph", tri_spec, "Graph spec (see edges --help)")->required();
  tri_cmd->add_option("--eps", tri_eps, "Slack parameter of the (4/5 + eps) guarantee");
  tri_cmd->add_option("--seed", tri_seed, "Random seed");
  tri_cmd->add_option("--trials", tri_trials, "Independent repetitions to run");

  // --- fk --------------------------------------------------------------
  auto* fk_cmd = app.add_subcommand(
      "fk", "Estimate the k-th frequency moment of a turnstile stream");
  std::string fk_path;
  int fk_k = 3, fk_passes = 1, fk_n = 0, fk_trials = 1;
  double fk_eps = 0.2, fk_failure = 0.25;
  std::uint64_t fk_seed = 1;
  fk_cmd->add_option("--stream", fk_path,
                     "Update file: lines 'index delta' (1-based index), '#' comments allowed")
      ->required();
  fk_cmd->add_option("--k", fk_k, "Moment order (>= 3)")->required();
  fk_cmd->add_option("--n", fk_n, "Dimension override (default: 1 + max index)");
  fk_cmd->add_option("--passes", fk_passes, "Pass budget traded against memory");
  fk_cmd->add_option("--eps", fk_eps, "Relative accuracy target");
  fk_cmd->add_option("--failure", fk_failure, "Failure probability budget");
  fk_cmd->add_option("--seed", fk_seed, "Random seed");
  fk_cmd->add_option("--trials", fk_trials, "Independent repetitions to run");

  // --- sweep -----------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run a seeded experiment grid from a JSON config");
  std::string sweep_config_path, sweep_out_dir;
  sweep_cmd->add_option("--config", sweep_config_path, "Experiment config JSON file")
      ->required();
  sweep_cmd->add_option("--out", sweep_out_dir,
                        "Output directory for report.json and trials.csv");

  // --- selftest ---------------------------------------------------------
  app.add_subcommand("selftest", "Run quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (ae_cmd->parsed()) {
      FiniteDistribution d = ae_statevector ? ae_statevector_distribution(ae_p, ae_t)
                                            : ae_outcome_distribution(ae_p, ae_t);
      json j;
      j["p"] = ae_p;
      j["t"] = ae_t;
      j["mean"] = d.mean();
      j["distribution"] = d.to_json();
      print_json(j);
      return 0;
    }

    if (mean_cmd->parsed()) {
      FiniteDistribution dist = load_distribution(mean_dist_path);
      SamplerHandle s{dist, PerSampleCost{}};
      json runs = json::array();
      for (int trial = 0; trial < mean_trials; ++trial) {
        Rng rng(Rng::split(mean_seed, static_cast<std::uint64_t>(trial)));
        EstimateReport rep;
        if (mean_algorithm == "basic") {
          rep = estimate_mean_basic(s, {mean_delta, mean_lower, mean_upper, mean_eps,
                                        mean_failure}, rng);
        } else if (mean_algorithm == "fast") {
          rep = estimate_mean_fast(s, {mean_delta, mean_lower, mean_upper, mean_eps,
                                       mean_failure}, rng);
        } else if (mean_algorithm == "auto") {
          rep = estimate_mean_auto_L(s, mean_delta, mean_upper, mean_eps, mean_failure, rng);
        } else {
          DeltaFunction f{mean_f_amp, mean_f_exp, mean_f_off};
          rep = estimate_mean_implicit(s, f, mean_lower, mean_upper, mean_eps,
                                       mean_failure, rng);
        }
        json one;
        one["estimate"] = rep.estimate;
        one["stopped_at_lower_bound"] = rep.stopped_at_lower_bound;
        one["final_threshold"] = rep.final_threshold_m;
        one["ledger"] = ledger_json(rep.ledger);
        if (mean_classical) {
          Rng crng(Rng::split(mean_seed ^ 0x9e3779b9ull, static_cast<std::uint64_t>(trial)));
          CostLedger cled;
          one["classical_estimate"] = classical_mean_estimate(
              dist, mean_delta, mean_eps, mean_failure, crng, &cled);
          one["classical_samples"] = cled.samples.classical_samples;
        }
        runs.push_back(one);
      }
      json j;
      j["true_mean"] = dist.mean();
      j["runs"] = runs;
      print_json(j);
      return 0;
    }

    if (var_cmd->parsed()) {
      VariableTimeSampler s = load_timed_sampler(var_dist_path);
      json runs = json::array();
      for (int trial = 0; trial < var_trials; ++trial) {
        Rng rng(Rng::split(var_seed, static_cast<std::uint64_t>(trial)));
        EstimateReport rep = var_eps_approx(
            s, {var_delta, var_lower, var_upper, var_eps, var_failure}, rng);
        json one;
        one["estimate"] = rep.estimate;
        one["ledger"] = ledger_json(rep.ledger);
        runs.push_back(one);
      }
      json j;
      j["true_mean"] = s.distribution().mean();
      j["stopping_time_l2"] = s.t_ell2();
      j["runs"] = runs;
      print_json(j);
      return 0;
    }

    if (edges_cmd->parsed()) {
      Graph g = load_graph(edges_spec);
      json runs = json::array();
      for (int trial = 0; trial < edges_trials; ++trial) {
        Rng rng(Rng::split(edges_seed, static_cast<std::uint64_t>(trial)));
        GraphEstimateReport rep = estimate_edges(g, edges_eps, edges_failure, rng);
        json one;
        one["estimate"] = rep.estimate;
        one["trivial_zero"] = rep.trivial_zero;
        one["ledger"] = ledger_json(rep.inner.ledger);
        runs.push_back(one);
      }
      json j;
      j["n"] = g.vertex_count();
      j["true_edges"] = g.edge_count();
      j["runs"] = runs;
      print_json(j);
      return 0;
    }

    if (tri_cmd->parsed()) {
      Graph g = load_graph(tri_spec);
      json runs = json::array();
      for (int trial = 0; trial < tri_trials; ++trial) {
        Rng rng(Rng::split(tri_seed, static_cast<std::uint64_t>(trial)));
        TriangleReport rep = estimate_triangles(g, tri_eps, rng);
        json one;
        one["estimate"] = rep.estimate;
        one["no_triangles"] = rep.no_triangles;
        one["accepted_scale"] = rep.accepted_scale;
        one["membership_runs"] = rep.membership_runs;
        one["ledger"] = ledger_json(rep.ledger);
        runs.push_back(one);
      }
      json j;
      j["n"] = g.vertex_count();
      j["true_triangles"] = g.triangle_count();
      j["runs"] = runs;
      print_json(j);
      return 0;
    }

    if (fk_cmd->parsed()) {
      TurnstileStream st = TurnstileStream::from_file(fk_path, fk_n);
      FkOptions opt;
      opt.pass_budget = fk_passes;
      opt.eps = fk_eps;
      opt.failure = fk_failure;
      json runs = json::array();
      for (int trial = 0; trial < fk_trials; ++trial) {
        Rng rng(Rng::split(fk_seed, static_cast<std::uint64_t>(trial)));
        FkReport rep = estimate_fk(st, fk_k, opt, rng);
        json one;
        one["estimate"] = rep.estimate;
        one["f2_used"] = rep.f2_used;
        one["copies"] = rep.copies;
        one["delta_ratio"] = rep.delta_ratio;
        one["passes"] = rep.passes.passes;
        one["memory_cells"] = rep.passes.memory_cells;
        one["ledger"] = ledger_json(rep.inner.ledger);
        runs.push_back(one);
      }
      json j;
      j["n"] = st.dimension();
      j["true_moment"] = frequency_moment(st.final_vector(), fk_k);
      j["runs"] = runs;
      print_json(j);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      std::ifstream in(sweep_config_path);
      if (!in) throw std::runtime_error("cannot open config: " + sweep_config_path);
      json config;
      in >> config;
      json report = run_experiment(config, sweep_out_dir);
      print_json(report);
      return 0;
    }

    return run_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
