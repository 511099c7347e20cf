#include "qcheb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace qcheb {

double wilson_lower_bound(int successes, int trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_lower_bound: trials must be positive");
  if (successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_lower_bound: successes out of range");
  }
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double rad = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  const double lb = (center - rad) / denom;
  return std::max(0.0, lb);
}

double classical_mean_estimate(const FiniteDistribution& dist, double delta_ratio,
                               double eps, double failure, Rng& rng, CostLedger* ledger) {
  if (!(delta_ratio >= 1.0)) {
    throw std::invalid_argument("classical_mean_estimate: spread ratio must be >= 1");
  }
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw std::invalid_argument("classical_mean_estimate: eps must lie in (0,1)");
  }
  if (!(failure > 0.0) || failure >= 1.0) {
    throw std::invalid_argument("classical_mean_estimate: failure must lie in (0,1)");
  }
  const long long per_group =
      static_cast<long long>(std::ceil(4.0 * delta_ratio * delta_ratio / (eps * eps)));
  const int groups = 2 * static_cast<int>(std::ceil(4.0 * std::log(1.0 / failure))) + 1;
  std::vector<double> means(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    double sum = 0.0;
    for (long long i = 0; i < per_group; ++i) sum += dist.sample(rng);
    means[static_cast<std::size_t>(g)] = sum / static_cast<double>(per_group);
  }
  if (ledger != nullptr) {
    ledger->samples.classical_samples += per_group * groups;
  }
  auto mid = means.begin() + groups / 2;
  std::nth_element(means.begin(), mid, means.end());
  return *mid;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("log_log_slope: need matching vectors of length >= 2");
  }
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("log_log_slope: data must be positive");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (std::fabs(denom) < 1e-30) {
    throw std::invalid_argument("log_log_slope: x values are all equal");
  }
  return (nn * sxy - sx * sy) / denom;
}

FiniteDistribution two_point_family(double mean, double delta_ratio) {
  if (!(mean > 0.0) || !(delta_ratio >= 1.0)) {
    throw std::invalid_argument("two_point_family: need mean > 0 and ratio >= 1");
  }
  // Mass p at v with v*p = mean and v^2*p = (mean*delta_ratio)^2 gives the
  // requested second-moment-to-mean ratio exactly.
  const double v = mean * delta_ratio * delta_ratio;
  const double p = 1.0 / (delta_ratio * delta_ratio);
  if (p >= 1.0) return FiniteDistribution::point_mass(mean);
  return FiniteDistribution::from_atoms({{0.0, 1.0 - p}, {v, p}});
}

std::uint64_t fnv1a_hash(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

nlohmann::json algorithm_constants() {
  nlohmann::json c;
  c["probe_time_per_spread"] = 25;
  c["stop_scale_min_over_mean"] = 2.0;
  c["stop_scale_max_over_mean"] = 2500.0;
  c["basic_refine_coeff"] = 1225.0;
  c["split_refine_coeff"] = 2601.0;
  const double pi = 3.14159265358979323846;
  c["amplitude_overshoot_factor"] = (1.0 + 2.0 * pi) * (1.0 + 2.0 * pi);
  c["relative_final_coeff"] = 8.0 * (1.0 + 2.0 * pi);
  c["var_probe_time_per_spread"] = 25;
  c["var_final_time_coeff"] = 100.0;
  c["triangle_bucket_ratio_of_eps"] = 0.25;
  c["tv_spread_coeff"] = 8.0;
  c["classical_group_size_coeff"] = 4.0;
  c["classical_group_count_coeff"] = 4.0;
  return c;
}

namespace {

struct CellResult {
  double delta_ratio = 0.0;
  double eps = 0.0;
  int trials = 0;
  int hits = 0;
  double mean_quantum_samples = 0.0;
  double mean_reflections = 0.0;
  double mean_classical_samples = 0.0;
  int classical_hits = 0;
};

nlohmann::json run_mean_sweep(const nlohmann::json& config, std::string* csv_out) {
  const std::uint64_t seed = config.value("seed", std::uint64_t{1});
  const int trials = config.value("trials", 50);
  const std::string algorithm = config.value("algorithm", std::string("fast"));
  const double failure = config.value("failure", 0.1);
  const bool compare_classical = config.value("compare_classical", false);
  std::vector<double> eps_list = config.value("eps", std::vector<double>{0.2});
  std::vector<double> ratio_list =
      config.value("delta_ratios", std::vector<double>{2.0, 4.0, 8.0});
  if (trials <= 0) throw std::invalid_argument("mean-sweep: trials must be positive");
  if (algorithm != "fast" && algorithm != "basic") {
    throw std::invalid_argument("mean-sweep: algorithm must be 'fast' or 'basic'");
  }

  std::string csv = "delta_ratio,eps,trial,estimate,quantum_samples,reflections,"
                    "classical_samples,classical_estimate\n";
  std::vector<CellResult> cells;
  std::uint64_t cell_index = 0;
  for (double eps : eps_list) {
    for (double ratio : ratio_list) {
      const SamplerHandle sampler{two_point_family(1.0, ratio), PerSampleCost{}};
      ChebParams params;
      params.delta_ratio = ratio;
      params.lower = 0.5;
      params.upper = 2.0;
      params.eps = eps;
      params.failure = failure;

      CellResult cell;
      cell.delta_ratio = ratio;
      cell.eps = eps;
      cell.trials = trials;
      for (int trial = 0; trial < trials; ++trial) {
        Rng rng(Rng::split(seed, cell_index * 1000003ull + static_cast<std::uint64_t>(trial)));
        EstimateReport rep = (algorithm == "fast") ? estimate_mean_fast(sampler, params, rng)
                                                   : estimate_mean_basic(sampler, params, rng);
        const bool hit = std::fabs(rep.estimate - 1.0) <= eps;
        cell.hits += hit ? 1 : 0;
        cell.mean_quantum_samples += static_cast<double>(rep.ledger.samples.quantum_samples);
        cell.mean_reflections += static_cast<double>(rep.ledger.samples.reflections);

        double classical_est = 0.0;
        long long classical_used = 0;
        if (compare_classical) {
          Rng crng(Rng::split(seed ^ 0x5bd1e995u, cell_index * 1000003ull +
                                                       static_cast<std::uint64_t>(trial)));
          CostLedger cledger;
          classical_est =
              classical_mean_estimate(sampler.dist, ratio, eps, failure, crng, &cledger);
          classical_used = cledger.samples.classical_samples;
          cell.mean_classical_samples += static_cast<double>(classical_used);
          cell.classical_hits += (std::fabs(classical_est - 1.0) <= eps) ? 1 : 0;
        }

        csv += format_g17(ratio) + "," + format_g17(eps) + "," + std::to_string(trial) + "," +
               format_g17(rep.estimate) + "," +
               std::to_string(rep.ledger.samples.quantum_samples) + "," +
               std::to_string(rep.ledger.samples.reflections) + "," +
               std::to_string(classical_used) + "," + format_g17(classical_est) + "\n";
      }
      cell.mean_quantum_samples /= static_cast<double>(trials);
      cell.mean_reflections /= static_cast<double>(trials);
      if (compare_classical) cell.mean_classical_samples /= static_cast<double>(trials);
      cells.push_back(cell);
      ++cell_index;
    }
  }

  nlohmann::json cells_json = nlohmann::json::array();
  for (const CellResult& cell : cells) {
    nlohmann::json j;
    j["delta_ratio"] = cell.delta_ratio;
    j["eps"] = cell.eps;
    j["trials"] = cell.trials;
    j["success_rate"] = static_cast<double>(cell.hits) / static_cast<double>(cell.trials);
    j["success_lower_bound"] = wilson_lower_bound(cell.hits, cell.trials);
    j["mean_quantum_samples"] = cell.mean_quantum_samples;
    j["mean_reflections"] = cell.mean_reflections;
    if (compare_classical) {
      j["mean_classical_samples"] = cell.mean_classical_samples;
      j["classical_success_rate"] =
          static_cast<double>(cell.classical_hits) / static_cast<double>(cell.trials);
    }
    cells_json.push_back(j);
  }

  // Cost scaling diagnostics: slope of quantum cost in the spread ratio at
  // fixed eps, and in 1/eps at fixed ratio.
  nlohmann::json slopes = nlohmann::json::object();
  if (ratio_list.size() >= 2) {
    nlohmann::json by_eps = nlohmann::json::array();
    for (double eps : eps_list) {
      std::vector<double> xs, ys;
      for (const CellResult& cell : cells) {
        if (cell.eps == eps) {
          xs.push_back(cell.delta_ratio);
          ys.push_back(cell.mean_quantum_samples);
        }
      }
      nlohmann::json entry;
      entry["eps"] = eps;
      entry["slope_vs_delta_ratio"] = log_log_slope(xs, ys);
      by_eps.push_back(entry);
    }
    slopes["quantum_cost_vs_delta_ratio"] = by_eps;
  }
  if (eps_list.size() >= 2) {
    nlohmann::json by_ratio = nlohmann::json::array();
    for (double ratio : ratio_list) {
      std::vector<double> xs, ys;
      for (const CellResult& cell : cells) {
        if (cell.delta_ratio == ratio) {
          xs.push_back(1.0 / cell.eps);
          ys.push_back(cell.mean_quantum_samples);
        }
      }
      nlohmann::json entry;
      entry["delta_ratio"] = ratio;
      entry["slope_vs_inverse_eps"] = log_log_slope(xs, ys);
      by_ratio.push_back(entry);
    }
    slopes["quantum_cost_vs_inverse_eps"] = by_ratio;
  }

  nlohmann::json result;
  result["cells"] = cells_json;
  result["slopes"] = slopes;
  *csv_out = csv;
  return result;
}

}  // namespace

nlohmann::json run_experiment(const nlohmann::json& config, const std::string& out_dir) {
  const std::string kind = config.value("kind", std::string(""));
  std::string csv;
  nlohmann::json result;
  if (kind == "mean-sweep") {
    result = run_mean_sweep(config, &csv);
  } else {
    throw std::invalid_argument("run_experiment: unknown kind '" + kind + "'");
  }

  nlohmann::json report;
  report["version"] = kVersion;
  report["config"] = config;
  report["config_hash"] = fnv1a_hash(config.dump());
  report["constants"] = algorithm_constants();
  report["result"] = result;

  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    {
      std::ofstream out(out_dir + "/report.json");
      if (!out) throw std::runtime_error("run_experiment: cannot write report.json");
      out << report.dump(2) << "\n";
    }
    {
      std::ofstream out(out_dir + "/trials.csv");
      if (!out) throw std::runtime_error("run_experiment: cannot write trials.csv");
      out << csv;
    }
  }
  return report;
}

}  // namespace qcheb
