#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcheb/cheb.hpp"
#include "qcheb/distribution.hpp"
#include "qcheb/ledger.hpp"
#include "qcheb/rng.hpp"

namespace qcheb {

inline constexpr const char* kVersion = "1.0.0";

// One-sided lower confidence bound for a binomial proportion (Wilson score
// interval). Default z is the 99% one-sided normal quantile.
double wilson_lower_bound(int successes, int trials, double z = 2.3263478740408408);

// Median-of-means baseline: groups of ceil(4 * delta^2 / eps^2) i.i.d. draws,
// median over 2*ceil(4*ln(1/failure)) + 1 group means. Charges classical
// samples against the ledger.
double classical_mean_estimate(const FiniteDistribution& dist, double delta_ratio,
                               double eps, double failure, Rng& rng,
                               CostLedger* ledger = nullptr);

// Least-squares slope of log(y) against log(x). Requires positive data.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// A two-point distribution with mean `mean` and spread ratio exactly
// `delta_ratio`: mass at 0 and at mean * delta_ratio^2.
FiniteDistribution two_point_family(double mean, double delta_ratio);

// FNV-1a hash, used to fingerprint experiment configs in reports.
std::uint64_t fnv1a_hash(const std::string& data);

// Shortest round-trippable decimal form of a double (%.17g).
std::string format_g17(double x);

// The fixed numeric choices of the estimation algorithms, embedded in every
// report so result files are self-describing.
nlohmann::json algorithm_constants();

// Runs a seeded experiment described by `config` and returns the report.
// When out_dir is nonempty, writes report.json and trials.csv there.
// Reports carry a config hash and no timestamps, so reruns are
// byte-identical.
//
// Supported config kinds:
//   mean-sweep: {"kind": "mean-sweep", "seed": u64, "trials": int,
//                "algorithm": "fast"|"basic", "eps": [..], "delta_ratios": [..],
//                "failure": d, "compare_classical": bool}
//     runs the estimator on two-point families with the given spread ratios
//     and reports per-cell cost aggregates, accuracy rates, and log-log cost
//     slopes in the spread ratio and in 1/eps.
nlohmann::json run_experiment(const nlohmann::json& config, const std::string& out_dir);

}  // namespace qcheb
