#pragma once

#include <algorithm>
#include <cstdint>

namespace qcheb {

// Per-access query prices for one sample of a derived sampler. A single
// coherent sample of an estimator circuit touches the underlying oracle a
// fixed number of times; amplitude estimation with time parameter t runs the
// circuit 2t+1 times, multiplying these prices.
struct PerSampleCost {
  std::uint64_t degree = 0;
  std::uint64_t neighbor = 0;
  std::uint64_t pair = 0;
  std::uint64_t passes = 0;

  PerSampleCost& operator+=(const PerSampleCost& o) {
    degree += o.degree;
    neighbor += o.neighbor;
    pair += o.pair;
    passes += o.passes;
    return *this;
  }
  PerSampleCost operator*(std::uint64_t n) const {
    return PerSampleCost{degree * n, neighbor * n, pair * n, passes * n};
  }
};

struct QueryLedger {
  std::uint64_t degree = 0;
  std::uint64_t neighbor = 0;
  std::uint64_t pair = 0;

  std::uint64_t total() const { return degree + neighbor + pair; }
  void add(const QueryLedger& o) {
    degree += o.degree;
    neighbor += o.neighbor;
    pair += o.pair;
  }
};

struct PassLedger {
  std::uint64_t passes = 0;
  // High-water memory gauge (cells); merged by max, not sum.
  std::uint64_t memory_cells = 0;

  void add(const PassLedger& o) {
    passes += o.passes;
    memory_cells = std::max(memory_cells, o.memory_cells);
  }
};

struct SampleLedger {
  std::uint64_t quantum_samples = 0;   // coherent runs of the sampler circuit
  std::uint64_t reflections = 0;       // Grover reflections applied
  std::uint64_t ae_invocations = 0;    // amplitude-estimation primitive calls
  std::uint64_t classical_samples = 0; // i.i.d. draws by classical baselines

  void add(const SampleLedger& o) {
    quantum_samples += o.quantum_samples;
    reflections += o.reflections;
    ae_invocations += o.ae_invocations;
    classical_samples += o.classical_samples;
  }
};

struct CostLedger {
  SampleLedger samples;
  QueryLedger queries;
  PassLedger passes;
  double simulated_time = 0.0;  // machine-time units inside variable-time runs

  void add(const CostLedger& o) {
    samples.add(o.samples);
    queries.add(o.queries);
    passes.add(o.passes);
    simulated_time += o.simulated_time;
  }
};

// Charges one amplitude-estimation run with time parameter t against `led`:
// 2t+1 circuit runs, t reflections, one invocation, and 2t+1 times the
// per-sample query/pass prices.
inline void charge_ae_run(CostLedger& led, long long t, const PerSampleCost& per) {
  const std::uint64_t runs = 2ULL * static_cast<std::uint64_t>(t) + 1ULL;
  led.samples.quantum_samples += runs;
  led.samples.reflections += static_cast<std::uint64_t>(t);
  led.samples.ae_invocations += 1;
  led.queries.degree += per.degree * runs;
  led.queries.neighbor += per.neighbor * runs;
  led.queries.pair += per.pair * runs;
  led.passes.passes += per.passes * runs;
}

}  // namespace qcheb
