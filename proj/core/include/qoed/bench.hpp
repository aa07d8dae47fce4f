#ifndef QOED_BENCH_HPP_
#define QOED_BENCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qoed/config.hpp"
#include "qoed/design.hpp"

namespace qoed {

// One exploration run's final metrics.
struct BenchRow {
  ObjectiveKind method;
  std::uint64_t seed;
  double param_rmse_x100;
  double dyn_rmse_x100;
  ExplorationReport report;
};

struct MethodAggregate {
  ObjectiveKind method;
  double param_mean, param_std;
  double dyn_mean, dyn_std;
};

struct BenchResult {
  std::vector<BenchRow> rows;  // sorted by (method, seed)
  std::vector<MethodAggregate> aggregates() const;
};

// Worker cap: QOED_THREADS if set, else hardware concurrency.
int worker_count(int tasks);

// Runs run_exploration for every (method, seed) pair of the config, in
// parallel seed workers with independent RNG streams. Deterministic per
// seed; rows come back sorted.
BenchResult run_bench(const ExperimentConfig& cfg);

// Per-round CSV with the fixed column set
// method,seed,round,param_rmse_x100,dyn_rmse_x100,bonus,eta,beta,rho.
std::string comparison_csv(const BenchResult& result);

// Aggregated table (rows + mean/std per method) as JSON text.
std::string comparison_json(const BenchResult& result);

// One robustness-grid cell.
struct SweepCell {
  double delta_eig;
  double alpha_eig;
  double delta_cos;
  double qoed_dyn_rmse_x100;
  double agnostic_dyn_rmse_x100;
};

// Fixed grid: delta_eig 0.05..0.5 step 0.05, alpha_eig 0.005..0.05 step
// 0.005, delta_cos 0.9..0.99 step 0.01; one exploration run per cell and
// method using the config's first seed.
std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg);

std::string sweep_csv(const std::vector<SweepCell>& cells);

}  // namespace qoed

#endif  // QOED_BENCH_HPP_
