#include "qoed/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qoed/report.hpp"

namespace qoed {

using nlohmann::json;

int worker_count(int tasks) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("QOED_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) cap = requested;
  }
  return std::max(1, std::min(cap, tasks));
}

namespace {

template <typename Task>
void parallel_for(int n, Task&& task) {
  const int workers = worker_count(n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) task(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / xs.size();
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / (xs.size() - 1));
}

// Stable stream id per (method, seed) so results do not depend on worker
// scheduling.
std::uint64_t stream_id(ObjectiveKind method, std::uint64_t seed) {
  return (static_cast<std::uint64_t>(method) << 48) ^ seed;
}

}  // namespace

std::vector<MethodAggregate> BenchResult::aggregates() const {
  std::vector<MethodAggregate> aggs;
  for (ObjectiveKind method : {ObjectiveKind::kBoed, ObjectiveKind::kAgnostic,
                               ObjectiveKind::kQoed}) {
    std::vector<double> params, dyns;
    for (const BenchRow& row : rows) {
      if (row.method == method) {
        params.push_back(row.param_rmse_x100);
        dyns.push_back(row.dyn_rmse_x100);
      }
    }
    if (params.empty()) continue;
    aggs.push_back({method, mean_of(params), std_of(params), mean_of(dyns),
                    std_of(dyns)});
  }
  return aggs;
}

BenchResult run_bench(const ExperimentConfig& cfg) {
  const TrueSystem truth = cfg.make_true_system();
  auto belief_model = cfg.make_configured_model();

  struct Job {
    ObjectiveKind method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (ObjectiveKind method : cfg.methods) {
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({method, seed});
  }

  BenchResult result;
  result.rows.resize(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), [&](int i) {
    const Job& job = jobs[i];
    Rng rng = make_rng(job.seed, stream_id(job.method, job.seed));
    ExplorationReport report = run_exploration(
        truth, *belief_model, job.method, cfg.exploration, cfg.cem, rng);
    BenchRow row;
    row.method = job.method;
    row.seed = job.seed;
    row.param_rmse_x100 = report.last().param_rmse_x100();
    row.dyn_rmse_x100 = report.last().rmse_x100();
    row.report = std::move(report);
    result.rows[i] = std::move(row);
  });

  std::sort(result.rows.begin(), result.rows.end(),
            [](const BenchRow& a, const BenchRow& b) {
              if (a.method != b.method) {
                return static_cast<int>(a.method) < static_cast<int>(b.method);
              }
              return a.seed < b.seed;
            });
  return result;
}

std::string comparison_csv(const BenchResult& result) {
  std::ostringstream out;
  out << "method,seed,round,param_rmse_x100,dyn_rmse_x100,bonus,eta,beta,rho\n";
  for (const BenchRow& row : result.rows) {
    for (const RoundRecord& r : row.report.rounds) {
      out << csv_escape(to_string(row.method)) << ',' << row.seed << ','
          << r.round << ',' << format_number(r.param_rmse_x100()) << ','
          << format_number(r.rmse_x100()) << ',' << format_number(r.bonus)
          << ',' << format_number(r.eta) << ',' << format_number(r.beta) << ','
          << format_number(r.rho) << '\n';
    }
  }
  return out.str();
}

std::string comparison_json(const BenchResult& result) {
  json j;
  j["rows"] = json::array();
  for (const BenchRow& row : result.rows) {
    j["rows"].push_back({{"method", to_string(row.method)},
                         {"seed", row.seed},
                         {"param_rmse_x100", row.param_rmse_x100},
                         {"dyn_rmse_x100", row.dyn_rmse_x100},
                         {"rounds", row.report.rounds.size()},
                         {"terminated_early", row.report.terminated_early}});
  }
  j["aggregate"] = json::object();
  for (const MethodAggregate& agg : result.aggregates()) {
    j["aggregate"][to_string(agg.method)] = {
        {"param_rmse_x100", {{"mean", agg.param_mean}, {"std", agg.param_std}}},
        {"dyn_rmse_x100", {{"mean", agg.dyn_mean}, {"std", agg.dyn_std}}}};
  }
  return j.dump(2) + "\n";
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& cfg) {
  const TrueSystem truth = cfg.make_true_system();
  auto belief_model = cfg.make_configured_model();
  const std::uint64_t seed = cfg.seeds.front();

  std::vector<SweepCell> cells;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      for (int l = 0; l < 10; ++l) {
        SweepCell cell;
        cell.delta_eig = 0.05 + 0.05 * i;
        cell.alpha_eig = 0.005 + 0.005 * j;
        cell.delta_cos = 0.90 + 0.01 * l;
        cells.push_back(cell);
      }
    }
  }

  parallel_for(static_cast<int>(cells.size()), [&](int idx) {
    SweepCell& cell = cells[idx];
    ExperimentConfig local = cfg;
    local.exploration.thresholds.delta_eig = cell.delta_eig;
    local.exploration.thresholds.alpha_eig = cell.alpha_eig;
    local.exploration.thresholds.delta_cos = cell.delta_cos;
    // Common random numbers across cells: one stream per method, so
    // cell-to-cell variation isolates the threshold effect.
    for (ObjectiveKind method :
         {ObjectiveKind::kQoed, ObjectiveKind::kAgnostic}) {
      Rng rng = make_rng(seed, stream_id(method, 0));
      const ExplorationReport report =
          run_exploration(truth, *belief_model, method, local.exploration,
                          local.cem, rng);
      if (method == ObjectiveKind::kQoed) {
        cell.qoed_dyn_rmse_x100 = report.last().rmse_x100();
      } else {
        cell.agnostic_dyn_rmse_x100 = report.last().rmse_x100();
      }
    }
  });
  return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "delta_eig,alpha_eig,delta_cos,qoed_dyn_rmse_x100,"
         "agnostic_dyn_rmse_x100\n";
  for (const SweepCell& cell : cells) {
    out << format_number(cell.delta_eig) << ',' << format_number(cell.alpha_eig)
        << ',' << format_number(cell.delta_cos) << ','
        << format_number(cell.qoed_dyn_rmse_x100) << ','
        << format_number(cell.agnostic_dyn_rmse_x100) << '\n';
  }
  return out.str();
}

}  // namespace qoed
