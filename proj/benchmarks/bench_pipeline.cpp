#include <benchmark/benchmark.h>

#include "qoed/design.hpp"
#include "qoed/estimation.hpp"
#include "qoed/fisher.hpp"
#include "qoed/models.hpp"
#include "qoed/objectives.hpp"
#include "qoed/rng.hpp"
#include "qoed/subspace.hpp"

namespace {

std::vector<qoed::ScoreSample> make_scores(int m, int n, qoed::Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<qoed::ScoreSample> scores;
  scores.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd g(m);
    for (int j = 0; j < m; ++j) g(j) = gauss(rng);
    scores.push_back(g);
  }
  return scores;
}

void BM_EstimateFim(benchmark::State& state) {
  qoed::Rng rng = qoed::make_rng(7);
  const auto scores = make_scores(static_cast<int>(state.range(0)), 4096, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qoed::estimate_fim(scores));
  }
}
BENCHMARK(BM_EstimateFim)->Arg(4)->Arg(8)->Arg(16);

void BM_Eigendecompose(benchmark::State& state) {
  qoed::Rng rng = qoed::make_rng(7);
  const auto scores = make_scores(static_cast<int>(state.range(0)), 512, rng);
  const qoed::FisherMatrix fim = qoed::estimate_fim(scores);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qoed::eigendecompose(fim));
  }
}
BENCHMARK(BM_Eigendecompose)->Arg(4)->Arg(16)->Arg(64);

void BM_QoedObjective(benchmark::State& state) {
  qoed::Rng rng = qoed::make_rng(7);
  const int m = static_cast<int>(state.range(0));
  const auto scores = make_scores(m, 512, rng);
  const qoed::FisherMatrix fim = qoed::estimate_fim(scores);
  std::vector<int> k(m / 2);
  std::iota(k.begin(), k.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qoed::qoed_objective(fim, k));
  }
}
BENCHMARK(BM_QoedObjective)->Arg(4)->Arg(16)->Arg(64);

void BM_SelectIdentifiable(benchmark::State& state) {
  qoed::Rng rng = qoed::make_rng(7);
  const int m = static_cast<int>(state.range(0));
  const auto scores = make_scores(m, 512, rng);
  const qoed::FisherMatrix fim = qoed::estimate_fim(scores);
  const qoed::EigenDecomp decomp = qoed::eigendecompose(fim);
  const qoed::EigenSplit split = qoed::split_observable(decomp, 0.1, 0.01);
  const int n = static_cast<int>(split.observable_idx.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        qoed::select_identifiable(split.W_o, n, 0.95));
  }
}
BENCHMARK(BM_SelectIdentifiable)->Arg(8)->Arg(24)->Arg(48);

void BM_QoedBonusPipeline(benchmark::State& state) {
  const qoed::NuisanceCoupled model(0.15);
  qoed::Rng rng = qoed::make_rng(11);
  const Eigen::VectorXd phi = model.param_center();
  const Eigen::VectorXd s0 = Eigen::VectorXd::Zero(2);
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  std::vector<Eigen::VectorXd> actions;
  for (int t = 0; t < 40; ++t) {
    Eigen::VectorXd a(2);
    a << act(rng), act(rng);
    actions.push_back(a);
  }
  std::vector<qoed::ScoreSample> scores;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    const qoed::Trajectory traj = model.simulate_trajectory(phi, s0, actions, rng);
    scores.push_back(model.trajectory_score(traj, phi));
  }
  const qoed::BonusConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qoed::qoed_bonus(scores, config));
  }
}
BENCHMARK(BM_QoedBonusPipeline)->Arg(64)->Arg(512)->Arg(4096);

void BM_CemEstimate(benchmark::State& state) {
  const qoed::LinearGaussian1D model(0.0);
  Eigen::VectorXd phi_true(2);
  phi_true << 0.9, 0.2;
  qoed::Rng rng = qoed::make_rng(13);
  Eigen::VectorXd s0(1);
  s0 << 1.0;
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  std::vector<Eigen::VectorXd> actions;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a(1);
    a << act(rng);
    actions.push_back(a);
  }
  const qoed::Trajectory observed = model.mean_rollout(phi_true, s0, actions);
  qoed::CemConfig cfg;
  cfg.samples_per_iter = static_cast<int>(state.range(0));
  for (auto _ : state) {
    qoed::Rng inner = qoed::make_rng(13, 1);
    benchmark::DoNotOptimize(qoed::cem_estimate(
        model, observed, qoed::default_belief(model), cfg, inner));
  }
}
BENCHMARK(BM_CemEstimate)->Arg(256)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
