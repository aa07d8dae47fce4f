#include <doctest.h>

#include <cmath>

#include "qoed/config.hpp"
#include "qoed/design.hpp"
#include "qoed/error.hpp"

using namespace qoed;

namespace {

ExplorationConfig small_config() {
  ExplorationConfig cfg;
  cfg.horizon_seconds = 1.0;  // 20 steps
  cfg.max_rounds = 4;
  cfg.design_iterations = 3;
  cfg.design_samples = 16;
  cfg.bonus_samples = 16;
  cfg.belief_fim_samples = 48;
  cfg.eval_pairs = 6;
  return cfg;
}

CemConfig small_cem() {
  CemConfig cfg;
  cfg.iterations = 3;
  cfg.samples_per_iter = 128;
  cfg.rollouts_per_candidate = 4;
  return cfg;
}

std::vector<Eigen::VectorXd> constant_actions(int steps, const Eigen::VectorXd& a) {
  return std::vector<Eigen::VectorXd>(steps, a);
}

}  // namespace

TEST_CASE("objective kind names round-trip") {
  for (ObjectiveKind kind : {ObjectiveKind::kBoed, ObjectiveKind::kAgnostic,
                             ObjectiveKind::kQoed}) {
    CHECK(objective_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_WITH_AS(objective_kind_from_string("maximal"),
                       doctest::Contains("unknown-method"), Error);
}

TEST_CASE("evaluate_design: alpha = 0 reduces to the expected reward") {
  const LinearGaussian1D model(0.0);
  ExplorationConfig cfg = small_config();
  cfg.alpha = 0.0;
  const ParamBelief belief =
      make_belief(Eigen::VectorXd::Constant(2, 0.7),
                  1e-18 * Eigen::MatrixXd::Identity(2, 2));
  Eigen::VectorXd a(1);
  a << 0.5;
  const auto actions = constant_actions(cfg.h_steps(), a);

  double values[3];
  for (ObjectiveKind kind : {ObjectiveKind::kBoed, ObjectiveKind::kAgnostic,
                             ObjectiveKind::kQoed}) {
    Rng rng = make_rng(5);
    values[static_cast<int>(kind)] =
        evaluate_design(model, belief, actions, kind, cfg, 8, rng);
  }
  CHECK(values[0] == values[1]);
  CHECK(values[1] == values[2]);

  // deterministic rollout: reward equals the hand-computed state cost
  Eigen::VectorXd phi = model.clamp_phi(belief.mean);
  double expected = 0.0;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(1);
  for (int t = 0; t < cfg.h_steps(); ++t) {
    s = model.mean_map(s, a, phi);
    expected -= s.squaredNorm();
  }
  CHECK(values[0] == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("evaluate_design: resting noiseless system has zero bonus") {
  const LinearGaussian1D model(0.0);
  ExplorationConfig cfg = small_config();
  cfg.alpha = 1.0;
  const ParamBelief belief =
      make_belief(Eigen::VectorXd::Constant(2, 0.7),
                  1e-12 * Eigen::MatrixXd::Identity(2, 2));
  const auto actions = constant_actions(cfg.h_steps(), Eigen::VectorXd::Zero(1));
  for (ObjectiveKind kind : {ObjectiveKind::kBoed, ObjectiveKind::kAgnostic,
                             ObjectiveKind::kQoed}) {
    Rng rng = make_rng(7);
    CHECK(evaluate_design(model, belief, actions, kind, cfg, 8, rng) ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("evaluate_design: objective values sandwich per design") {
  const NuisanceCoupled model(0.15);
  const ParamBelief belief = default_belief(model);
  ExplorationConfig cfg = small_config();
  Rng action_rng = make_rng(11);
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Eigen::VectorXd> actions;
    for (int t = 0; t < cfg.h_steps(); ++t) {
      Eigen::VectorXd a(2);
      a << act(action_rng), act(action_rng);
      actions.push_back(a);
    }
    const std::uint64_t eval_seed = action_rng();
    const auto value = [&](ObjectiveKind kind) {
      Rng rng = make_rng(eval_seed);
      return evaluate_design(model, belief, actions, kind, cfg, 24, rng);
    };
    const double boed = value(ObjectiveKind::kBoed);
    const double agnostic = value(ObjectiveKind::kAgnostic);
    const double qoed = value(ObjectiveKind::kQoed);
    CHECK(qoed <= agnostic + 1e-9);
    CHECK(agnostic <= boed + 1e-9);
  }
}

TEST_CASE("objective ranking on the counterexample family") {
  const CounterexampleFamily fam = counterexample_family(0.1, 100.0);
  // BOED ranks B first, the agnostic restriction ranks A first.
  CHECK(boed_objective(fam.B) > boed_objective(fam.A));
  CHECK(agnostic_objective(fam.A, {0}) > agnostic_objective(fam.B, {0}));
}

TEST_CASE("optimize_design: bounds, determinism, and the horizon guard") {
  const LinearGaussian1D model(0.1);
  const ParamBelief belief = default_belief(model);
  ExplorationConfig cfg = small_config();
  const CemConfig cem = small_cem();

  Rng r1 = make_rng(13);
  const DesignCandidate d1 =
      optimize_design(model, belief, ObjectiveKind::kBoed, cem, cfg, r1);
  Rng r2 = make_rng(13);
  const DesignCandidate d2 =
      optimize_design(model, belief, ObjectiveKind::kBoed, cem, cfg, r2);
  CHECK(d1.objective_value == d2.objective_value);
  REQUIRE(d1.actions.size() == d2.actions.size());
  for (std::size_t t = 0; t < d1.actions.size(); ++t) {
    CHECK(d1.actions[t] == d2.actions[t]);
    CHECK(d1.actions[t](0) >= model.action_lo()(0));
    CHECK(d1.actions[t](0) <= model.action_hi()(0));
  }
  CHECK(d1.objective_kind == ObjectiveKind::kBoed);
  CHECK(std::isfinite(d1.objective_value));

  ExplorationConfig degenerate = cfg;
  degenerate.horizon_seconds = 0.01;  // rounds to zero steps
  Rng r3 = make_rng(13);
  CHECK_THROWS_WITH_AS(optimize_design(model, belief, ObjectiveKind::kBoed,
                                       cem, degenerate, r3),
                       doctest::Contains("empty-horizon"), Error);
}

TEST_CASE("dynamics_prediction_rmse: zero at the truth, positive off it") {
  TrueSystem truth;
  truth.model = std::make_shared<LinearGaussian1D>(0.1);
  truth.phi = Eigen::Vector2d(0.9, 0.2);
  truth.s0 = Eigen::VectorXd::Zero(1);
  Rng rng = make_rng(17);
  const EvalSet eval_set = make_eval_set(*truth.model, 8, 20, rng);
  CHECK(dynamics_prediction_rmse(truth, truth.phi, eval_set) ==
        doctest::Approx(0.0));
  CHECK(dynamics_prediction_rmse(truth, Eigen::Vector2d(0.7, 0.1), eval_set) >
        0.01);
}

TEST_CASE("make_eval_set is deterministic and respects action bounds") {
  const NuisanceCoupled model(0.15);
  Rng r1 = make_rng(19);
  Rng r2 = make_rng(19);
  const EvalSet a = make_eval_set(model, 5, 10, r1);
  const EvalSet b = make_eval_set(model, 5, 10, r2);
  REQUIRE(a.starts.size() == 5);
  for (std::size_t p = 0; p < a.starts.size(); ++p) {
    CHECK(a.starts[p] == b.starts[p]);
    for (std::size_t t = 0; t < a.action_seqs[p].size(); ++t) {
      CHECK(a.action_seqs[p][t] == b.action_seqs[p][t]);
      for (int i = 0; i < 2; ++i) {
        CHECK(a.action_seqs[p][t](i) >= model.action_lo()(i));
        CHECK(a.action_seqs[p][t](i) <= model.action_hi()(i));
      }
    }
  }
}

TEST_CASE("run_exploration: noiseless linear system terminates early") {
  TrueSystem truth;
  truth.model = std::make_shared<LinearGaussian1D>(0.0);  // noiseless executor
  truth.phi = Eigen::Vector2d(0.9, 0.2);
  truth.s0 = Eigen::VectorXd::Zero(1);
  const LinearGaussian1D belief_model(0.005);  // low-noise surrogate

  ExplorationConfig cfg = small_config();
  cfg.max_rounds = 8;
  CemConfig cem = small_cem();
  cem.iterations = 5;
  cem.samples_per_iter = 256;
  cem.rollouts_per_candidate = 8;
  Rng rng = make_rng(23);
  const ExplorationReport report = run_exploration(
      truth, belief_model, ObjectiveKind::kQoed, cfg, cem, rng);

  CHECK(report.terminated_early);
  CHECK(static_cast<int>(report.rounds.size()) < cfg.max_rounds);
  CHECK((report.phi_final - truth.phi).lpNorm<Eigen::Infinity>() <= 1e-2);
}

TEST_CASE("run_exploration: an uninformable direction pins the belief trace") {
  // the drag difference carries no information, so tr(Sigma) can never fall
  // below that direction's prior variance and the loop runs out the clock
  TrueSystem truth;
  truth.model = std::make_shared<NuisanceCoupled>(0.15);
  truth.phi = Eigen::Vector4d(0.8, 0.6, 0.25, -0.1);
  truth.s0 = Eigen::VectorXd::Zero(2);

  ExplorationConfig cfg = small_config();
  cfg.max_rounds = 3;
  const CemConfig cem = small_cem();
  Rng rng = make_rng(29);
  const ExplorationReport report = run_exploration(
      truth, *truth.model, ObjectiveKind::kQoed, cfg, cem, rng);

  CHECK(!report.terminated_early);
  CHECK(static_cast<int>(report.rounds.size()) == cfg.max_rounds);
  const ParamBelief prior = default_belief(*truth.model);
  const double null_var = prior.covariance(2, 2);  // isotropic drag prior
  CHECK(report.last().belief_trace >= null_var - 1e-9);
}

TEST_CASE("run_exploration: belief trace never increases across rounds") {
  TrueSystem truth;
  truth.model = std::make_shared<LinearGaussian1D>(0.1);
  truth.phi = Eigen::Vector2d(0.9, 0.2);
  truth.s0 = Eigen::VectorXd::Zero(1);
  ExplorationConfig cfg = small_config();
  cfg.delta_var = 0.0;  // never terminate early
  const CemConfig cem = small_cem();
  Rng rng = make_rng(31);
  const ExplorationReport report = run_exploration(
      truth, *truth.model, ObjectiveKind::kAgnostic, cfg, cem, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (const RoundRecord& r : report.rounds) {
    CHECK(r.belief_trace <= prev + 1e-10);
    prev = r.belief_trace;
  }
  CHECK(report.rounds.size() == static_cast<std::size_t>(cfg.max_rounds));
}

TEST_CASE("run_exploration: per-round records carry the objective sandwich") {
  TrueSystem truth;
  truth.model = std::make_shared<NuisanceCoupled>(0.15);
  truth.phi = Eigen::Vector4d(0.8, 0.6, 0.25, -0.1);
  truth.s0 = Eigen::VectorXd::Zero(2);
  ExplorationConfig cfg = small_config();
  cfg.max_rounds = 2;
  Rng rng = make_rng(37);
  const ExplorationReport report = run_exploration(
      truth, *truth.model, ObjectiveKind::kQoed, cfg, small_cem(), rng);
  for (const RoundRecord& r : report.rounds) {
    CHECK(r.qoed <= r.agnostic + 1e-9);
    CHECK(r.agnostic <= r.boed + 1e-9);
    CHECK(r.bonus == doctest::Approx(r.qoed));
    CHECK(r.rmse >= 0.0);
    if (!std::isnan(r.beta)) {
      CHECK(r.beta >= 0.0);
      CHECK(r.beta <= 1.0 + 1e-8);
    }
  }
}
