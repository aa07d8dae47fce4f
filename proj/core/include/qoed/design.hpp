#ifndef QOED_DESIGN_HPP_
#define QOED_DESIGN_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "qoed/estimation.hpp"
#include "qoed/models.hpp"
#include "qoed/objectives.hpp"

namespace qoed {

enum class ObjectiveKind { kBoed, kAgnostic, kQoed };

const char* to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);

// Open-loop action sequence with its evaluated objective.
struct DesignCandidate {
  std::vector<Eigen::VectorXd> actions;
  double objective_value = 0.0;
  ObjectiveKind objective_kind = ObjectiveKind::kQoed;
};

// Knobs of the exploration loop. alpha, horizon, delta_var and delta_dyn
// follow the published defaults; the Monte-Carlo budgets are desk-scale
// plumbing and deliberately configurable.
struct ExplorationConfig {
  double alpha = 1.0;
  double horizon_seconds = 2.0;
  double dt = 0.05;
  double gamma = 1.0;
  double delta_var = 0.0025;  // 0.05^2
  double delta_dyn = 1.0;
  int max_rounds = 10;

  int design_iterations = 8;  // CEM budget for the design search
  int design_samples = 64;
  double design_elite_fraction = 0.2;
  double design_init_std_frac = 0.3;  // initial std as a fraction of half-range
  int bonus_samples = 64;        // trajectories per bonus evaluation
  int belief_fim_samples = 256;  // trajectories for the belief-update FIM
  int eval_pairs = 16;           // held-out pairs for prediction RMSE
  bool average_bonus_over_belief = false;  // default: scores at belief mean

  BonusConfig thresholds;

  int h_steps() const {
    return static_cast<int>(std::llround(horizon_seconds / dt));
  }
};

// Held-out (s0, action sequence) pairs for dynamics-prediction error.
struct EvalSet {
  std::vector<Eigen::VectorXd> starts;
  std::vector<std::vector<Eigen::VectorXd>> action_seqs;
};

EvalSet make_eval_set(const DynamicsModel& model, int pairs, int steps, Rng& rng);

// Simulator with its hidden parameters.
struct TrueSystem {
  std::shared_ptr<const DynamicsModel> model;
  Eigen::VectorXd phi;
  Eigen::VectorXd s0;
};

struct RoundRecord {
  int round = 0;
  Eigen::VectorXd phi_hat;
  double belief_trace = 0.0;
  double bonus = 0.0;
  double boed = 0.0;
  double agnostic = 0.0;
  double qoed = 0.0;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double rmse = 0.0;  // raw; reports carry rmse * 100
  double param_rmse = 0.0;
  double design_objective = 0.0;
  std::vector<int> selected_k;

  double rmse_x100() const { return 100.0 * rmse; }
  double param_rmse_x100() const { return 100.0 * param_rmse; }
};

struct ExplorationReport {
  ObjectiveKind kind = ObjectiveKind::kQoed;
  std::vector<RoundRecord> rounds;
  Eigen::VectorXd phi_final;
  bool terminated_early = false;

  const RoundRecord& last() const { return rounds.back(); }
};

// Expected discounted reward plus alpha * information bonus of an open-loop
// design: Monte-Carlo over phi ~ belief and rollout noise, reward
// -||s||^2 per step, bonus computed once from the pooled trajectory scores
// (at the belief mean unless cfg.average_bonus_over_belief). Deterministic
// given the generator state.
double evaluate_design(const DynamicsModel& model, const ParamBelief& belief,
                       const std::vector<Eigen::VectorXd>& actions,
                       ObjectiveKind kind, const ExplorationConfig& cfg,
                       int n_mc, Rng& rng);

// CEM over the flattened action sequence maximizing evaluate_design under
// common random numbers. Budget comes from cfg.design_*; elite fraction and
// variance floor from cem_cfg. Errors: "empty-horizon" when h_steps() < 1.
DesignCandidate optimize_design(const DynamicsModel& model,
                                const ParamBelief& belief, ObjectiveKind kind,
                                const CemConfig& cem_cfg,
                                const ExplorationConfig& cfg, Rng& rng);

// Per-entry RMSE between noiseless rollouts of the true system and of
// phi_hat over a held-out evaluation set.
double dynamics_prediction_rmse(const TrueSystem& truth,
                                const Eigen::VectorXd& phi_hat,
                                const EvalSet& eval_set);

// The explore / estimate / update loop: optimize a design under the current
// belief, execute it on the hidden-parameter simulator, re-estimate phi,
// fold the design's FIM into the belief, and stop when tr(Sigma) < delta_var
// and the prediction RMSE < delta_dyn (or at max_rounds).
ExplorationReport run_exploration(const TrueSystem& truth,
                                  const DynamicsModel& belief_model,
                                  ObjectiveKind kind,
                                  const ExplorationConfig& expl_cfg,
                                  const CemConfig& cem_cfg, Rng& rng);

}  // namespace qoed

#endif  // QOED_DESIGN_HPP_
