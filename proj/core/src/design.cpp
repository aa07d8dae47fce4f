#include "qoed/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qoed/error.hpp"

namespace qoed {

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kBoed:
      return "boed";
    case ObjectiveKind::kAgnostic:
      return "agnostic";
    case ObjectiveKind::kQoed:
      return "qoed";
  }
  return "unknown";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "boed") return ObjectiveKind::kBoed;
  if (name == "agnostic") return ObjectiveKind::kAgnostic;
  if (name == "qoed") return ObjectiveKind::kQoed;
  throw Error("unknown-method", "no objective named '" + name + "'");
}

EvalSet make_eval_set(const DynamicsModel& model, int pairs, int steps,
                      Rng& rng) {
  EvalSet set;
  std::normal_distribution<double> normal(0.0, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd s0(model.state_dim());
    for (int i = 0; i < model.state_dim(); ++i) s0(i) = normal(rng);
    std::vector<Eigen::VectorXd> actions(steps);
    for (int t = 0; t < steps; ++t) {
      Eigen::VectorXd a(model.action_dim());
      for (int i = 0; i < model.action_dim(); ++i) {
        a(i) = model.action_lo()(i) +
               unit(rng) * (model.action_hi()(i) - model.action_lo()(i));
      }
      actions[t] = a;
    }
    set.starts.push_back(s0);
    set.action_seqs.push_back(std::move(actions));
  }
  return set;
}

namespace {

// Bonus of one FIM under an objective kind, running the selection pipeline
// for the coordinate-restricted kinds.
double bonus_from_fim(const FisherMatrix& fim, ObjectiveKind kind,
                      const BonusConfig& thresholds) {
  if (kind == ObjectiveKind::kBoed) return boed_objective(fim);
  const EigenDecomp decomp = eigendecompose(fim);
  const EigenSplit split =
      split_observable(decomp, thresholds.delta_eig, thresholds.alpha_eig);
  const int n = static_cast<int>(split.observable_idx.size());
  if (n == 0) return 0.0;
  const int budget =
      thresholds.budget < 0 ? n : std::min(thresholds.budget, n);
  const SelectionResult sel = select_identifiable(
      split.W_o, budget, thresholds.delta_cos, thresholds.eps_logdet);
  if (kind == ObjectiveKind::kAgnostic) {
    return agnostic_objective(fim, sel.k);
  }
  return qoed_objective(fim, sel.k, thresholds.eps);
}

}  // namespace

double evaluate_design(const DynamicsModel& model, const ParamBelief& belief,
                       const std::vector<Eigen::VectorXd>& actions,
                       ObjectiveKind kind, const ExplorationConfig& cfg,
                       int n_mc, Rng& rng) {
  if (actions.empty()) {
    throw Error("empty-horizon", "design has no actions");
  }
  if (n_mc < 1) {
    throw Error("bad-samples", "need at least one Monte-Carlo trajectory");
  }
  const Eigen::VectorXd s0 = Eigen::VectorXd::Zero(model.state_dim());
  const Eigen::VectorXd phi_mean = model.clamp_phi(belief.mean);

  Eigen::LLT<Eigen::MatrixXd> llt(belief.covariance);
  if (llt.info() != Eigen::Success) {
    throw Error("bad-prior", "belief covariance is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);

  double reward_sum = 0.0;
  std::vector<ScoreSample> scores;
  scores.reserve(n_mc);
  for (int mc = 0; mc < n_mc; ++mc) {
    Eigen::VectorXd z(model.param_dim());
    for (int j = 0; j < model.param_dim(); ++j) z(j) = normal(rng);
    const Eigen::VectorXd phi = model.clamp_phi(belief.mean + L * z);

    const Trajectory traj = model.simulate_trajectory(phi, s0, actions, rng);
    double discount = 1.0;
    for (int t = 0; t < traj.steps(); ++t) {
      reward_sum += discount * (-traj.states[t + 1].squaredNorm());
      discount *= cfg.gamma;
    }
    // Scores and the trajectories they are taken on use one parameter
    // value, as in the trajectory-sampling form of the information matrix;
    // the flag switches that value from the belief mean to the per-sample
    // draw (averaging the information over the belief).
    if (cfg.average_bonus_over_belief) {
      scores.push_back(model.trajectory_score(traj, phi));
    } else {
      const Trajectory mean_traj =
          model.simulate_trajectory(phi_mean, s0, actions, rng);
      scores.push_back(model.trajectory_score(mean_traj, phi_mean));
    }
  }

  const FisherMatrix fim = estimate_fim(scores);
  const double bonus = bonus_from_fim(fim, kind, cfg.thresholds);
  return reward_sum / n_mc + cfg.alpha * bonus;
}

DesignCandidate optimize_design(const DynamicsModel& model,
                                const ParamBelief& belief, ObjectiveKind kind,
                                const CemConfig& cem_cfg,
                                const ExplorationConfig& cfg, Rng& rng) {
  const int steps = cfg.h_steps();
  if (steps < 1) {
    throw Error("empty-horizon", "horizon rounds to zero steps");
  }
  const int da = model.action_dim();
  const int dim = steps * da;
  const int n_samples = std::max(4, cfg.design_samples);
  const int elites = std::max(2, static_cast<int>(std::floor(
                                     cfg.design_elite_fraction * n_samples)));

  // One evaluation seed shared by every candidate in every iteration:
  // common random numbers make the CEM ranking paired and the best value
  // monotone.
  const std::uint64_t eval_seed = rng();
  const auto evaluate = [&](const std::vector<Eigen::VectorXd>& actions) {
    Rng eval_rng = make_rng(eval_seed);
    return evaluate_design(model, belief, actions, kind, cfg,
                           cfg.bonus_samples, eval_rng);
  };

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd stddev(dim);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < da; ++i) {
      stddev(t * da + i) = cfg.design_init_std_frac * 0.5 *
                           (model.action_hi()(i) - model.action_lo()(i));
    }
  }

  const auto unflatten = [&](const Eigen::VectorXd& flat) {
    std::vector<Eigen::VectorXd> actions(steps);
    for (int t = 0; t < steps; ++t) {
      actions[t] = model.clamp_action(flat.segment(t * da, da));
    }
    return actions;
  };

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> flats(n_samples);
  std::vector<double> values(n_samples);
  std::vector<int> order(n_samples);

  Eigen::VectorXd best_flat = mean;
  double best_value = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.design_iterations; ++iter) {
    for (int i = 0; i < n_samples; ++i) {
      if (iter > 0 && i == 0) {
        flats[i] = best_flat;
      } else {
        Eigen::VectorXd flat(dim);
        for (int j = 0; j < dim; ++j) flat(j) = mean(j) + stddev(j) * normal(rng);
        flats[i] = flat;
      }
      values[i] = evaluate(unflatten(flats[i]));
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (values[a] != values[b]) return values[a] > values[b];
      return a < b;
    });
    if (values[order[0]] > best_value) {
      best_value = values[order[0]];
      best_flat = flats[order[0]];
    }

    Eigen::VectorXd elite_mean = Eigen::VectorXd::Zero(dim);
    for (int e = 0; e < elites; ++e) elite_mean += flats[order[e]];
    elite_mean /= elites;
    Eigen::VectorXd elite_var = Eigen::VectorXd::Zero(dim);
    for (int e = 0; e < elites; ++e) {
      elite_var += (flats[order[e]] - elite_mean).cwiseAbs2();
    }
    elite_var = elite_var / elites +
                Eigen::VectorXd::Constant(dim, cem_cfg.variance_floor);
    mean = elite_mean;
    stddev = elite_var.cwiseSqrt();
  }

  DesignCandidate out;
  out.actions = unflatten(best_flat);
  out.objective_value = best_value;
  out.objective_kind = kind;
  return out;
}

double dynamics_prediction_rmse(const TrueSystem& truth,
                                const Eigen::VectorXd& phi_hat,
                                const EvalSet& eval_set) {
  const DynamicsModel& model = *truth.model;
  const Eigen::VectorXd phi_fit = model.clamp_phi(phi_hat);
  double sq_sum = 0.0;
  long count = 0;
  for (std::size_t p = 0; p < eval_set.starts.size(); ++p) {
    const Trajectory ref =
        model.mean_rollout(truth.phi, eval_set.starts[p], eval_set.action_seqs[p]);
    const Trajectory fit =
        model.mean_rollout(phi_fit, eval_set.starts[p], eval_set.action_seqs[p]);
    for (int t = 1; t < static_cast<int>(ref.states.size()); ++t) {
      sq_sum += (ref.states[t] - fit.states[t]).squaredNorm();
      count += model.state_dim();
    }
  }
  if (count == 0) {
    throw Error("empty-eval-set", "no evaluation pairs");
  }
  return std::sqrt(sq_sum / count);
}

ExplorationReport run_exploration(const TrueSystem& truth,
                                  const DynamicsModel& belief_model,
                                  ObjectiveKind kind,
                                  const ExplorationConfig& expl_cfg,
                                  const CemConfig& cem_cfg, Rng& rng) {
  if (expl_cfg.max_rounds < 1) {
    throw Error("bad-config", "max_rounds must be positive");
  }
  if (!(expl_cfg.gamma > 0.0) || expl_cfg.gamma > 1.0) {
    throw Error("bad-config", "gamma must lie in (0, 1]");
  }
  ExplorationReport report;
  report.kind = kind;

  ParamBelief belief = default_belief(belief_model);
  Rng eval_rng = split_rng(rng);
  const EvalSet eval_set = make_eval_set(belief_model, expl_cfg.eval_pairs,
                                         expl_cfg.h_steps(), eval_rng);
  const Eigen::VectorXd s0 = truth.s0.size() > 0
                                 ? truth.s0
                                 : Eigen::VectorXd::Zero(truth.model->state_dim());

  for (int round = 0; round < expl_cfg.max_rounds; ++round) {
    const DesignCandidate design =
        optimize_design(belief_model, belief, kind, cem_cfg, expl_cfg, rng);

    const Trajectory observed =
        truth.model->simulate_trajectory(truth.phi, s0, design.actions, rng);

    const CemResult est =
        cem_estimate(belief_model, observed, belief, cem_cfg, rng);
    const Eigen::VectorXd phi_hat = est.estimate;

    // Information carried by the executed design, evaluated at the new
    // estimate; this plays the role of the measurement update.
    std::vector<ScoreSample> scores;
    scores.reserve(expl_cfg.belief_fim_samples);
    for (int i = 0; i < expl_cfg.belief_fim_samples; ++i) {
      const Trajectory traj =
          belief_model.simulate_trajectory(phi_hat, s0, design.actions, rng);
      scores.push_back(belief_model.trajectory_score(traj, phi_hat));
    }
    const FisherMatrix fim = estimate_fim(scores);

    belief.mean = phi_hat;
    belief = belief_update(belief, fim);

    RoundRecord rec;
    rec.round = round;
    rec.phi_hat = phi_hat;
    rec.belief_trace = belief_trace(belief);
    rec.design_objective = design.objective_value;
    rec.boed = boed_objective(fim);

    const EigenDecomp decomp = eigendecompose(fim);
    const EigenSplit split =
        split_observable(decomp, expl_cfg.thresholds.delta_eig,
                         expl_cfg.thresholds.alpha_eig);
    if (!split.observable_idx.empty()) {
      const int n = static_cast<int>(split.observable_idx.size());
      const int budget = expl_cfg.thresholds.budget < 0
                             ? n
                             : std::min(expl_cfg.thresholds.budget, n);
      const SelectionResult sel =
          select_identifiable(split.W_o, budget, expl_cfg.thresholds.delta_cos,
                              expl_cfg.thresholds.eps_logdet);
      rec.selected_k = sel.k;
      rec.agnostic = agnostic_objective(fim, sel.k);
      rec.qoed = qoed_objective(fim, sel.k, expl_cfg.thresholds.eps);
      if (!sel.k.empty() &&
          static_cast<int>(sel.k.size()) < belief_model.param_dim()) {
        try {
          const QuasiOptConstants c = quasiopt_constants(fim, sel.k);
          rec.eta = c.eta;
          rec.beta = c.beta;
          rec.rho = c.rho;
        } catch (const Error&) {
          // degenerate critical block: leave the constants as NaN
        }
      }
    }
    switch (kind) {
      case ObjectiveKind::kBoed:
        rec.bonus = rec.boed;
        break;
      case ObjectiveKind::kAgnostic:
        rec.bonus = rec.agnostic;
        break;
      case ObjectiveKind::kQoed:
        rec.bonus = rec.qoed;
        break;
    }

    rec.rmse = dynamics_prediction_rmse(truth, phi_hat, eval_set);
    rec.param_rmse = std::sqrt((phi_hat - truth.phi).squaredNorm() /
                               truth.phi.size());
    report.rounds.push_back(rec);

    if (rec.belief_trace < expl_cfg.delta_var && rec.rmse < expl_cfg.delta_dyn) {
      report.terminated_early = true;
      break;
    }
  }

  report.phi_final = report.rounds.back().phi_hat;
  return report;
}

}  // namespace qoed
