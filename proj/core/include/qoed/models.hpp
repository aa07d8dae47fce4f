#ifndef QOED_MODELS_HPP_
#define QOED_MODELS_HPP_

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "qoed/fisher.hpp"
#include "qoed/rng.hpp"

namespace qoed {

// Per-coordinate parameter description.
struct ParamSpec {
  std::string name;
  double lo;
  double hi;
};

// Alternating state/action record. states has one more entry than actions.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> actions;

  int steps() const { return static_cast<int>(actions.size()); }
};

// Parametric stochastic dynamics s' = f(s, a, phi) + w, w ~ N(0, sigma^2 I),
// with analytic parameter Jacobians so scores and per-step FIMs are exact.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  const std::string& name() const { return name_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int param_dim() const { return static_cast<int>(params_.size()); }
  double sigma() const { return sigma_; }
  const std::vector<ParamSpec>& param_specs() const { return params_; }
  const Eigen::VectorXd& action_lo() const { return action_lo_; }
  const Eigen::VectorXd& action_hi() const { return action_hi_; }

  Eigen::VectorXd param_lo() const;
  Eigen::VectorXd param_hi() const;
  Eigen::VectorXd param_center() const;

  // Replaces the parameter box, e.g. from a harness config. Intended for
  // setup only; models are immutable once in use.
  void override_param_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  bool phi_in_bounds(const Eigen::VectorXd& phi) const;
  Eigen::VectorXd clamp_phi(const Eigen::VectorXd& phi) const;
  Eigen::VectorXd clamp_action(const Eigen::VectorXd& a) const;

  // Mean map f(s, a, phi).
  virtual Eigen::VectorXd mean_map(const Eigen::VectorXd& s,
                                   const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& phi) const = 0;

  // J = df/dphi, state_dim x param_dim.
  virtual Eigen::MatrixXd param_jacobian(const Eigen::VectorXd& s,
                                         const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& phi) const = 0;

  // One transition draw. Errors: "phi-out-of-bounds".
  Eigen::VectorXd step_sample(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& phi, Rng& rng) const;

  // Exact Gaussian log-density of s_next. Errors: "phi-out-of-bounds",
  // "zero-noise" if sigma = 0.
  double step_loglik(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& phi,
                     const Eigen::VectorXd& s_next) const;

  // Analytic score J^T (s_next - f) / sigma^2. With sigma = 0 the score is
  // defined as zero for an exactly consistent transition and errors
  // ("zero-noise") otherwise.
  ScoreSample step_score(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& phi,
                         const Eigen::VectorXd& s_next) const;

  // Sequential sampling from s0 under a fixed action sequence.
  Trajectory simulate_trajectory(const Eigen::VectorXd& phi,
                                 const Eigen::VectorXd& s0,
                                 const std::vector<Eigen::VectorXd>& actions,
                                 Rng& rng) const;

  // Noiseless rollout of the mean map.
  Trajectory mean_rollout(const Eigen::VectorXd& phi, const Eigen::VectorXd& s0,
                          const std::vector<Eigen::VectorXd>& actions) const;

  // Sum of per-step scores / log-likelihoods over the trajectory.
  ScoreSample trajectory_score(const Trajectory& traj,
                               const Eigen::VectorXd& phi) const;
  double trajectory_loglik(const Trajectory& traj,
                           const Eigen::VectorXd& phi) const;

  // Per-step conditional FIM J^T J / sigma^2 (closed form).
  FisherMatrix closed_form_fim(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& phi) const;

  // Trajectory-level FIM oracle: expected sum of per-step closed-form FIMs
  // along the trajectory distribution (Monte-Carlo over visited states,
  // exact per step).
  FisherMatrix trajectory_closed_form_fim(
      const Eigen::VectorXd& phi, const Eigen::VectorXd& s0,
      const std::vector<Eigen::VectorXd>& actions, int rollouts, Rng& rng) const;

 protected:
  DynamicsModel(std::string name, int state_dim, int action_dim,
                std::vector<ParamSpec> params, double sigma,
                Eigen::VectorXd action_lo, Eigen::VectorXd action_hi);

  void check_dims(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                  const Eigen::VectorXd& phi) const;

 private:
  std::string name_;
  int state_dim_;
  int action_dim_;
  std::vector<ParamSpec> params_;
  double sigma_;
  Eigen::VectorXd action_lo_;
  Eigen::VectorXd action_hi_;
};

// s' = phi0 s + phi1 a + w. The reference identifiable system.
class LinearGaussian1D : public DynamicsModel {
 public:
  explicit LinearGaussian1D(double sigma = 0.1);
  Eigen::VectorXd mean_map(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& phi) const override;
  Eigen::MatrixXd param_jacobian(const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& phi) const override;
};

// Planar box push, state (position, velocity), action force. Parameters:
// mass and Coulomb friction coefficient, friction regularized by
// tanh(100 v) so scores stay smooth.
class Push2D : public DynamicsModel {
 public:
  explicit Push2D(double sigma = 0.05);
  Eigen::VectorXd mean_map(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& phi) const override;
  Eigen::MatrixXd param_jacobian(const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& phi) const override;

  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 9.81;
  static constexpr double kTanhSlope = 100.0;
};

// Four parameters (gain, input_gain, drag_a, drag_b). The two drag
// parameters enter only through their sum, so the difference direction
// carries exactly zero information, and the shared action channel couples
// the drag sum to input_gain (beta > 0). Action dimension 2 separates the
// confounded pair when excited.
class NuisanceCoupled : public DynamicsModel {
 public:
  explicit NuisanceCoupled(double sigma = 0.15);
  Eigen::VectorXd mean_map(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& phi) const override;
  Eigen::MatrixXd param_jacobian(const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& phi) const override;

  static constexpr double kCoupling = 0.18;   // drag sum on the a1 channel
  static constexpr double kSeparator = 0.3;   // drag sum on the a2 channel
  static constexpr double kDecay = 0.5;       // fixed s2 decay
};

// Model registry for the harness config ("linear_gaussian", "push2d",
// "nuisance_coupled"). Errors: "unknown-model".
std::shared_ptr<DynamicsModel> make_model(const std::string& name, double sigma);

// The two-design family from the non-quasi-optimality construction:
// F_A = diag(1 + delta, 0), F_B = diag(1, M).
struct CounterexampleFamily {
  FisherMatrix A;
  FisherMatrix B;
  double delta;
  double M;
};

CounterexampleFamily counterexample_family(double delta = 0.1, double M = 100.0);

}  // namespace qoed

#endif  // QOED_MODELS_HPP_
