#include "qoed/models.hpp"

#include <cmath>
#include <utility>

#include "qoed/error.hpp"

namespace qoed {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

DynamicsModel::DynamicsModel(std::string name, int state_dim, int action_dim,
                             std::vector<ParamSpec> params, double sigma,
                             Eigen::VectorXd action_lo, Eigen::VectorXd action_hi)
    : name_(std::move(name)),
      state_dim_(state_dim),
      action_dim_(action_dim),
      params_(std::move(params)),
      sigma_(sigma),
      action_lo_(std::move(action_lo)),
      action_hi_(std::move(action_hi)) {
  if (sigma_ < 0.0) {
    throw Error("bad-sigma", "noise scale must be nonnegative");
  }
}

Eigen::VectorXd DynamicsModel::param_lo() const {
  Eigen::VectorXd lo(param_dim());
  for (int i = 0; i < param_dim(); ++i) lo(i) = params_[i].lo;
  return lo;
}

Eigen::VectorXd DynamicsModel::param_hi() const {
  Eigen::VectorXd hi(param_dim());
  for (int i = 0; i < param_dim(); ++i) hi(i) = params_[i].hi;
  return hi;
}

Eigen::VectorXd DynamicsModel::param_center() const {
  return 0.5 * (param_lo() + param_hi());
}

void DynamicsModel::override_param_bounds(const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi) {
  if (lo.size() != param_dim() || hi.size() != param_dim()) {
    throw Error("dim-mismatch", "bound overrides have the wrong dimension");
  }
  for (int i = 0; i < param_dim(); ++i) {
    if (!(lo(i) < hi(i))) {
      throw Error("bad-bounds", "each bound must satisfy lo < hi");
    }
    params_[i].lo = lo(i);
    params_[i].hi = hi(i);
  }
}

bool DynamicsModel::phi_in_bounds(const Eigen::VectorXd& phi) const {
  if (phi.size() != param_dim()) return false;
  for (int i = 0; i < param_dim(); ++i) {
    if (phi(i) < params_[i].lo || phi(i) > params_[i].hi) return false;
  }
  return true;
}

Eigen::VectorXd DynamicsModel::clamp_phi(const Eigen::VectorXd& phi) const {
  Eigen::VectorXd out = phi;
  for (int i = 0; i < param_dim(); ++i) {
    out(i) = std::min(std::max(out(i), params_[i].lo), params_[i].hi);
  }
  return out;
}

Eigen::VectorXd DynamicsModel::clamp_action(const Eigen::VectorXd& a) const {
  Eigen::VectorXd out = a;
  for (int i = 0; i < action_dim_; ++i) {
    out(i) = std::min(std::max(out(i), action_lo_(i)), action_hi_(i));
  }
  return out;
}

void DynamicsModel::check_dims(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& phi) const {
  if (s.size() != state_dim_ || a.size() != action_dim_ ||
      phi.size() != param_dim()) {
    throw Error("dim-mismatch", "state/action/parameter dimensions do not match");
  }
}

Eigen::VectorXd DynamicsModel::step_sample(const Eigen::VectorXd& s,
                                           const Eigen::VectorXd& a,
                                           const Eigen::VectorXd& phi,
                                           Rng& rng) const {
  check_dims(s, a, phi);
  if (!phi_in_bounds(phi)) {
    throw Error("phi-out-of-bounds", "parameters outside the model box");
  }
  Eigen::VectorXd next = mean_map(s, a, phi);
  if (sigma_ > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma_);
    for (int i = 0; i < state_dim_; ++i) next(i) += normal(rng);
  }
  return next;
}

double DynamicsModel::step_loglik(const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& phi,
                                  const Eigen::VectorXd& s_next) const {
  check_dims(s, a, phi);
  if (!phi_in_bounds(phi)) {
    throw Error("phi-out-of-bounds", "parameters outside the model box");
  }
  if (sigma_ == 0.0) {
    throw Error("zero-noise", "log-likelihood is degenerate at sigma = 0");
  }
  const Eigen::VectorXd resid = s_next - mean_map(s, a, phi);
  const double var = sigma_ * sigma_;
  return -0.5 * state_dim_ * (kLog2Pi + std::log(var)) -
         0.5 * resid.squaredNorm() / var;
}

ScoreSample DynamicsModel::step_score(const Eigen::VectorXd& s,
                                      const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& phi,
                                      const Eigen::VectorXd& s_next) const {
  check_dims(s, a, phi);
  if (!phi_in_bounds(phi)) {
    throw Error("phi-out-of-bounds", "parameters outside the model box");
  }
  const Eigen::VectorXd resid = s_next - mean_map(s, a, phi);
  if (sigma_ == 0.0) {
    if (resid.lpNorm<Eigen::Infinity>() > 1e-12) {
      throw Error("zero-noise", "inconsistent transition under sigma = 0");
    }
    return Eigen::VectorXd::Zero(param_dim());
  }
  return param_jacobian(s, a, phi).transpose() * resid / (sigma_ * sigma_);
}

Trajectory DynamicsModel::simulate_trajectory(
    const Eigen::VectorXd& phi, const Eigen::VectorXd& s0,
    const std::vector<Eigen::VectorXd>& actions, Rng& rng) const {
  Trajectory traj;
  traj.states.reserve(actions.size() + 1);
  traj.actions = actions;
  traj.states.push_back(s0);
  Eigen::VectorXd s = s0;
  for (const Eigen::VectorXd& a : actions) {
    s = step_sample(s, a, phi, rng);
    traj.states.push_back(s);
  }
  return traj;
}

Trajectory DynamicsModel::mean_rollout(
    const Eigen::VectorXd& phi, const Eigen::VectorXd& s0,
    const std::vector<Eigen::VectorXd>& actions) const {
  Trajectory traj;
  traj.states.reserve(actions.size() + 1);
  traj.actions = actions;
  traj.states.push_back(s0);
  Eigen::VectorXd s = s0;
  for (const Eigen::VectorXd& a : actions) {
    s = mean_map(s, a, phi);
    traj.states.push_back(s);
  }
  return traj;
}

ScoreSample DynamicsModel::trajectory_score(const Trajectory& traj,
                                            const Eigen::VectorXd& phi) const {
  ScoreSample total = Eigen::VectorXd::Zero(param_dim());
  for (int t = 0; t < traj.steps(); ++t) {
    total += step_score(traj.states[t], traj.actions[t], phi, traj.states[t + 1]);
  }
  return total;
}

double DynamicsModel::trajectory_loglik(const Trajectory& traj,
                                        const Eigen::VectorXd& phi) const {
  double total = 0.0;
  for (int t = 0; t < traj.steps(); ++t) {
    total += step_loglik(traj.states[t], traj.actions[t], phi, traj.states[t + 1]);
  }
  return total;
}

FisherMatrix DynamicsModel::closed_form_fim(const Eigen::VectorXd& s,
                                            const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& phi) const {
  check_dims(s, a, phi);
  if (!phi_in_bounds(phi)) {
    throw Error("phi-out-of-bounds", "parameters outside the model box");
  }
  if (sigma_ == 0.0) {
    throw Error("zero-noise", "conditional FIM is unbounded at sigma = 0");
  }
  const Eigen::MatrixXd J = param_jacobian(s, a, phi);
  return FisherMatrix(J.transpose() * J / (sigma_ * sigma_), 0);
}

FisherMatrix DynamicsModel::trajectory_closed_form_fim(
    const Eigen::VectorXd& phi, const Eigen::VectorXd& s0,
    const std::vector<Eigen::VectorXd>& actions, int rollouts, Rng& rng) const {
  if (rollouts < 1) {
    throw Error("bad-rollouts", "need at least one rollout");
  }
  const int m = param_dim();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  for (int r = 0; r < rollouts; ++r) {
    const Trajectory traj = simulate_trajectory(phi, s0, actions, rng);
    for (int t = 0; t < traj.steps(); ++t) {
      sum += closed_form_fim(traj.states[t], traj.actions[t], phi).matrix();
    }
  }
  return FisherMatrix(sum / rollouts, 0);
}

// ---------------------------------------------------------------------------
// LinearGaussian1D

LinearGaussian1D::LinearGaussian1D(double sigma)
    : DynamicsModel("linear_gaussian", 1, 1,
                    {{"gain", 0.4, 0.95}, {"input_gain", -0.2, 0.6}}, sigma,
                    Eigen::VectorXd::Constant(1, -1.0),
                    Eigen::VectorXd::Constant(1, 1.0)) {}

Eigen::VectorXd LinearGaussian1D::mean_map(const Eigen::VectorXd& s,
                                           const Eigen::VectorXd& a,
                                           const Eigen::VectorXd& phi) const {
  Eigen::VectorXd out(1);
  out(0) = phi(0) * s(0) + phi(1) * a(0);
  return out;
}

Eigen::MatrixXd LinearGaussian1D::param_jacobian(const Eigen::VectorXd& s,
                                                 const Eigen::VectorXd& a,
                                                 const Eigen::VectorXd&) const {
  Eigen::MatrixXd J(1, 2);
  J << s(0), a(0);
  return J;
}

// ---------------------------------------------------------------------------
// Push2D

Push2D::Push2D(double sigma)
    : DynamicsModel("push2d", 2, 1,
                    {{"mass", 0.3, 3.0}, {"friction", 0.05, 1.0}}, sigma,
                    Eigen::VectorXd::Constant(1, -10.0),
                    Eigen::VectorXd::Constant(1, 10.0)) {}

Eigen::VectorXd Push2D::mean_map(const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& phi) const {
  const double v = s(1);
  const double mass = phi(0);
  const double friction = phi(1);
  const double accel =
      a(0) / mass - friction * kGravity * std::tanh(kTanhSlope * v);
  Eigen::VectorXd out(2);
  out(0) = s(0) + kDt * v;
  out(1) = v + kDt * accel;
  return out;
}

Eigen::MatrixXd Push2D::param_jacobian(const Eigen::VectorXd& s,
                                       const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& phi) const {
  const double v = s(1);
  const double mass = phi(0);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2, 2);
  J(1, 0) = -kDt * a(0) / (mass * mass);
  J(1, 1) = -kDt * kGravity * std::tanh(kTanhSlope * v);
  return J;
}

// ---------------------------------------------------------------------------
// NuisanceCoupled

NuisanceCoupled::NuisanceCoupled(double sigma)
    : DynamicsModel("nuisance_coupled", 2, 2,
                    {{"gain", 0.3, 0.95},
                     {"input_gain", 0.2, 1.2},
                     {"drag_a", -0.6, 0.6},
                     {"drag_b", -0.6, 0.6}},
                    sigma, Eigen::VectorXd::Constant(2, -1.0),
                    Eigen::VectorXd::Constant(2, 1.0)) {}

Eigen::VectorXd NuisanceCoupled::mean_map(const Eigen::VectorXd& s,
                                          const Eigen::VectorXd& a,
                                          const Eigen::VectorXd& phi) const {
  const double drag_sum = phi(2) + phi(3);
  Eigen::VectorXd out(2);
  // Saturated feedback keeps every rollout in the parameter box bounded and
  // the score norm bounded with it.
  out(0) = phi(0) * std::tanh(s(0)) + phi(1) * a(0) + kCoupling * drag_sum * a(0);
  out(1) = kDecay * s(1) + kSeparator * drag_sum * a(1);
  return out;
}

Eigen::MatrixXd NuisanceCoupled::param_jacobian(const Eigen::VectorXd& s,
                                                const Eigen::VectorXd& a,
                                                const Eigen::VectorXd&) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2, 4);
  J(0, 0) = std::tanh(s(0));
  J(0, 1) = a(0);
  // Identical columns: the drag parameters act only through their sum.
  J(0, 2) = kCoupling * a(0);
  J(1, 2) = kSeparator * a(1);
  J(0, 3) = J(0, 2);
  J(1, 3) = J(1, 2);
  return J;
}

// ---------------------------------------------------------------------------

std::shared_ptr<DynamicsModel> make_model(const std::string& name, double sigma) {
  if (name == "linear_gaussian") return std::make_shared<LinearGaussian1D>(sigma);
  if (name == "push2d") return std::make_shared<Push2D>(sigma);
  if (name == "nuisance_coupled") return std::make_shared<NuisanceCoupled>(sigma);
  throw Error("unknown-model", "no model named '" + name + "'");
}

CounterexampleFamily counterexample_family(double delta, double M) {
  if (!(delta > 0.0) || !(M > delta)) {
    throw Error("bad-counterexample", "requires delta > 0 and M > delta");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1.0 + delta;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = M;
  return CounterexampleFamily{FisherMatrix(a, 0), FisherMatrix(b, 0), delta, M};
}

}  // namespace qoed
