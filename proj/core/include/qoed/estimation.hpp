#ifndef QOED_ESTIMATION_HPP_
#define QOED_ESTIMATION_HPP_

#include <Eigen/Dense>
#include <vector>

#include "qoed/fisher.hpp"
#include "qoed/models.hpp"
#include "qoed/rng.hpp"

namespace qoed {

// Gaussian belief over the hidden parameters. Covariance is kept symmetric
// with eigenvalues floored at 1e-12.
struct ParamBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

ParamBelief make_belief(const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& covariance);

// Belief spread out over the model's parameter box: mean at the box center,
// std (hi - lo) / 4 per coordinate.
ParamBelief default_belief(const DynamicsModel& model);

struct CemConfig {
  int iterations = 5;
  int samples_per_iter = 2048;
  double elite_fraction = 0.1;
  double variance_floor = 1e-8;
  int rollouts_per_candidate = 8;  // inner expectation of the match objective
};

// Elite count implied by the config; errors ("bad-cem-config") if below 2.
int cem_elite_count(const CemConfig& cfg);

struct CemResult {
  Eigen::VectorXd estimate;
  std::vector<double> best_objective;  // best candidate value per iteration
};

// Derivative-free estimate of phi by matching rollouts to an observed
// trajectory: sample candidates from the running Gaussian (clamped to the
// parameter box), score each by mean squared trajectory deviation under
// common random numbers, refit to the elites. Deterministic given the seed.
//
// Errors: "empty-trajectory" without a transition, "bad-prior" on a
// non-PD belief covariance, "collapsed-search" if the search degenerates
// (no finite-objective candidates).
CemResult cem_estimate(const DynamicsModel& model, const Trajectory& observed,
                       const ParamBelief& belief, const CemConfig& cfg, Rng& rng);

// Information-form covariance update: Sigma <- (F + Sigma^-1)^-1, symmetrized.
// The mean is left to the caller. Errors: "bad-prior" when the prior
// covariance is not positive definite.
ParamBelief belief_update(const ParamBelief& belief, const FisherMatrix& fim);

inline double belief_trace(const ParamBelief& belief) {
  return belief.covariance.trace();
}

}  // namespace qoed

#endif  // QOED_ESTIMATION_HPP_
