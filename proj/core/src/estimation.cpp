#include "qoed/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qoed/error.hpp"

namespace qoed {

namespace {

Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& cov, double floor) {
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

ParamBelief make_belief(const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols() ||
      covariance.rows() != mean.size()) {
    throw Error("dim-mismatch", "belief mean/covariance dimensions disagree");
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw Error("non-finite", "belief has NaN/Inf entries");
  }
  return ParamBelief{mean, floor_eigenvalues(covariance, 1e-12)};
}

ParamBelief default_belief(const DynamicsModel& model) {
  const Eigen::VectorXd lo = model.param_lo();
  const Eigen::VectorXd hi = model.param_hi();
  const Eigen::VectorXd std = 0.25 * (hi - lo);
  return make_belief(model.param_center(),
                     std.cwiseProduct(std).asDiagonal());
}

int cem_elite_count(const CemConfig& cfg) {
  if (cfg.iterations < 1 || cfg.samples_per_iter < 2 ||
      !(cfg.elite_fraction > 0.0) || cfg.elite_fraction >= 1.0 ||
      !(cfg.variance_floor > 0.0) || cfg.rollouts_per_candidate < 1) {
    throw Error("bad-cem-config", "CEM configuration out of range");
  }
  const int elites = static_cast<int>(
      std::floor(cfg.elite_fraction * cfg.samples_per_iter));
  if (elites < 2) {
    throw Error("bad-cem-config", "elite count must be at least 2");
  }
  return elites;
}

CemResult cem_estimate(const DynamicsModel& model, const Trajectory& observed,
                       const ParamBelief& belief, const CemConfig& cfg,
                       Rng& rng) {
  if (observed.steps() < 1) {
    throw Error("empty-trajectory", "need at least one observed transition");
  }
  const int elites = cem_elite_count(cfg);
  const int m = model.param_dim();
  const int T = observed.steps();
  const int d = model.state_dim();
  const int R = cfg.rollouts_per_candidate;

  // Common random numbers: one fixed noise block reused by every candidate
  // in every iteration, so candidate comparisons are paired and the best
  // objective is monotone.
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> noise(R, Eigen::MatrixXd(d, T));
  for (int r = 0; r < R; ++r) {
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < d; ++i) noise[r](i, t) = normal(rng);
    }
  }

  const double sigma = model.sigma();
  const auto objective = [&](const Eigen::VectorXd& phi) {
    double total = 0.0;
    for (int r = 0; r < R; ++r) {
      Eigen::VectorXd s = observed.states[0];
      for (int t = 0; t < T; ++t) {
        s = model.mean_map(s, observed.actions[t], phi);
        if (sigma > 0.0) s += sigma * noise[r].col(t);
        total += (observed.states[t + 1] - s).squaredNorm();
      }
    }
    return total / R;
  };

  Eigen::VectorXd mean = model.clamp_phi(belief.mean);
  Eigen::MatrixXd cov = belief.covariance;
  {
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error("bad-prior", "belief covariance is not positive definite");
    }
  }

  CemResult result;
  std::vector<Eigen::VectorXd> samples(cfg.samples_per_iter);
  std::vector<double> values(cfg.samples_per_iter);
  std::vector<int> order(cfg.samples_per_iter);
  Eigen::VectorXd best_phi;
  double best_value = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error("collapsed-search", "search covariance lost definiteness");
    }
    const Eigen::MatrixXd L = llt.matrixL();

    for (int i = 0; i < cfg.samples_per_iter; ++i) {
      if (iter > 0 && i == 0) {
        samples[i] = best_phi;  // keep the incumbent in the pool
      } else {
        Eigen::VectorXd z(m);
        for (int j = 0; j < m; ++j) z(j) = normal(rng);
        samples[i] = model.clamp_phi(mean + L * z);
      }
      values[i] = objective(samples[i]);
    }

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (values[a] != values[b]) return values[a] < values[b];
      return a < b;
    });
    if (!std::isfinite(values[order[0]])) {
      throw Error("collapsed-search", "no candidate scored a finite objective");
    }
    if (values[order[0]] < best_value) {
      best_value = values[order[0]];
      best_phi = samples[order[0]];
    }
    result.best_objective.push_back(best_value);

    Eigen::VectorXd elite_mean = Eigen::VectorXd::Zero(m);
    for (int e = 0; e < elites; ++e) elite_mean += samples[order[e]];
    elite_mean /= elites;
    Eigen::MatrixXd elite_cov = Eigen::MatrixXd::Zero(m, m);
    for (int e = 0; e < elites; ++e) {
      const Eigen::VectorXd diff = samples[order[e]] - elite_mean;
      elite_cov += diff * diff.transpose();
    }
    elite_cov /= elites;
    elite_cov += cfg.variance_floor * Eigen::MatrixXd::Identity(m, m);
    if (!elite_mean.allFinite() || !elite_cov.allFinite()) {
      throw Error("collapsed-search", "elite refit produced non-finite moments");
    }
    mean = elite_mean;
    cov = 0.5 * (elite_cov + elite_cov.transpose());
  }

  result.estimate = model.clamp_phi(mean);
  return result;
}

ParamBelief belief_update(const ParamBelief& belief, const FisherMatrix& fim) {
  const int m = static_cast<int>(belief.mean.size());
  if (fim.dim() != m) {
    throw Error("dim-mismatch", "FIM dimension does not match the belief");
  }
  const Eigen::LLT<Eigen::MatrixXd> prior_llt(belief.covariance);
  if (prior_llt.info() != Eigen::Success) {
    throw Error("bad-prior", "prior covariance is not positive definite");
  }
  const Eigen::MatrixXd prior_info =
      prior_llt.solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd info = fim.matrix() + prior_info;
  const Eigen::LLT<Eigen::MatrixXd> info_llt(0.5 * (info + info.transpose()));
  if (info_llt.info() != Eigen::Success) {
    throw Error("bad-prior", "information matrix is not positive definite");
  }
  Eigen::MatrixXd cov = info_llt.solve(Eigen::MatrixXd::Identity(m, m));
  return make_belief(belief.mean, cov);
}

}  // namespace qoed
