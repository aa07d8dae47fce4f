#include "qoed/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qoed {

double default_stabilization_eps(const FisherMatrix& fim) {
  return 1e-8 * std::max(1.0, fim.trace() / fim.dim());
}

FimBlocks block_partition(const FisherMatrix& fim, const std::vector<int>& k) {
  const int m = fim.dim();
  std::set<int> kset(k.begin(), k.end());
  if (kset.size() != k.size()) {
    throw Error("degenerate-partition", "critical index set has duplicates");
  }
  for (int idx : k) {
    if (idx < 0 || idx >= m) {
      throw Error("degenerate-partition", "critical index out of range");
    }
  }
  if (k.empty() || static_cast<int>(k.size()) == m) {
    throw Error("degenerate-partition",
                "k must be a nonempty proper subset; use the full or empty "
                "objective directly");
  }

  FimBlocks blocks;
  blocks.k = k;
  for (int i = 0; i < m; ++i) {
    if (!kset.count(i)) blocks.k_bar.push_back(i);
  }
  const int nk = static_cast<int>(blocks.k.size());
  const int nb = static_cast<int>(blocks.k_bar.size());
  const Eigen::MatrixXd& F = fim.matrix();

  blocks.F_kk.resize(nk, nk);
  blocks.F_kkbar.resize(nk, nb);
  blocks.F_kbarkbar.resize(nb, nb);
  for (int a = 0; a < nk; ++a) {
    for (int b = 0; b < nk; ++b) blocks.F_kk(a, b) = F(blocks.k[a], blocks.k[b]);
    for (int b = 0; b < nb; ++b)
      blocks.F_kkbar(a, b) = F(blocks.k[a], blocks.k_bar[b]);
  }
  for (int a = 0; a < nb; ++a) {
    for (int b = 0; b < nb; ++b)
      blocks.F_kbarkbar(a, b) = F(blocks.k_bar[a], blocks.k_bar[b]);
  }
  return blocks;
}

Eigen::MatrixXd schur_complement(const FimBlocks& blocks, double eps) {
  if (!(eps > 0.0)) {
    throw Error("bad-eps", "schur_complement requires eps > 0");
  }
  const int nb = static_cast<int>(blocks.F_kbarkbar.rows());
  Eigen::MatrixXd stabilized =
      blocks.F_kbarkbar + eps * Eigen::MatrixXd::Identity(nb, nb);
  const Eigen::LLT<Eigen::MatrixXd> llt(stabilized);
  if (llt.info() != Eigen::Success) {
    throw Error("gram-not-pd", "stabilized nuisance block failed Cholesky");
  }
  const Eigen::MatrixXd solved = llt.solve(blocks.F_kbark());
  Eigen::MatrixXd schur = blocks.F_kk - blocks.F_kkbar * solved;
  return 0.5 * (schur + schur.transpose());
}

double boed_objective(const FisherMatrix& fim) { return fim.trace(); }

double agnostic_objective(const FisherMatrix& fim, const std::vector<int>& k) {
  if (k.empty()) return 0.0;
  return principal_submatrix_trace(fim, k);
}

double qoed_objective(const FisherMatrix& fim, const std::vector<int>& k,
                      double eps) {
  if (k.empty()) return 0.0;
  if (static_cast<int>(k.size()) == fim.dim()) return boed_objective(fim);
  if (eps < 0.0) eps = default_stabilization_eps(fim);
  return schur_complement(block_partition(fim, k), eps).trace();
}

double residual_regression_trace(const FimBlocks& blocks) {
  // Optimal linear predictor of the critical score from the nuisance score.
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(blocks.F_kbarkbar);
  if (ldlt.info() != Eigen::Success) {
    throw Error("singular-nuisance-block",
                "nuisance block is not factorizable");
  }
  const Eigen::MatrixXd At = ldlt.solve(blocks.F_kbark());  // A^T
  const Eigen::MatrixXd A = At.transpose();
  const Eigen::MatrixXd residual = blocks.F_kk - A * blocks.F_kbark() -
                                   blocks.F_kkbar * At +
                                   A * blocks.F_kbarkbar * At;
  return residual.trace();
}

namespace {

// Inverse symmetric square root with an eigenvalue floor at 1e-12 * lambda_max.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& vals = es.eigenvalues();
  const double floor = 1e-12 * std::max(vals.maxCoeff(), 0.0);
  Eigen::VectorXd inv_sqrt(vals.size());
  for (int i = 0; i < vals.size(); ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(std::max(vals(i), floor));
  }
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

QuasiOptConstants quasiopt_constants(const FisherMatrix& fim,
                                     const std::vector<int>& k) {
  const FimBlocks blocks = block_partition(fim, k);
  const double tr_kk = blocks.F_kk.trace();
  if (!(tr_kk > 0.0)) {
    throw Error("degenerate-critical-block",
                "tr(F_kk) = 0, eta is undefined");
  }
  QuasiOptConstants c;
  c.eta = blocks.F_kbarkbar.trace() / tr_kk;

  const Eigen::MatrixXd whitened =
      inverse_sqrt(blocks.F_kk) * blocks.F_kkbar * inverse_sqrt(blocks.F_kbarkbar);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened);
  const double spectral = svd.singularValues().size() > 0
                              ? svd.singularValues()(0)
                              : 0.0;
  c.beta = spectral * spectral;
  c.rho = (1.0 - c.beta) / (1.0 + c.eta);
  return c;
}

double projection_residual(const FisherMatrix& fim, const std::vector<int>& o) {
  const int m = fim.dim();
  const EigenDecomp decomp = eigendecompose(fim);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (int idx : o) {
    if (idx < 0 || idx >= m) {
      throw Error("bad-index", "eigen index out of range");
    }
    P += decomp.eigenvectors.col(idx) * decomp.eigenvectors.col(idx).transpose();
  }
  return ((Eigen::MatrixXd::Identity(m, m) - P) * fim.matrix()).trace();
}

BonusResult qoed_bonus(const std::vector<ScoreSample>& scores,
                       const BonusConfig& config) {
  BonusResult result;
  const FisherMatrix fim = estimate_fim(scores);
  result.fim = fim.matrix();
  result.decomp = eigendecompose(fim);
  result.split = split_observable(result.decomp, config.delta_eig, config.alpha_eig);

  const int n = static_cast<int>(result.split.observable_idx.size());
  if (n == 0) {
    result.bonus = 0.0;
    return result;
  }

  const int budget = config.budget < 0 ? n : std::min(config.budget, n);
  result.selection = select_identifiable(result.split.W_o, budget,
                                         config.delta_cos, config.eps_logdet);
  result.bonus = qoed_objective(fim, result.selection.k, config.eps);
  return result;
}

}  // namespace qoed
