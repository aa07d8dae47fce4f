#ifndef QOED_OBJECTIVES_HPP_
#define QOED_OBJECTIVES_HPP_

#include <Eigen/Dense>
#include <vector>

#include "qoed/fisher.hpp"
#include "qoed/subspace.hpp"

namespace qoed {

// Block partition of a FIM under a critical/nuisance coordinate split.
struct FimBlocks {
  std::vector<int> k;      // critical coordinates
  std::vector<int> k_bar;  // nuisance coordinates (complement, ascending)
  Eigen::MatrixXd F_kk;
  Eigen::MatrixXd F_kkbar;
  Eigen::MatrixXd F_kbarkbar;

  Eigen::MatrixXd F_kbark() const { return F_kkbar.transpose(); }
};

// Constants of the quasi-optimality bound: rho = (1 - beta) / (1 + eta).
struct QuasiOptConstants {
  double eta = 0.0;   // nuisance information mass relative to the critical block
  double beta = 0.0;  // squared spectral norm of the whitened coupling
  double rho = 1.0;
};

// Thresholds for the full bonus pipeline.
struct BonusConfig {
  double delta_eig = 0.1;
  double alpha_eig = 0.01;
  double delta_cos = 0.95;
  double eps = -1.0;        // Schur stabilization; < 0 means scale-aware default
  int budget = -1;          // < 0 means |o|
  double eps_logdet = kDefaultEpsLogdet;
};

// Everything the bonus pipeline produced, for reporting.
struct BonusResult {
  double bonus = 0.0;
  SelectionResult selection;
  EigenSplit split;
  EigenDecomp decomp;
  Eigen::MatrixXd fim;
};

// Scale-aware stabilization: 1e-8 * max(1, tr(F)/m).
double default_stabilization_eps(const FisherMatrix& fim);

// Errors: "degenerate-partition" when k is empty, full, or has invalid or
// repeated indices.
FimBlocks block_partition(const FisherMatrix& fim, const std::vector<int>& k);

// F_kk - F_kkbar (F_kbarkbar + eps I)^-1 F_kbark, symmetrized.
Eigen::MatrixXd schur_complement(const FimBlocks& blocks, double eps);

// tr(F): the full-trace information objective.
double boed_objective(const FisherMatrix& fim);

// tr(F[k,k]): restricted trace ignoring discarded coordinates. Empty k
// yields 0.
double agnostic_objective(const FisherMatrix& fim, const std::vector<int>& k);

// tr of the nuisance-adjusted block. Defined as boed_objective when k is the
// full index set and 0 when k is empty; eps < 0 selects the scale-aware
// default.
double qoed_objective(const FisherMatrix& fim, const std::vector<int>& k,
                      double eps = -1.0);

// Independent route to the same number: the residual-regression value
// min_A tr(F_kk - A F_kbark - F_kkbar A^T + A F_kbarkbar A^T), evaluated at
// the closed-form minimizer A = F_kkbar F_kbarkbar^-1.
double residual_regression_trace(const FimBlocks& blocks);

// eta, beta, rho for one FIM and index split. Errors:
// "degenerate-critical-block" when tr(F_kk) = 0.
QuasiOptConstants quasiopt_constants(const FisherMatrix& fim,
                                     const std::vector<int>& k);

// tr((I - W_o W_o^T) F): score energy discarded by projecting onto the
// eigen subspace indexed by o. Equals the tail eigenvalue sum.
double projection_residual(const FisherMatrix& fim, const std::vector<int>& o);

// Full pipeline: estimate -> eigendecompose -> split -> select -> adjusted
// trace. o = empty gives bonus 0 with an empty selection; k = full index set
// gives the full trace.
BonusResult qoed_bonus(const std::vector<ScoreSample>& scores,
                       const BonusConfig& config);

}  // namespace qoed

#endif  // QOED_OBJECTIVES_HPP_
