#ifndef QOED_FISHER_HPP_
#define QOED_FISHER_HPP_

#include <Eigen/Dense>
#include <vector>

#include "qoed/error.hpp"

namespace qoed {

// One score sample: gradient of a trajectory log-likelihood with respect to
// the model parameters.
using ScoreSample = Eigen::VectorXd;

// Symmetric PSD information matrix. Construction symmetrizes; sample_count
// records how many Monte-Carlo scores went in (0 means closed form).
class FisherMatrix {
 public:
  FisherMatrix(const Eigen::MatrixXd& matrix, long sample_count);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  long sample_count() const { return sample_count_; }
  bool closed_form() const { return sample_count_ == 0; }

  double trace() const { return matrix_.trace(); }

 private:
  Eigen::MatrixXd matrix_;
  long sample_count_;
};

// Eigenpairs of a FisherMatrix, eigenvalues sorted descending, eigenvectors
// as orthonormal columns with a fixed sign convention.
struct EigenDecomp {
  Eigen::VectorXd eigenvalues;   // lambda_1 >= ... >= lambda_m >= 0
  Eigen::MatrixXd eigenvectors;  // columns w_1 ... w_m
};

// Monte-Carlo FIM (1/N) sum g g^T from score samples. Uses compensated
// summation so the result is permutation-stable to ~1e-12.
//
// Errors: "no-samples" on an empty list, "dim-mismatch" if sample lengths
// differ, "non-finite-score" on NaN/Inf entries.
FisherMatrix estimate_fim(const std::vector<ScoreSample>& scores);

// Descending eigendecomposition with deterministic tie-breaking and sign
// convention (first nonzero component of each eigenvector positive).
// Eigenvalues below 1e-10 * lambda_1 are clamped to zero.
EigenDecomp eigendecompose(const FisherMatrix& fim);

// w^T F w for a unit vector w. Errors: "not-normalized" if |‖w‖-1| > 1e-8.
double directional_information(const FisherMatrix& fim, const Eigen::VectorXd& w);

// tr((F + eps I)^-1): Cramér–Rao proxy on the total estimator MSE. Weakly
// informed directions contribute ~1/eps and dominate the bound.
double crlb_trace(const FisherMatrix& fim, double eps);

// tr(F[k,k]). Errors: "bad-index" if k is empty or out of range.
double principal_submatrix_trace(const FisherMatrix& fim, const std::vector<int>& k);

// Default Monte-Carlo sample count for bonus evaluation; configurable at
// every call site that estimates a FIM.
inline constexpr int kDefaultFimSamples = 4096;

}  // namespace qoed

#endif  // QOED_FISHER_HPP_
