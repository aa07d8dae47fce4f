#include "qoed/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qoed {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

FisherMatrix::FisherMatrix(const Eigen::MatrixXd& matrix, long sample_count)
    : sample_count_(sample_count) {
  if (matrix.rows() != matrix.cols()) {
    throw Error("not-square", "Fisher matrix must be square");
  }
  if (!all_finite(matrix)) {
    throw Error("non-finite", "Fisher matrix has NaN/Inf entries");
  }
  matrix_ = 0.5 * (matrix + matrix.transpose());

  // PSD up to noise: smallest eigenvalue >= -1e-10 * trace.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_, Eigen::EigenvaluesOnly);
  const double tr = matrix_.trace();
  const double floor = -1e-10 * std::max(tr, 0.0) - 1e-14;
  if (es.eigenvalues().minCoeff() < floor) {
    throw Error("not-psd", "Fisher matrix is not positive semidefinite");
  }
}

FisherMatrix estimate_fim(const std::vector<ScoreSample>& scores) {
  if (scores.empty()) {
    throw Error("no-samples", "estimate_fim needs at least one score sample");
  }
  const Eigen::Index m = scores.front().size();
  if (m == 0) {
    throw Error("dim-mismatch", "score samples must be nonempty vectors");
  }

  // Kahan-compensated accumulation of the outer products keeps the result
  // permutation-stable.
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
  for (const ScoreSample& g : scores) {
    if (g.size() != m) {
      throw Error("dim-mismatch", "score samples have inconsistent dimensions");
    }
    if (!g.allFinite()) {
      throw Error("non-finite-score", "score sample has NaN/Inf entries");
    }
    const Eigen::MatrixXd term = g * g.transpose();
    const Eigen::MatrixXd y = term - comp;
    const Eigen::MatrixXd t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  sum /= static_cast<double>(scores.size());
  return FisherMatrix(sum, static_cast<long>(scores.size()));
}

EigenDecomp eigendecompose(const FisherMatrix& fim) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim.matrix());
  const int m = fim.dim();

  // Solver returns ascending order; we want descending. Ties keep the
  // solver's relative order (stable reversal).
  EigenDecomp out;
  out.eigenvalues.resize(m);
  out.eigenvectors.resize(m, m);
  for (int i = 0; i < m; ++i) {
    out.eigenvalues(i) = es.eigenvalues()(m - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(m - 1 - i);
  }

  // Clamp noise-level eigenvalues: the model guarantees PSD, finite-sample
  // estimates do not.
  const double lambda1 = std::max(out.eigenvalues(0), 0.0);
  const double clamp = 1e-10 * lambda1;
  for (int i = 0; i < m; ++i) {
    if (out.eigenvalues(i) < clamp) out.eigenvalues(i) = 0.0;
  }

  // Sign convention: first component with non-negligible magnitude positive.
  for (int i = 0; i < m; ++i) {
    auto col = out.eigenvectors.col(i);
    for (int r = 0; r < m; ++r) {
      if (std::abs(col(r)) > 1e-12) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
  }
  return out;
}

double directional_information(const FisherMatrix& fim, const Eigen::VectorXd& w) {
  if (w.size() != fim.dim()) {
    throw Error("dim-mismatch", "direction has wrong dimension");
  }
  if (std::abs(w.norm() - 1.0) > 1e-8) {
    throw Error("not-normalized", "direction must be a unit vector");
  }
  return std::max(0.0, w.dot(fim.matrix() * w));
}

double crlb_trace(const FisherMatrix& fim, double eps) {
  if (!(eps > 0.0)) {
    throw Error("bad-eps", "crlb_trace requires eps > 0");
  }
  const EigenDecomp ed = eigendecompose(fim);
  double total = 0.0;
  for (int i = 0; i < fim.dim(); ++i) {
    total += 1.0 / (ed.eigenvalues(i) + eps);
  }
  return total;
}

double principal_submatrix_trace(const FisherMatrix& fim, const std::vector<int>& k) {
  if (k.empty()) {
    throw Error("bad-index", "index set must be nonempty");
  }
  double total = 0.0;
  for (int idx : k) {
    if (idx < 0 || idx >= fim.dim()) {
      throw Error("bad-index", "index out of range");
    }
    total += fim.matrix()(idx, idx);
  }
  return total;
}

}  // namespace qoed
