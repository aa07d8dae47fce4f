#include "qoed/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace qoed {

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kCosine:
      return "cosine";
    case RejectReason::kZeroRow:
      return "zero-row";
    case RejectReason::kBudget:
      return "budget";
  }
  return "unknown";
}

EigenSplit split_observable(const EigenDecomp& decomp, double delta_eig,
                            double alpha_eig) {
  if (!(delta_eig > 0.0) || !(alpha_eig > 0.0)) {
    throw Error("bad-threshold", "split_observable thresholds must be positive");
  }
  const int m = static_cast<int>(decomp.eigenvalues.size());
  EigenSplit split;
  const double lambda1 = m > 0 ? decomp.eigenvalues(0) : 0.0;
  split.threshold_used = std::max(delta_eig, alpha_eig * lambda1);

  for (int i = 0; i < m; ++i) {
    if (decomp.eigenvalues(i) >= split.threshold_used) {
      split.observable_idx.push_back(i);
    } else {
      split.weak_idx.push_back(i);
    }
  }
  const int n = static_cast<int>(split.observable_idx.size());
  split.W_o.resize(m, n);
  split.lambda_o.resize(n);
  for (int j = 0; j < n; ++j) {
    split.W_o.col(j) = decomp.eigenvectors.col(split.observable_idx[j]);
    split.lambda_o(j) = decomp.eigenvalues(split.observable_idx[j]);
  }
  return split;
}

double cosine_rows(const Eigen::VectorXd& r_i, const Eigen::VectorXd& r_j) {
  const double ni = r_i.norm();
  const double nj = r_j.norm();
  if (ni < 1e-12 || nj < 1e-12) {
    throw Error("zero-row", "cosine of a zero-norm row is undefined");
  }
  return r_i.dot(r_j) / (ni * nj);
}

namespace {

struct HeapEntry {
  double gain;
  int row;
  int round;  // greedy round the gain was computed in
};

struct HeapLess {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.row > b.row;  // smaller index wins ties
  }
};

double logdet_selected(const Eigen::MatrixXd& kernel, const std::vector<int>& sel,
                       double eps) {
  const int s = static_cast<int>(sel.size());
  if (s == 0) return 0.0;
  Eigen::MatrixXd gram(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      gram(a, b) = kernel(sel[a], sel[b]);
    }
    gram(a, a) += eps;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error("gram-not-pd", "regularized Gram matrix failed Cholesky");
  }
  double logdet = 0.0;
  for (int a = 0; a < s; ++a) {
    logdet += 2.0 * std::log(llt.matrixL()(a, a));
  }
  return logdet;
}

}  // namespace

SelectionResult select_identifiable(const Eigen::MatrixXd& W_o, int budget,
                                    double delta_cos, double eps_logdet) {
  const int m = static_cast<int>(W_o.rows());
  const int n = static_cast<int>(W_o.cols());
  if (n == 0) {
    throw Error("no-observable-subspace", "W_o has no observable columns");
  }
  if (budget < 1 || budget > n) {
    throw Error("bad-budget", "budget must satisfy 1 <= budget <= n");
  }
  if (!(delta_cos > 0.0) || delta_cos > 1.0) {
    throw Error("bad-cosine-threshold", "delta_cos must be in (0, 1]");
  }

  // Row kernel K(i,j) = r_i . r_j; Gram of any subset is a principal
  // submatrix, so the log-det objective is submodular and lazy evaluation
  // is exact.
  const Eigen::MatrixXd kernel = W_o * W_o.transpose();

  SelectionResult result;
  std::vector<bool> alive(m, true);
  std::vector<double> row_norm(m);
  for (int j = 0; j < m; ++j) {
    row_norm[j] = std::sqrt(std::max(kernel(j, j), 0.0));
    if (row_norm[j] < kZeroRowNorm) {
      alive[j] = false;
      result.rejected.emplace_back(j, RejectReason::kZeroRow);
    }
  }

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap;
  for (int j = 0; j < m; ++j) {
    if (alive[j]) {
      heap.push({std::log(kernel(j, j) + eps_logdet), j, 0});
    }
  }

  int round = 0;
  double current_logdet = 0.0;
  while (static_cast<int>(result.k.size()) < budget && !heap.empty()) {
    HeapEntry top = heap.top();
    heap.pop();
    if (!alive[top.row]) continue;

    if (top.round != round) {
      // Stale gain: recompute against the current selection and reinsert.
      std::vector<int> trial = result.k;
      trial.push_back(top.row);
      top.gain = logdet_selected(kernel, trial, eps_logdet) - current_logdet;
      top.round = round;
      heap.push(top);
      continue;
    }

    if (!(top.gain > 0.0)) break;  // no feasible candidate improves

    result.k.push_back(top.row);
    current_logdet += top.gain;
    alive[top.row] = false;
    ++round;

    // Eager cosine screening against the newly selected row; violators are
    // permanently infeasible.
    for (int j = 0; j < m; ++j) {
      if (!alive[j]) continue;
      const double cos =
          kernel(top.row, j) / (row_norm[top.row] * row_norm[j]);
      if (std::abs(cos) > delta_cos) {
        alive[j] = false;
        result.rejected.emplace_back(j, RejectReason::kCosine);
      }
    }
  }

  for (int j = 0; j < m; ++j) {
    if (alive[j]) result.rejected.emplace_back(j, RejectReason::kBudget);
  }
  result.objective_value = current_logdet;
  return result;
}

}  // namespace qoed
