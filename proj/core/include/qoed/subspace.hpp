#ifndef QOED_SUBSPACE_HPP_
#define QOED_SUBSPACE_HPP_

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "qoed/fisher.hpp"

namespace qoed {

// Eigenspace split into observable / weakly-observed parts.
struct EigenSplit {
  std::vector<int> observable_idx;  // eigen indices with lambda >= threshold
  std::vector<int> weak_idx;        // complement
  Eigen::MatrixXd W_o;              // m x n, columns = observable eigenvectors
  Eigen::VectorXd lambda_o;         // length n
  double threshold_used = 0.0;
};

enum class RejectReason { kCosine, kZeroRow, kBudget };

const char* to_string(RejectReason reason);

// Outcome of the greedy identifiable-coordinate selection.
//
// `rejected` lists every unselected row with why it was passed over:
//   kZeroRow  - no loading on the observable subspace,
//   kCosine   - too correlated with an already-selected row,
//   kBudget   - selection ended (budget reached or no candidate with
//               positive marginal gain) before the row was taken.
struct SelectionResult {
  std::vector<int> k;           // selected parameter coordinates, in pick order
  double objective_value = 0.0; // log det(Gram(k) + eps I) achieved
  std::vector<std::pair<int, RejectReason>> rejected;
};

// Threshold rule: threshold = max(delta_eig, alpha_eig * lambda_1); the
// observable set is every eigen index at or above it (possibly empty).
EigenSplit split_observable(const EigenDecomp& decomp, double delta_eig,
                            double alpha_eig);

// Cosine similarity of two parameter rows. Errors: "zero-row" if either
// norm is below 1e-12.
double cosine_rows(const Eigen::VectorXd& r_i, const Eigen::VectorXd& r_j);

// Greedy maximization of log det(W_ko W_ko^T + eps_logdet I) over parameter
// rows of W_o, subject to |cos(r_i, r_j)| <= delta_cos for selected pairs.
// Adds the row with the largest marginal gain each step (ties to the
// smallest index), stops at `budget` or when no feasible candidate has
// positive gain. Lazy evaluation via a stale-gain max-heap; results are
// identical to plain greedy.
//
// Errors: "no-observable-subspace" if W_o has no columns, "bad-budget" or
// "bad-cosine-threshold" on out-of-range settings.
SelectionResult select_identifiable(const Eigen::MatrixXd& W_o, int budget,
                                    double delta_cos, double eps_logdet = 1e-9);

inline constexpr double kDefaultEpsLogdet = 1e-9;
inline constexpr double kZeroRowNorm = 1e-10;

}  // namespace qoed

#endif  // QOED_SUBSPACE_HPP_
