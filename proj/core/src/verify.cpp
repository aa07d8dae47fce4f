#include "qoed/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qoed/config.hpp"
#include "qoed/design.hpp"
#include "qoed/estimation.hpp"
#include "qoed/fisher.hpp"
#include "qoed/models.hpp"
#include "qoed/objectives.hpp"
#include "qoed/report.hpp"
#include "qoed/rng.hpp"
#include "qoed/subspace.hpp"

namespace qoed {

namespace {

// Stateless draws keep every check independent of which checks ran before.
double unit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}
double gauss(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

Eigen::MatrixXd random_orthogonal(int m, Rng& rng) {
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) g(i, j) = gauss(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix the sign ambiguity so the distribution is Haar-ish.
  for (int j = 0; j < m; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

// Random PD matrix with eigenvalues in [lo, hi].
FisherMatrix random_pd(int m, Rng& rng, double lo = 0.3, double hi = 3.0) {
  const Eigen::MatrixXd q = random_orthogonal(m, rng);
  Eigen::VectorXd vals(m);
  for (int i = 0; i < m; ++i) vals(i) = lo + (hi - lo) * unit(rng);
  return FisherMatrix(q * vals.asDiagonal() * q.transpose(), 0);
}

// Random PSD via Monte-Carlo score samples, as estimate_fim sees in use.
FisherMatrix random_estimated_fim(int m, int n_samples, Rng& rng) {
  const Eigen::MatrixXd q = random_orthogonal(m, rng);
  Eigen::VectorXd scale(m);
  for (int i = 0; i < m; ++i) scale(i) = 0.1 + 2.0 * unit(rng);
  std::vector<ScoreSample> scores;
  scores.reserve(n_samples);
  for (int n = 0; n < n_samples; ++n) {
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = scale(i) * gauss(rng);
    scores.push_back(q * z);
  }
  return estimate_fim(scores);
}

std::vector<int> random_proper_subset(int m, Rng& rng) {
  const int size = 1 + static_cast<int>(unit(rng) * (m - 1));
  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);
  for (int i = m - 1; i > 0; --i) {
    std::swap(all[i], all[static_cast<int>(unit(rng) * (i + 1))]);
  }
  std::vector<int> k(all.begin(), all.begin() + std::min(size, m - 1));
  std::sort(k.begin(), k.end());
  return k;
}

CheckResult make_result(const std::string& name, double measured,
                        double tolerance, const std::string& detail = "") {
  CheckResult r;
  r.name = name;
  r.measured = measured;
  r.tolerance = tolerance;
  r.passed = measured <= tolerance;
  r.detail = detail;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// fisher_core

CheckResult check_eigen_direction_information(int n_matrices, int max_dim,
                                    std::uint64_t seed) {
  Rng rng = make_rng(seed, 101);
  double worst = 0.0;
  for (int n = 0; n < n_matrices; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * (max_dim - 1));
    const FisherMatrix fim = random_estimated_fim(m, 64 + m * 16, rng);
    const EigenDecomp ed = eigendecompose(fim);
    const double tol = 1e-8 * (1.0 + ed.eigenvalues(0));
    for (int i = 0; i < m; ++i) {
      const double info = directional_information(fim, ed.eigenvectors.col(i));
      worst = std::max(worst, std::abs(info - ed.eigenvalues(i)) / tol);
    }
  }
  return make_result("fisher/eigen-direction-information", worst, 1.0,
                     "max |w^T F w - lambda| over 1e-8 (1 + lambda_1)");
}

CheckResult check_fim_convergence(long n_small, long n_large,
                                  std::uint64_t seed) {
  Rng rng = make_rng(seed, 102);
  const LinearGaussian1D model(0.1);
  Eigen::VectorXd s(1), a(1), phi(2);
  s << 1.0;
  a << 0.7;
  phi << 0.9, 0.2;
  const Eigen::MatrixXd exact = model.closed_form_fim(s, a, phi).matrix();
  const double exact_norm = exact.norm();

  const auto mc_error = [&](long n) {
    std::vector<ScoreSample> scores;
    scores.reserve(n);
    for (long i = 0; i < n; ++i) {
      const Eigen::VectorXd next = model.step_sample(s, a, phi, rng);
      scores.push_back(model.step_score(s, a, phi, next));
    }
    return (estimate_fim(scores).matrix() - exact).norm() / exact_norm;
  };

  const double err_small = mc_error(n_small);
  const double err_large = mc_error(n_large);
  std::ostringstream detail;
  detail << "rel Frobenius error " << format_number(err_small) << " @N="
         << n_small << " -> " << format_number(err_large) << " @N=" << n_large;
  CheckResult r = make_result("fisher/mc-convergence", err_large, 0.05,
                              detail.str());
  r.passed = r.passed && err_large < err_small;
  return r;
}

CheckResult check_trace_eigenvalue_sum(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 103);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_estimated_fim(m, 32 + m * 8, rng);
    const EigenDecomp ed = eigendecompose(fim);
    const double rel = std::abs(fim.trace() - ed.eigenvalues.sum()) /
                       std::max(1e-300, std::abs(fim.trace()));
    worst = std::max(worst, rel);
  }
  return make_result("fisher/trace-eigenvalue-sum", worst, 1e-10);
}

CheckResult check_ky_fan_truncation(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 104);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_pd(m, rng, 0.0, 3.0);
    const EigenDecomp ed = eigendecompose(fim);
    const std::vector<int> k = random_proper_subset(m, rng);
    double tail = 0.0;
    for (int i = static_cast<int>(k.size()); i < m; ++i) {
      tail += ed.eigenvalues(i);
    }
    const double kept = principal_submatrix_trace(fim, k);
    // Violation amount, must stay below 1e-8.
    worst = std::max(worst, tail - (fim.trace() - kept));
  }
  return make_result("fisher/ky-fan-truncation", worst, 1e-8,
                     "max tail-sum minus discarded trace");
}

CheckResult check_fim_permutation_invariance(std::uint64_t seed) {
  Rng rng = make_rng(seed, 105);
  const int m = 6;
  std::vector<ScoreSample> scores;
  for (int n = 0; n < 512; ++n) {
    Eigen::VectorXd g(m);
    for (int i = 0; i < m; ++i) g(i) = 10.0 * gauss(rng);
    scores.push_back(g);
  }
  const Eigen::MatrixXd forward = estimate_fim(scores).matrix();
  std::reverse(scores.begin(), scores.end());
  const Eigen::MatrixXd backward = estimate_fim(scores).matrix();
  std::vector<ScoreSample> shuffled = scores;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    std::swap(shuffled[i], shuffled[static_cast<std::size_t>(unit(rng) * (i + 1))]);
  }
  const Eigen::MatrixXd random_order = estimate_fim(shuffled).matrix();
  const double scale = std::max(1.0, forward.norm());
  const double worst = std::max((forward - backward).norm(),
                                (forward - random_order).norm()) /
                       scale;
  return make_result("fisher/permutation-invariance", worst, 1e-12);
}

// ---------------------------------------------------------------------------
// subspace_select

namespace {

Eigen::MatrixXd random_column_orthonormal(int m, int n, Rng& rng) {
  return random_orthogonal(m, rng).leftCols(n);
}

double logdet_gram(const Eigen::MatrixXd& rows, const std::vector<int>& sel,
                   double eps) {
  const int s = static_cast<int>(sel.size());
  if (s == 0) return 0.0;
  Eigen::MatrixXd gram(s, s);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      gram(a, b) = rows.row(sel[a]).dot(rows.row(sel[b]));
    }
    gram(a, a) += eps;
  }
  return std::log(gram.determinant());
}

// Exhaustive feasible-subset search, the independent oracle for the greedy.
double exhaustive_best_logdet(const Eigen::MatrixXd& rows, int budget,
                              double delta_cos, double eps) {
  const int m = static_cast<int>(rows.rows());
  double best = 0.0;  // empty set
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> sel;
    for (int j = 0; j < m; ++j) {
      if (mask & (1u << j)) sel.push_back(j);
    }
    if (static_cast<int>(sel.size()) > budget) continue;
    bool feasible = true;
    for (std::size_t a = 0; a < sel.size() && feasible; ++a) {
      const double na = rows.row(sel[a]).norm();
      if (na < kZeroRowNorm) {
        feasible = false;
        break;
      }
      for (std::size_t b = a + 1; b < sel.size(); ++b) {
        const double nb = rows.row(sel[b]).norm();
        if (nb < kZeroRowNorm ||
            std::abs(rows.row(sel[a]).dot(rows.row(sel[b])) / (na * nb)) >
                delta_cos) {
          feasible = false;
          break;
        }
      }
    }
    if (!feasible) continue;
    best = std::max(best, logdet_gram(rows, sel, eps));
  }
  return best;
}

}  // namespace

CheckResult check_greedy_monotonicity(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 201);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < instances; ++n) {
    const int m = 3 + static_cast<int>(unit(rng) * 7);
    const int cols = 1 + static_cast<int>(unit(rng) * m);
    const Eigen::MatrixXd w = random_column_orthonormal(m, cols, rng);
    const SelectionResult sel = select_identifiable(w, cols, 0.95);
    double prev = 0.0;
    for (std::size_t i = 1; i <= sel.k.size(); ++i) {
      const std::vector<int> prefix(sel.k.begin(), sel.k.begin() + i);
      const double val = logdet_gram(w, prefix, kDefaultEpsLogdet);
      worst = std::max(worst, prev - val);  // must never decrease
      prev = val;
    }
  }
  return make_result("subspace/greedy-monotonicity", worst, 1e-12,
                     "max objective decrease along the greedy sequence");
}

CheckResult check_cosine_soundness(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 202);
  int violations = 0;
  for (int n = 0; n < instances; ++n) {
    const int m = 3 + static_cast<int>(unit(rng) * 9);
    const int cols = 1 + static_cast<int>(unit(rng) * m);
    const Eigen::MatrixXd w = random_column_orthonormal(m, cols, rng);
    const double delta_cos = 0.3 + 0.69 * unit(rng);
    const SelectionResult sel = select_identifiable(w, cols, delta_cos);
    for (std::size_t a = 0; a < sel.k.size(); ++a) {
      for (std::size_t b = a + 1; b < sel.k.size(); ++b) {
        const double c = cosine_rows(w.row(sel.k[a]), w.row(sel.k[b]));
        if (std::abs(c) > delta_cos + 1e-12) ++violations;
      }
    }
  }
  return make_result("subspace/cosine-soundness", violations, 0.0,
                     "pairwise constraint violations in returned sets");
}

CheckResult check_threshold_dichotomy(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 203);
  int violations = 0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_pd(m, rng, 0.0, 2.0);
    const EigenDecomp ed = eigendecompose(fim);
    const double delta = 0.05 + unit(rng);
    const double alpha = 0.005 + 0.05 * unit(rng);
    const EigenSplit split = split_observable(ed, delta, alpha);
    std::vector<bool> seen(m, false);
    for (int i : split.observable_idx) {
      if (seen[i] || ed.eigenvalues(i) < split.threshold_used) ++violations;
      seen[i] = true;
    }
    for (int i : split.weak_idx) {
      if (seen[i] || ed.eigenvalues(i) >= split.threshold_used) ++violations;
      seen[i] = true;
    }
    for (int i = 0; i < m; ++i) {
      if (!seen[i]) ++violations;
    }
  }
  return make_result("subspace/threshold-dichotomy", violations, 0.0);
}

CheckResult check_duplicate_rows(std::uint64_t seed) {
  Rng rng = make_rng(seed, 204);
  int violations = 0;
  for (int n = 0; n < 100; ++n) {
    const int cols = 2 + static_cast<int>(unit(rng) * 3);
    Eigen::MatrixXd w(cols + 2, cols);
    const Eigen::MatrixXd base = random_column_orthonormal(cols, cols, rng);
    w.topRows(cols) = base;
    w.row(cols) = base.row(0);      // exact duplicate of row 0
    w.row(cols + 1) = base.row(1);  // exact duplicate of row 1
    const SelectionResult sel = select_identifiable(w, cols, 0.95);
    int first_pair = 0, second_pair = 0;
    for (int idx : sel.k) {
      if (idx == 0 || idx == cols) ++first_pair;
      if (idx == 1 || idx == cols + 1) ++second_pair;
    }
    if (first_pair > 1 || second_pair > 1) ++violations;
  }
  return make_result("subspace/duplicate-rows", violations, 0.0,
                     "selections keeping both copies of an identical row");
}

CheckResult check_greedy_orthogonal_oracle(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 205);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 8);  // m <= 10
    Eigen::MatrixXd rows = random_orthogonal(m, rng);
    for (int j = 0; j < m; ++j) {
      rows.row(j) *= 0.2 + 1.3 * unit(rng);  // some norms above 1, some below
    }
    const int budget = 1 + static_cast<int>(unit(rng) * m);
    const SelectionResult sel =
        select_identifiable(rows, std::min(budget, m), 0.95);
    const double oracle = exhaustive_best_logdet(rows, std::min(budget, m),
                                                 0.95, kDefaultEpsLogdet);
    worst = std::max(worst, std::abs(sel.objective_value - oracle));
  }
  return make_result("subspace/greedy-orthogonal-oracle", worst, 1e-9,
                     "max |greedy - exhaustive| on orthogonal-row instances");
}

// ---------------------------------------------------------------------------
// info_objectives

CheckResult check_objective_sandwich(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 301);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_pd(m, rng, 0.05, 3.0);
    const std::vector<int> k = random_proper_subset(m, rng);
    const double q = qoed_objective(fim, k);
    const double a = agnostic_objective(fim, k);
    const double b = boed_objective(fim);
    worst = std::max({worst, -q, q - a, a - b});
  }
  return make_result("objectives/sandwich", worst, 1e-9,
                     "max violation of 0 <= qoed <= agnostic <= boed");
}

CheckResult check_schur_regression_oracle(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 302);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 11);  // m in {2..12}
    const FisherMatrix fim = random_pd(m, rng, 0.2, 3.0);
    const std::vector<int> k = random_proper_subset(m, rng);
    const FimBlocks blocks = block_partition(fim, k);
    const double regression = residual_regression_trace(blocks);
    // Near-exact stabilization so the comparison probes the algebra, not
    // the regularizer.
    const double eps = 1e-12 * std::max(1.0, fim.trace() / m);
    const double schur = schur_complement(blocks, eps).trace();
    worst = std::max(worst, std::abs(schur - regression) /
                                std::max(1e-12, std::abs(regression)));
  }
  return make_result("objectives/schur-regression-oracle", worst, 1e-8,
                     "max relative gap between the two routes");
}

namespace {

struct FamilyCheckOutcome {
  double worst_margin = std::numeric_limits<double>::infinity();
  int violations = 0;
};

// argmax of the QOED objective vs the rho-scaled full-trace optimum.
template <typename KRule>
FamilyCheckOutcome run_family_check(int families, std::uint64_t seed,
                                    std::uint64_t stream, KRule&& k_of) {
  Rng rng = make_rng(seed, stream);
  FamilyCheckOutcome out;
  for (int f = 0; f < families; ++f) {
    const int m = 3 + static_cast<int>(unit(rng) * 5);
    const int count = 5 + static_cast<int>(unit(rng) * 16);  // 5..20 designs
    std::vector<FisherMatrix> fims;
    fims.reserve(count);
    for (int i = 0; i < count; ++i) fims.push_back(random_pd(m, rng, 0.1, 4.0));

    double eta_bar = 0.0;
    double beta_bar = 0.0;
    double best_qoed = -std::numeric_limits<double>::infinity();
    double best_trace = -std::numeric_limits<double>::infinity();
    double achieved = 0.0;
    for (int i = 0; i < count; ++i) {
      const std::vector<int> k = k_of(fims[i], i);
      const QuasiOptConstants c = quasiopt_constants(fims[i], k);
      eta_bar = std::max(eta_bar, c.eta);
      beta_bar = std::max(beta_bar, c.beta);
      const double q = qoed_objective(fims[i], k, 1e-12);
      if (q > best_qoed) {
        best_qoed = q;
        achieved = fims[i].trace();
      }
      best_trace = std::max(best_trace, fims[i].trace());
    }
    const double rho = (1.0 - beta_bar) / (1.0 + eta_bar);
    const double margin = achieved - rho * best_trace;
    out.worst_margin = std::min(out.worst_margin, margin);
    if (achieved < rho * best_trace * (1.0 - 1e-12)) ++out.violations;
  }
  return out;
}

}  // namespace

CheckResult check_quasiopt_bound(int families, std::uint64_t seed) {
  const FamilyCheckOutcome out = run_family_check(
      families, seed, 303, [](const FisherMatrix& fim, int) {
        std::vector<int> k(fim.dim() / 2);
        std::iota(k.begin(), k.end(), 0);
        return k;
      });
  std::ostringstream detail;
  detail << "min margin " << format_number(out.worst_margin) << " over "
         << families << " families";
  return make_result("objectives/quasiopt-bound", out.violations, 0.0,
                     detail.str());
}

CheckResult check_quasiopt_bound_adaptive(int families, std::uint64_t seed) {
  // Adaptive rule: the ceil(m/2) coordinates with the largest diagonal
  // entries, a design-dependent selection rule.
  const FamilyCheckOutcome out = run_family_check(
      families, seed, 304, [](const FisherMatrix& fim, int) {
        const int m = fim.dim();
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          if (fim.matrix()(a, a) != fim.matrix()(b, b)) {
            return fim.matrix()(a, a) > fim.matrix()(b, b);
          }
          return a < b;
        });
        std::vector<int> k(order.begin(), order.begin() + (m + 1) / 2);
        std::sort(k.begin(), k.end());
        return k;
      });
  std::ostringstream detail;
  detail << "min margin " << format_number(out.worst_margin) << " over "
         << families << " families";
  return make_result("objectives/quasiopt-bound-adaptive", out.violations, 0.0,
                     detail.str());
}

CheckResult check_quasiopt_factor_references() {
  // Empirically calibrated (eta, beta, rho) reference tuples.
  const double refs[3][3] = {{0.0011, 0.0008, 0.9981},
                             {0.0012, 0.2784, 0.7207},
                             {0.0162, 0.1421, 0.8442}};
  double worst = 0.0;
  for (const auto& ref : refs) {
    const double rho = (1.0 - ref[1]) / (1.0 + ref[0]);
    worst = std::max(worst, std::abs(rho - ref[2]));
  }
  return make_result("objectives/quasiopt-factor-references", worst, 5e-4,
                     "max |(1-beta)/(1+eta) - reference rho|");
}

CheckResult check_agnostic_counterexample() {
  const CounterexampleFamily fam = counterexample_family(0.1, 100.0);
  const std::vector<int> k = {0};
  const double agn_a = agnostic_objective(fam.A, k);
  const double agn_b = agnostic_objective(fam.B, k);
  const bool argmax_is_a = agn_a > agn_b;
  const double ratio = fam.A.trace() / fam.B.trace();
  const double expected = 1.1 / 101.0;
  const double err = std::abs(ratio - expected);
  std::ostringstream detail;
  detail << "agnostic argmax " << (argmax_is_a ? "A" : "B") << ", ratio "
         << format_number(ratio) << " < 0.5";
  CheckResult r = make_result("objectives/agnostic-counterexample", err, 1e-12,
                              detail.str());
  r.passed = r.passed && argmax_is_a && ratio < 0.5;
  return r;
}

CheckResult check_beta_bounded(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 305);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_pd(m, rng, 0.05, 5.0);
    const std::vector<int> k = random_proper_subset(m, rng);
    worst = std::max(worst, quasiopt_constants(fim, k).beta);
  }
  return make_result("objectives/beta-bounded", worst, 1.0 + 1e-8,
                     "max beta over PD instances");
}

CheckResult check_eps_monotonicity(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 306);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 8);
    const FisherMatrix fim = random_pd(m, rng, 0.05, 3.0);
    const std::vector<int> k = random_proper_subset(m, rng);
    double prev = qoed_objective(fim, k, 1e-10);
    for (double eps : {1e-8, 1e-6, 1e-4, 1e-2}) {
      const double cur = qoed_objective(fim, k, eps);
      worst = std::max(worst, prev - cur);  // larger eps must not shrink it
      prev = cur;
    }
  }
  return make_result("objectives/eps-monotonicity", worst, 1e-10,
                     "max decrease of qoed objective as eps grows");
}

CheckResult check_projection_identity(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 307);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_pd(m, rng, 0.0, 3.0);
    const EigenDecomp ed = eigendecompose(fim);
    std::vector<int> o;
    for (int i = 0; i < m; ++i) {
      if (unit(rng) < 0.5) o.push_back(i);
    }
    double tail = 0.0;
    for (int i = 0; i < m; ++i) {
      if (std::find(o.begin(), o.end(), i) == o.end()) {
        tail += ed.eigenvalues(i);
      }
    }
    const double lhs = projection_residual(fim, o);
    const double scale = std::max(1e-12, fim.trace());
    worst = std::max(worst, std::abs(lhs - tail) / scale);
  }
  return make_result("objectives/projection-identity", worst, 1e-10,
                     "relative gap to the tail eigenvalue sum");
}

CheckResult check_trace_forms_identity(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 308);
  double worst = 0.0;
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 10);
    const FisherMatrix fim = random_pd(m, rng, 0.0, 3.0);
    const EigenDecomp ed = eigendecompose(fim);
    const std::vector<int> k = random_proper_subset(m, rng);
    double via_eigen = 0.0;
    for (int i = 0; i < m; ++i) {
      double col_norm_sq = 0.0;
      for (int row : k) {
        col_norm_sq += ed.eigenvectors(row, i) * ed.eigenvectors(row, i);
      }
      via_eigen += ed.eigenvalues(i) * col_norm_sq;
    }
    const double direct = principal_submatrix_trace(fim, k);
    worst = std::max(worst, std::abs(direct - via_eigen));
  }
  return make_result("objectives/trace-forms-identity", worst, 1e-8,
                     "max |tr(F_kk) - sum lambda_i ||W_k[:,i]||^2|");
}

// ---------------------------------------------------------------------------
// dyn_models

CheckResult check_score_finite_differences(int tuples_per_model,
                                           std::uint64_t seed) {
  Rng rng = make_rng(seed, 401);
  double worst = 0.0;
  std::string worst_model;
  for (const char* name : {"linear_gaussian", "push2d", "nuisance_coupled"}) {
    const auto model = make_model(name, name == std::string("push2d") ? 0.05
                                                                      : 0.1);
    const Eigen::VectorXd lo = model->param_lo();
    const Eigen::VectorXd hi = model->param_hi();
    for (int n = 0; n < tuples_per_model; ++n) {
      Eigen::VectorXd s(model->state_dim());
      for (int i = 0; i < s.size(); ++i) s(i) = 2.0 * gauss(rng);
      Eigen::VectorXd a(model->action_dim());
      for (int i = 0; i < a.size(); ++i) {
        a(i) = model->action_lo()(i) +
               unit(rng) * (model->action_hi()(i) - model->action_lo()(i));
      }
      Eigen::VectorXd phi(model->param_dim());
      for (int i = 0; i < phi.size(); ++i) {
        phi(i) = lo(i) + (0.1 + 0.8 * unit(rng)) * (hi(i) - lo(i));
      }
      Eigen::VectorXd s_next = model->mean_map(s, a, phi);
      for (int i = 0; i < s_next.size(); ++i) s_next(i) += 0.3 * gauss(rng);

      const ScoreSample analytic = model->step_score(s, a, phi, s_next);
      const double h = 1e-5;
      for (int i = 0; i < phi.size(); ++i) {
        Eigen::VectorXd plus = phi, minus = phi;
        plus(i) += h;
        minus(i) -= h;
        const double fd = (model->step_loglik(s, a, plus, s_next) -
                           model->step_loglik(s, a, minus, s_next)) /
                          (2.0 * h);
        const double err = std::abs(analytic(i) - fd);
        if (err > worst) {
          worst = err;
          worst_model = name;
        }
      }
    }
  }
  return make_result("models/score-finite-differences", worst, 1e-5,
                     "max abs score error, worst in " + worst_model);
}

CheckResult check_score_mean_zero(int samples, std::uint64_t seed) {
  Rng rng = make_rng(seed, 402);
  double worst = 0.0;
  for (const char* name : {"linear_gaussian", "push2d", "nuisance_coupled"}) {
    const auto model = make_model(name, 0.1);
    Eigen::VectorXd s = Eigen::VectorXd::Constant(model->state_dim(), 0.8);
    Eigen::VectorXd a = 0.5 * (model->action_lo() + model->action_hi()) +
                        0.25 * (model->action_hi() - model->action_lo());
    const Eigen::VectorXd phi = model->param_center();
    const Eigen::MatrixXd fim = model->closed_form_fim(s, a, phi).matrix();

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(model->param_dim());
    for (int n = 0; n < samples; ++n) {
      mean += model->step_score(s, a, phi, model->step_sample(s, a, phi, rng));
    }
    mean /= samples;
    for (int i = 0; i < mean.size(); ++i) {
      const double std_i = std::sqrt(std::max(fim(i, i), 1e-300));
      const double bound = 3.0 * std_i / std::sqrt(double(samples));
      if (std_i > 1e-12) {
        worst = std::max(worst, std::abs(mean(i)) / bound);
      }
    }
  }
  return make_result("models/score-mean-zero", worst, 1.0,
                     "max |mean score| over its 3-sigma bound");
}

CheckResult check_loglik_quadrature() {
  const LinearGaussian1D model(0.35);
  Eigen::VectorXd s(1), a(1), phi(2);
  s << 0.8;
  a << -0.4;
  phi << 0.9, 0.2;
  const Eigen::VectorXd mean = model.mean_map(s, a, phi);
  const double sigma = model.sigma();
  const int grid = 40001;
  const double lo = mean(0) - 10.0 * sigma;
  const double hi = mean(0) + 10.0 * sigma;
  const double dx = (hi - lo) / (grid - 1);
  double integral = 0.0;
  for (int i = 0; i < grid; ++i) {
    Eigen::VectorXd sn(1);
    sn << lo + i * dx;
    const double density = std::exp(model.step_loglik(s, a, phi, sn));
    integral += (i == 0 || i == grid - 1) ? 0.5 * density : density;
  }
  integral *= dx;
  return make_result("models/loglik-quadrature", std::abs(integral - 1.0), 1e-6,
                     "|trapezoid integral of the density - 1|");
}

CheckResult check_trajectory_determinism(std::uint64_t seed) {
  double worst = 0.0;
  for (const char* name : {"linear_gaussian", "push2d", "nuisance_coupled"}) {
    const auto model = make_model(name, 0.1);
    const Eigen::VectorXd s0 = Eigen::VectorXd::Zero(model->state_dim());
    const Eigen::VectorXd phi = model->param_center();
    std::vector<Eigen::VectorXd> actions(
        25, 0.3 * (model->action_hi() - model->action_lo()));
    Rng r1 = make_rng(seed, 403);
    Rng r2 = make_rng(seed, 403);
    const Trajectory t1 = model->simulate_trajectory(phi, s0, actions, r1);
    const Trajectory t2 = model->simulate_trajectory(phi, s0, actions, r2);
    for (std::size_t t = 0; t < t1.states.size(); ++t) {
      for (int i = 0; i < t1.states[t].size(); ++i) {
        if (t1.states[t](i) != t2.states[t](i)) worst = 1.0;  // bit mismatch
      }
    }
  }
  return make_result("models/trajectory-determinism", worst, 0.0,
                     "bitwise mismatches across same-seed runs");
}

// ---------------------------------------------------------------------------
// param_estimation

CheckResult check_belief_contraction(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 501);
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < instances; ++n) {
    const int m = 2 + static_cast<int>(unit(rng) * 6);
    const FisherMatrix prior_cov_src = random_pd(m, rng, 0.1, 2.0);
    const ParamBelief prior =
        make_belief(Eigen::VectorXd::Zero(m), prior_cov_src.matrix());
    const FisherMatrix fim = random_pd(m, rng, 0.0, 5.0);
    const ParamBelief post = belief_update(prior, fim);
    // (F + S^-1)^-1 <= S in the Loewner order: check eigenvalues of the
    // difference.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prior.covariance -
                                                      post.covariance);
    worst = std::max(worst, -es.eigenvalues().minCoeff());
  }
  return make_result("estimation/belief-contraction", worst, 1e-10,
                     "max eigenvalue growth of the covariance");
}

CheckResult check_cem_monotonicity(std::uint64_t seed) {
  const LinearGaussian1D model(0.0);
  Eigen::VectorXd phi_true(2);
  phi_true << 0.9, 0.2;
  Rng rng = make_rng(seed, 502);
  Eigen::VectorXd s0(1);
  s0 << 1.0;
  std::vector<Eigen::VectorXd> actions;
  std::uniform_real_distribution<double> act(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a(1);
    a << act(rng);
    actions.push_back(a);
  }
  const Trajectory observed = model.mean_rollout(phi_true, s0, actions);

  CemConfig cfg;
  cfg.iterations = 8;
  cfg.samples_per_iter = 128;
  const CemResult res =
      cem_estimate(model, observed, default_belief(model), cfg, rng);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < res.best_objective.size(); ++i) {
    worst = std::max(worst, res.best_objective[i] - res.best_objective[i - 1]);
  }
  return make_result("estimation/cem-monotonicity", worst, 0.0,
                     "max increase of the best objective across iterations");
}

CheckResult check_cem_consistency(std::uint64_t seed) {
  const LinearGaussian1D model(0.0);
  Eigen::VectorXd phi_true(2);
  phi_true << 0.9, 0.2;

  const auto mean_error = [&](int samples) {
    double total = 0.0;
    const int trials = 5;
    for (int trial = 0; trial < trials; ++trial) {
      Rng rng = make_rng(seed, 503 + trial);
      Eigen::VectorXd s0(1);
      s0 << 1.0;
      std::vector<Eigen::VectorXd> actions;
      std::uniform_real_distribution<double> act(-1.0, 1.0);
      for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd a(1);
        a << act(rng);
        actions.push_back(a);
      }
      const Trajectory observed = model.mean_rollout(phi_true, s0, actions);
      CemConfig cfg;
      cfg.samples_per_iter = samples;
      const CemResult res =
          cem_estimate(model, observed, default_belief(model), cfg, rng);
      total += (res.estimate - phi_true).lpNorm<Eigen::Infinity>();
    }
    return total / trials;
  };

  const double err_small = mean_error(128);
  const double err_large = mean_error(2048);
  std::ostringstream detail;
  detail << "mean error " << format_number(err_small) << " @128 -> "
         << format_number(err_large) << " @2048";
  CheckResult r = make_result("estimation/cem-consistency", err_large,
                              err_small + 1e-6, detail.str());
  return r;
}

CheckResult check_cem_recovery(int n_seeds, int min_passing,
                               std::uint64_t seed) {
  const LinearGaussian1D model(0.0);
  Eigen::VectorXd phi_true(2);
  phi_true << 0.9, 0.2;
  int passing = 0;
  double worst = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng = make_rng(seed + s, 504);
    Eigen::VectorXd s0(1);
    s0 << 1.0;
    std::vector<Eigen::VectorXd> actions;
    std::uniform_real_distribution<double> act(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd a(1);
      a << act(rng);
      actions.push_back(a);
    }
    const Trajectory observed = model.mean_rollout(phi_true, s0, actions);
    const CemConfig cfg;  // published defaults: 5 iterations x 2048 samples
    const CemResult res =
        cem_estimate(model, observed, default_belief(model), cfg, rng);
    const double err = (res.estimate - phi_true).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, err);
    if (err <= 1e-2) ++passing;
  }
  std::ostringstream detail;
  detail << passing << "/" << n_seeds << " seeds within 1e-2, worst error "
         << format_number(worst);
  CheckResult r;
  r.name = "estimation/cem-recovery";
  r.measured = n_seeds - passing;
  r.tolerance = n_seeds - min_passing;
  r.passed = passing >= min_passing;
  r.detail = detail.str();
  return r;
}

// ---------------------------------------------------------------------------
// design_loop

CheckResult check_bonus_dominance(int instances, std::uint64_t seed) {
  Rng rng = make_rng(seed, 601);
  const NuisanceCoupled model(0.15);
  const ParamBelief belief = default_belief(model);
  ExplorationConfig cfg;
  cfg.bonus_samples = 24;
  cfg.alpha = 1.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < instances; ++n) {
    std::vector<Eigen::VectorXd> actions;
    std::uniform_real_distribution<double> act(-1.0, 1.0);
    for (int t = 0; t < cfg.h_steps(); ++t) {
      Eigen::VectorXd a(model.action_dim());
      for (int i = 0; i < a.size(); ++i) a(i) = act(rng);
      actions.push_back(a);
    }
    // Same generator state for the three kinds: identical trajectories, so
    // the sandwich holds design-by-design.
    const std::uint64_t eval_seed = rng();
    const auto value = [&](ObjectiveKind kind) {
      Rng eval_rng = make_rng(eval_seed);
      return evaluate_design(model, belief, actions, kind, cfg,
                             cfg.bonus_samples, eval_rng);
    };
    const double b = value(ObjectiveKind::kBoed);
    const double a = value(ObjectiveKind::kAgnostic);
    const double q = value(ObjectiveKind::kQoed);
    worst = std::max({worst, q - a, a - b});
  }
  return make_result("design/bonus-dominance", worst, 1e-9,
                     "max violation of qoed <= agnostic <= boed per design");
}

namespace {

ExplorationConfig tiny_exploration_config() {
  ExplorationConfig cfg;
  cfg.horizon_seconds = 1.0;  // 20 steps
  cfg.max_rounds = 3;
  cfg.design_iterations = 2;
  cfg.design_samples = 12;
  cfg.bonus_samples = 12;
  cfg.belief_fim_samples = 32;
  cfg.eval_pairs = 6;
  return cfg;
}

CemConfig tiny_cem_config() {
  CemConfig cfg;
  cfg.iterations = 3;
  cfg.samples_per_iter = 96;
  cfg.rollouts_per_candidate = 4;
  return cfg;
}

}  // namespace

CheckResult check_loop_termination(std::uint64_t seed) {
  TrueSystem truth;
  truth.model = std::make_shared<NuisanceCoupled>(0.15);
  truth.phi = Eigen::Map<const Eigen::VectorXd>(
      default_true_phi("nuisance_coupled").data(), 4);
  truth.s0 = Eigen::VectorXd::Zero(2);
  const ExplorationConfig expl = tiny_exploration_config();
  const CemConfig cem = tiny_cem_config();
  Rng rng = make_rng(seed, 602);
  const ExplorationReport report =
      run_exploration(truth, *truth.model, ObjectiveKind::kQoed, expl, cem, rng);
  const int rounds = static_cast<int>(report.rounds.size());
  return make_result("design/loop-termination", rounds, expl.max_rounds,
                     "rounds executed vs max_rounds");
}

CheckResult check_quasiopt_end_to_end(int designs, std::uint64_t seed) {
  // Evaluated design set on the coupled model: FIMs of random open-loop
  // designs, fixed critical pair, exact arithmetic on the estimated FIMs.
  Rng rng = make_rng(seed, 603);
  const NuisanceCoupled model(0.15);
  const Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(
      default_true_phi("nuisance_coupled").data(), 4);
  const Eigen::VectorXd s0 = Eigen::VectorXd::Zero(2);
  const std::vector<int> k = {0, 1};

  std::uniform_real_distribution<double> act(-1.0, 1.0);
  double eta_bar = 0.0, beta_bar = 0.0;
  double best_qoed = -std::numeric_limits<double>::infinity();
  double best_trace = 0.0, achieved = 0.0;
  for (int d = 0; d < designs; ++d) {
    std::vector<Eigen::VectorXd> actions;
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd a(2);
      a << act(rng), act(rng);
      actions.push_back(a);
    }
    std::vector<ScoreSample> scores;
    for (int i = 0; i < 48; ++i) {
      const Trajectory traj = model.simulate_trajectory(phi, s0, actions, rng);
      scores.push_back(model.trajectory_score(traj, phi));
    }
    const FisherMatrix fim = estimate_fim(scores);
    const QuasiOptConstants c = quasiopt_constants(fim, k);
    eta_bar = std::max(eta_bar, c.eta);
    beta_bar = std::max(beta_bar, c.beta);
    const double q = qoed_objective(fim, k, 1e-12);
    if (q > best_qoed) {
      best_qoed = q;
      achieved = fim.trace();
    }
    best_trace = std::max(best_trace, fim.trace());
  }
  const double rho = (1.0 - beta_bar) / (1.0 + eta_bar);
  const double shortfall = rho * best_trace - achieved;  // must be <= 0
  std::ostringstream detail;
  detail << "rho " << format_number(rho) << ", achieved "
         << format_number(achieved) << ", optimum " << format_number(best_trace);
  return make_result("design/quasiopt-end-to-end", shortfall,
                     1e-12 * best_trace, detail.str());
}

CheckResult check_belief_trace_monotone(std::uint64_t seed) {
  TrueSystem truth;
  truth.model = std::make_shared<LinearGaussian1D>(0.1);
  truth.phi = Eigen::Map<const Eigen::VectorXd>(
      default_true_phi("linear_gaussian").data(), 2);
  truth.s0 = Eigen::VectorXd::Zero(1);
  ExplorationConfig expl = tiny_exploration_config();
  expl.max_rounds = 5;
  expl.delta_var = 0.0;  // run all rounds
  const CemConfig cem = tiny_cem_config();
  Rng rng = make_rng(seed, 604);
  const ExplorationReport report = run_exploration(
      truth, *truth.model, ObjectiveKind::kBoed, expl, cem, rng);
  double worst = -std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::infinity();
  for (const RoundRecord& r : report.rounds) {
    worst = std::max(worst, r.belief_trace - prev);
    prev = r.belief_trace;
  }
  return make_result("design/belief-trace-monotone", worst, 1e-10,
                     "max increase of tr(Sigma) across rounds");
}

// ---------------------------------------------------------------------------

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  std::vector<CheckResult> results;
  results.push_back(check_eigen_direction_information(100, 12, seed));
  results.push_back(check_fim_convergence(1000, 100000, seed));
  results.push_back(check_trace_eigenvalue_sum(200, seed));
  results.push_back(check_ky_fan_truncation(1000, seed));
  results.push_back(check_fim_permutation_invariance(seed));

  results.push_back(check_greedy_monotonicity(200, seed));
  results.push_back(check_cosine_soundness(500, seed));
  results.push_back(check_threshold_dichotomy(300, seed));
  results.push_back(check_duplicate_rows(seed));
  results.push_back(check_greedy_orthogonal_oracle(200, seed));

  results.push_back(check_objective_sandwich(1000, seed));
  results.push_back(check_schur_regression_oracle(1000, seed));
  results.push_back(check_quasiopt_bound(200, seed));
  results.push_back(check_quasiopt_bound_adaptive(200, seed));
  results.push_back(check_quasiopt_factor_references());
  results.push_back(check_agnostic_counterexample());
  results.push_back(check_beta_bounded(500, seed));
  results.push_back(check_eps_monotonicity(300, seed));
  results.push_back(check_projection_identity(1000, seed));
  results.push_back(check_trace_forms_identity(1000, seed));

  results.push_back(check_score_finite_differences(1000, seed));
  results.push_back(check_score_mean_zero(20000, seed));
  results.push_back(check_loglik_quadrature());
  results.push_back(check_trajectory_determinism(seed));

  results.push_back(check_belief_contraction(300, seed));
  results.push_back(check_cem_monotonicity(seed));
  results.push_back(check_cem_consistency(seed));
  results.push_back(check_cem_recovery(5, 4, seed));

  results.push_back(check_bonus_dominance(20, seed));
  results.push_back(check_loop_termination(seed));
  results.push_back(check_quasiopt_end_to_end(24, seed));
  results.push_back(check_belief_trace_monotone(seed));
  return results;
}

int print_check_results(std::ostream& os,
                        const std::vector<CheckResult>& results) {
  int failures = 0;
  for (const CheckResult& r : results) {
    os << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "  measured="
       << format_number(r.measured) << " tolerance=" << format_number(r.tolerance);
    if (!r.detail.empty()) os << "  (" << r.detail << ")";
    os << "\n";
    if (!r.passed) ++failures;
  }
  os << (failures == 0 ? "verification OK: " : "verification FAILED: ")
     << (results.size() - failures) << "/" << results.size() << " checks passed\n";
  return failures;
}

}  // namespace qoed
