#ifndef QOED_VERIFY_HPP_
#define QOED_VERIFY_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qoed {

// Outcome of one identity / bound / oracle check. `measured` is the worst
// observed error (or margin) and `tolerance` what it was held against.
struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// --- fisher_core -----------------------------------------------------------
CheckResult check_eigen_direction_information(int n_matrices, int max_dim,
                                    std::uint64_t seed);
CheckResult check_fim_convergence(long n_small, long n_large,
                                  std::uint64_t seed);
CheckResult check_trace_eigenvalue_sum(int instances, std::uint64_t seed);
CheckResult check_ky_fan_truncation(int instances, std::uint64_t seed);
CheckResult check_fim_permutation_invariance(std::uint64_t seed);

// --- subspace_select -------------------------------------------------------
CheckResult check_greedy_monotonicity(int instances, std::uint64_t seed);
CheckResult check_cosine_soundness(int instances, std::uint64_t seed);
CheckResult check_threshold_dichotomy(int instances, std::uint64_t seed);
CheckResult check_duplicate_rows(std::uint64_t seed);
CheckResult check_greedy_orthogonal_oracle(int instances, std::uint64_t seed);

// --- info_objectives -------------------------------------------------------
CheckResult check_objective_sandwich(int instances, std::uint64_t seed);
CheckResult check_schur_regression_oracle(int instances, std::uint64_t seed);
CheckResult check_quasiopt_bound(int families, std::uint64_t seed);
CheckResult check_quasiopt_bound_adaptive(int families, std::uint64_t seed);
CheckResult check_quasiopt_factor_references();
CheckResult check_agnostic_counterexample();
CheckResult check_beta_bounded(int instances, std::uint64_t seed);
CheckResult check_eps_monotonicity(int instances, std::uint64_t seed);
CheckResult check_projection_identity(int instances, std::uint64_t seed);
CheckResult check_trace_forms_identity(int instances, std::uint64_t seed);

// --- dyn_models ------------------------------------------------------------
CheckResult check_score_finite_differences(int tuples_per_model,
                                           std::uint64_t seed);
CheckResult check_score_mean_zero(int samples, std::uint64_t seed);
CheckResult check_loglik_quadrature();
CheckResult check_trajectory_determinism(std::uint64_t seed);

// --- param_estimation ------------------------------------------------------
CheckResult check_belief_contraction(int instances, std::uint64_t seed);
CheckResult check_cem_monotonicity(std::uint64_t seed);
CheckResult check_cem_consistency(std::uint64_t seed);
CheckResult check_cem_recovery(int n_seeds, int min_passing, std::uint64_t seed);

// --- design_loop -----------------------------------------------------------
CheckResult check_bonus_dominance(int instances, std::uint64_t seed);
CheckResult check_loop_termination(std::uint64_t seed);
CheckResult check_quasiopt_end_to_end(int designs, std::uint64_t seed);
CheckResult check_belief_trace_monotone(std::uint64_t seed);

// Every check above at verification sizes (docs/verification.md maps them
// to the properties they cover).
std::vector<CheckResult> run_verification(std::uint64_t seed);

// Prints one pass/fail line per check; returns the number of failures.
int print_check_results(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace qoed

#endif  // QOED_VERIFY_HPP_
