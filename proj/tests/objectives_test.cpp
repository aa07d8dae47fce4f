#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qoed/error.hpp"
#include "qoed/models.hpp"
#include "qoed/objectives.hpp"

using namespace qoed;

namespace {

FisherMatrix fim_2x2_coupled() {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 1;
  return FisherMatrix(m, 0);
}

FisherMatrix diag_fim(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return FisherMatrix(Eigen::MatrixXd(v.asDiagonal()), 0);
}

// Reassemble the full matrix from blocks under the induced permutation.
Eigen::MatrixXd reassemble(const FimBlocks& blocks, int m) {
  Eigen::MatrixXd full(m, m);
  const int nk = static_cast<int>(blocks.k.size());
  const int nb = static_cast<int>(blocks.k_bar.size());
  for (int a = 0; a < nk; ++a) {
    for (int b = 0; b < nk; ++b) {
      full(blocks.k[a], blocks.k[b]) = blocks.F_kk(a, b);
    }
    for (int b = 0; b < nb; ++b) {
      full(blocks.k[a], blocks.k_bar[b]) = blocks.F_kkbar(a, b);
      full(blocks.k_bar[b], blocks.k[a]) = blocks.F_kkbar(a, b);
    }
  }
  for (int a = 0; a < nb; ++a) {
    for (int b = 0; b < nb; ++b) {
      full(blocks.k_bar[a], blocks.k_bar[b]) = blocks.F_kbarkbar(a, b);
    }
  }
  return full;
}

}  // namespace

TEST_CASE("block_partition: 2x2 blocks and reassembly round-trip") {
  const FimBlocks blocks = block_partition(fim_2x2_coupled(), {0});
  CHECK(blocks.F_kk(0, 0) == doctest::Approx(2.0));
  CHECK(blocks.F_kkbar(0, 0) == doctest::Approx(1.0));
  CHECK(blocks.F_kbarkbar(0, 0) == doctest::Approx(1.0));

  Rng rng = make_rng(59);
  const FisherMatrix fim(oracles::random_spd(5, rng), 0);
  const FimBlocks b5 = block_partition(fim, {1, 3});
  CHECK((reassemble(b5, 5) - fim.matrix()).norm() <= 1e-12);
}

TEST_CASE("block_partition: block-diagonal input has零 coupling") {
  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(4, 4);
  bd.topLeftCorner(2, 2) << 2, 0.3, 0.3, 1;
  bd.bottomRightCorner(2, 2) << 4, -0.2, -0.2, 5;
  const FimBlocks blocks = block_partition(FisherMatrix(bd, 0), {0, 1});
  CHECK(blocks.F_kkbar.norm() == doctest::Approx(0.0));
}

TEST_CASE("block_partition: degenerate index sets are rejected") {
  const FisherMatrix fim = fim_2x2_coupled();
  CHECK_THROWS_WITH_AS(block_partition(fim, {}),
                       doctest::Contains("degenerate-partition"), Error);
  CHECK_THROWS_WITH_AS(block_partition(fim, {0, 1}),
                       doctest::Contains("degenerate-partition"), Error);
  CHECK_THROWS_WITH_AS(block_partition(fim, {0, 0}),
                       doctest::Contains("degenerate-partition"), Error);
  CHECK_THROWS_WITH_AS(block_partition(fim, {5}),
                       doctest::Contains("degenerate-partition"), Error);
}

TEST_CASE("schur_complement: direct arithmetic and the zero-coupling case") {
  const FimBlocks blocks = block_partition(fim_2x2_coupled(), {0});
  CHECK(schur_complement(blocks, 1e-12)(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-9));

  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(3, 3);
  bd(0, 0) = 2;
  bd(1, 1) = 3;
  bd(2, 2) = 4;
  const FimBlocks diag_blocks = block_partition(FisherMatrix(bd, 0), {0, 1});
  const Eigen::MatrixXd schur = schur_complement(diag_blocks, 1e-12);
  CHECK((schur - diag_blocks.F_kk).norm() <= 1e-9);
  CHECK_THROWS_WITH_AS(schur_complement(diag_blocks, -1.0),
                       doctest::Contains("bad-eps"), Error);
}

TEST_CASE("schur_complement: perfectly predictable score collapses to zero") {
  // g_k is an exact linear image of g_kbar, so the adjusted information
  // must vanish as eps -> 0.
  Rng rng = make_rng(61);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd map(2, 2);
  map << 0.7, -0.4, 0.2, 1.1;
  std::vector<ScoreSample> scores;
  for (int i = 0; i < 4000; ++i) {
    Eigen::VectorXd h(2);
    h << gauss(rng), gauss(rng);
    Eigen::VectorXd g(4);
    g.head(2) = map * h;
    g.tail(2) = h;
    scores.push_back(g);
  }
  const FisherMatrix fim = estimate_fim(scores);
  const double adjusted = qoed_objective(fim, {0, 1}, 1e-12);
  CHECK(std::abs(adjusted) <= 1e-6 * fim.trace());
  const double regression =
      residual_regression_trace(block_partition(fim, {0, 1}));
  CHECK(std::abs(regression) <= 1e-6 * fim.trace());
}

TEST_CASE("boed/agnostic objectives on the proof matrices") {
  CHECK(boed_objective(FisherMatrix(Eigen::MatrixXd::Identity(3, 3), 0)) ==
        doctest::Approx(3.0));
  CHECK(boed_objective(diag_fim({1.1, 0.0})) == doctest::Approx(1.1));
  CHECK(boed_objective(diag_fim({1.0, 100.0})) == doctest::Approx(101.0));

  CHECK(agnostic_objective(diag_fim({1.1, 0.0}), {0}) == doctest::Approx(1.1));
  CHECK(agnostic_objective(diag_fim({1.0, 100.0}), {0}) == doctest::Approx(1.0));
  CHECK(agnostic_objective(diag_fim({1.0, 2.0}), {}) == doctest::Approx(0.0));

  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(4, 4);
  bd.topLeftCorner(2, 2) << 2, 0.5, 0.5, 3;
  bd.bottomRightCorner(2, 2) << 1, 0, 0, 7;
  CHECK(agnostic_objective(FisherMatrix(bd, 0), {0, 1}) == doctest::Approx(5.0));
}

TEST_CASE("qoed_objective: base cases and degenerate index sets") {
  CHECK(qoed_objective(fim_2x2_coupled(), {0}, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // block-diagonal: adjusted equals agnostic
  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(3, 3);
  bd << 2, 0.4, 0, 0.4, 1, 0, 0, 0, 5;
  const FisherMatrix fim(bd, 0);
  CHECK(qoed_objective(fim, {0, 1}, 1e-12) ==
        doctest::Approx(agnostic_objective(fim, {0, 1})).epsilon(1e-9));
  // full and empty index sets
  CHECK(qoed_objective(fim, {0, 1, 2}) == doctest::Approx(fim.trace()));
  CHECK(qoed_objective(fim, {}) == doctest::Approx(0.0));
}

TEST_CASE("residual_regression_trace: the independent route agrees") {
  const FimBlocks blocks = block_partition(fim_2x2_coupled(), {0});
  CHECK(residual_regression_trace(blocks) == doctest::Approx(1.0));

  Rng rng = make_rng(67);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 11;
    const FisherMatrix fim(oracles::random_spd(m, rng, 0.2, 3.0), 0);
    std::vector<int> k;
    for (int i = 0; i < m; ++i) {
      if (unit(rng) < 0.5) k.push_back(i);
    }
    if (k.empty()) k.push_back(0);
    if (static_cast<int>(k.size()) == m) k.pop_back();
    const double via_regression =
        residual_regression_trace(block_partition(fim, k));
    const double via_schur = qoed_objective(fim, k, 1e-12);
    CHECK(via_schur ==
          doctest::Approx(via_regression).epsilon(1e-8));
  }
}

TEST_CASE("quasiopt_constants: hand algebra and reference tuples") {
  const QuasiOptConstants c = quasiopt_constants(fim_2x2_coupled(), {0});
  CHECK(c.eta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.beta == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c.rho == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  // construct a 2x2 FIM realizing each empirical (eta, beta) pair and check
  // the factor the constants imply
  const double refs[3][3] = {{0.0011, 0.0008, 0.9981},
                             {0.0012, 0.2784, 0.7207},
                             {0.0162, 0.1421, 0.8442}};
  for (const auto& ref : refs) {
    const double eta = ref[0], beta = ref[1];
    Eigen::MatrixXd m(2, 2);
    m << 1.0, std::sqrt(beta * eta), std::sqrt(beta * eta), eta;
    const QuasiOptConstants qc = quasiopt_constants(FisherMatrix(m, 0), {0});
    CHECK(qc.eta == doctest::Approx(eta).epsilon(1e-9));
    CHECK(qc.beta == doctest::Approx(beta).epsilon(1e-6));
    CHECK(std::abs(qc.rho - ref[2]) <= 5e-4);
  }

  CHECK_THROWS_WITH_AS(quasiopt_constants(diag_fim({0.0, 1.0}), {0}),
                       doctest::Contains("degenerate-critical-block"), Error);
}

TEST_CASE("projection_residual: diagonal case and the tail-sum identity") {
  const FisherMatrix d3 = diag_fim({3.0, 2.0, 1.0});
  CHECK(projection_residual(d3, {0}) == doctest::Approx(3.0));
  CHECK(projection_residual(d3, {0, 1, 2}) == doctest::Approx(0.0));

  Rng rng = make_rng(71);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const FisherMatrix fim(oracles::random_spd(7, rng, 0.0, 4.0), 0);
    const EigenDecomp ed = eigendecompose(fim);
    std::vector<int> o;
    double tail = 0.0;
    for (int i = 0; i < 7; ++i) {
      if (unit(rng) < 0.5) {
        o.push_back(i);
      } else {
        tail += ed.eigenvalues(i);
      }
    }
    CHECK(projection_residual(fim, o) ==
          doctest::Approx(tail).epsilon(1e-10));
  }
}

TEST_CASE("sandwich: 0 <= qoed <= agnostic <= boed") {
  Rng rng = make_rng(73);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 9;
    const FisherMatrix fim(oracles::random_spd(m, rng, 0.05, 3.0), 0);
    std::vector<int> k;
    for (int i = 0; i < m; ++i) {
      if (unit(rng) < 0.5) k.push_back(i);
    }
    if (k.empty()) k.push_back(0);
    if (static_cast<int>(k.size()) == m) k.pop_back();
    const double q = qoed_objective(fim, k);
    const double a = agnostic_objective(fim, k);
    const double b = boed_objective(fim);
    CHECK(q >= -1e-9);
    CHECK(q <= a + 1e-9);
    CHECK(a <= b + 1e-9);
  }
}

TEST_CASE("qoed_objective grows with the stabilization eps") {
  Rng rng = make_rng(79);
  const FisherMatrix fim(oracles::random_spd(5, rng, 0.05, 2.0), 0);
  const std::vector<int> k = {0, 2};
  double prev = qoed_objective(fim, k, 1e-10);
  for (double eps : {1e-8, 1e-6, 1e-4, 1e-2}) {
    const double cur = qoed_objective(fim, k, eps);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("qoed_bonus: zero scores give a zero bonus and empty selection") {
  std::vector<ScoreSample> scores(16, Eigen::VectorXd::Zero(3));
  const BonusResult result = qoed_bonus(scores, BonusConfig{});
  CHECK(result.bonus == doctest::Approx(0.0));
  CHECK(result.selection.k.empty());
  CHECK(result.split.observable_idx.empty());
}

TEST_CASE("qoed_bonus: scores confined to one coordinate select it") {
  Rng rng = make_rng(83);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ScoreSample> scores;
  double second_moment = 0.0;
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd g(2);
    g << gauss(rng), 0.0;
    second_moment += g(0) * g(0);
    scores.push_back(g);
  }
  second_moment /= 2000;
  const BonusResult result = qoed_bonus(scores, BonusConfig{});
  CHECK(result.selection.k == std::vector<int>{0});
  CHECK(result.bonus == doctest::Approx(second_moment).epsilon(1e-9));
}

TEST_CASE("qoed_bonus: Monte-Carlo pipeline tracks the closed-form pipeline") {
  const LinearGaussian1D model(0.1);
  Eigen::VectorXd s(1), a(1), phi(2);
  s << 1.0;
  a << 0.7;
  phi << 0.9, 0.2;

  Rng rng = make_rng(89);
  std::vector<ScoreSample> scores;
  for (int i = 0; i < 20000; ++i) {
    scores.push_back(model.step_score(s, a, phi,
                                      model.step_sample(s, a, phi, rng)));
  }
  const BonusConfig config;
  const BonusResult mc = qoed_bonus(scores, config);

  // same pipeline on the exact per-step FIM
  const FisherMatrix exact = model.closed_form_fim(s, a, phi);
  const EigenDecomp ed = eigendecompose(exact);
  const EigenSplit split = split_observable(ed, config.delta_eig, config.alpha_eig);
  REQUIRE(!split.observable_idx.empty());
  const SelectionResult sel = select_identifiable(
      split.W_o, static_cast<int>(split.observable_idx.size()),
      config.delta_cos);
  const double closed = qoed_objective(exact, sel.k, config.eps);
  CHECK(std::abs(mc.bonus - closed) <= 0.05 * std::abs(closed));
}

TEST_CASE("quasi-optimality bound holds on random families and the proof family fails "
          "for agnostic") {
  // quasi-optimality over a random finite family with fixed k
  Rng rng = make_rng(97);
  for (int family = 0; family < 20; ++family) {
    const int m = 4;
    std::vector<FisherMatrix> fims;
    for (int i = 0; i < 8; ++i) {
      fims.emplace_back(oracles::random_spd(m, rng, 0.1, 4.0), 0);
    }
    const std::vector<int> k = {0, 1};
    double eta_bar = 0.0, beta_bar = 0.0, best_q = -1e300, achieved = 0.0,
           best_trace = 0.0;
    for (const FisherMatrix& fim : fims) {
      const QuasiOptConstants c = quasiopt_constants(fim, k);
      eta_bar = std::max(eta_bar, c.eta);
      beta_bar = std::max(beta_bar, c.beta);
      const double q = qoed_objective(fim, k, 1e-12);
      if (q > best_q) {
        best_q = q;
        achieved = fim.trace();
      }
      best_trace = std::max(best_trace, fim.trace());
    }
    const double rho = (1.0 - beta_bar) / (1.0 + eta_bar);
    CHECK(achieved >= rho * best_trace * (1.0 - 1e-12));
  }

  // agnostic on the counterexample family: argmax A, vanishing ratio
  const CounterexampleFamily fam = counterexample_family(0.1, 100.0);
  CHECK(agnostic_objective(fam.A, {0}) > agnostic_objective(fam.B, {0}));
  CHECK(boed_objective(fam.B) > boed_objective(fam.A));
  const double ratio = fam.A.trace() / fam.B.trace();
  CHECK(ratio == doctest::Approx(1.1 / 101.0).epsilon(1e-12));
  CHECK(ratio < 0.5);
}

TEST_CASE("beta stays within [0, 1] on PD instances") {
  Rng rng = make_rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 9;
    const FisherMatrix fim(oracles::random_spd(m, rng, 0.05, 5.0), 0);
    std::vector<int> k = {0};
    if (m > 2 && trial % 2) k.push_back(1);
    const QuasiOptConstants c = quasiopt_constants(fim, k);
    CHECK(c.beta >= 0.0);
    CHECK(c.beta <= 1.0 + 1e-8);
  }
}

TEST_CASE("default stabilization eps is scale aware") {
  CHECK(default_stabilization_eps(diag_fim({1.0, 1.0})) ==
        doctest::Approx(1e-8));
  CHECK(default_stabilization_eps(diag_fim({300.0, 300.0})) ==
        doctest::Approx(3e-6));
}
