#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qoed/error.hpp"
#include "qoed/fisher.hpp"

using namespace qoed;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("estimate_fim: single sample is its outer product") {
  const FisherMatrix fim = estimate_fim({vec2(1.0, 2.0)});
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 2, 2, 4;
  CHECK((fim.matrix() - expected).norm() == doctest::Approx(0.0));
  CHECK(fim.sample_count() == 1);
  CHECK(!fim.closed_form());
}

TEST_CASE("estimate_fim: symmetric pair averages to a diagonal") {
  const FisherMatrix fim = estimate_fim({vec2(1.0, 0.0), vec2(-1.0, 0.0)});
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, 0, 0;
  CHECK((fim.matrix() - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("estimate_fim: error paths") {
  CHECK_THROWS_WITH_AS(estimate_fim({}), doctest::Contains("no-samples"), Error);
  Eigen::VectorXd g3(3);
  g3 << 1, 2, 3;
  CHECK_THROWS_WITH_AS(estimate_fim({vec2(1, 2), g3}),
                       doctest::Contains("dim-mismatch"), Error);
  CHECK_THROWS_WITH_AS(
      estimate_fim({vec2(std::numeric_limits<double>::quiet_NaN(), 0.0)}),
      doctest::Contains("non-finite-score"), Error);
}

TEST_CASE("estimate_fim: permutation of samples leaves the estimate intact") {
  Rng rng = make_rng(3);
  std::normal_distribution<double> gauss(0.0, 4.0);
  std::vector<ScoreSample> scores;
  for (int i = 0; i < 257; ++i) {
    Eigen::VectorXd g(3);
    g << gauss(rng), gauss(rng), gauss(rng);
    scores.push_back(g);
  }
  const Eigen::MatrixXd a = estimate_fim(scores).matrix();
  std::reverse(scores.begin(), scores.end());
  const Eigen::MatrixXd b = estimate_fim(scores).matrix();
  CHECK((a - b).norm() / a.norm() <= 1e-12);
}

TEST_CASE("FisherMatrix: symmetrizes and rejects garbage") {
  Eigen::MatrixXd skewed(2, 2);
  skewed << 1.0, 0.5 + 1e-13, 0.5 - 1e-13, 1.0;
  const FisherMatrix fim(skewed, 0);
  CHECK(fim.matrix()(0, 1) == fim.matrix()(1, 0));

  Eigen::MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_WITH_AS(FisherMatrix(indef, 0), doctest::Contains("not-psd"),
                       Error);
  CHECK_THROWS_WITH_AS(FisherMatrix(Eigen::MatrixXd::Zero(2, 3), 0),
                       doctest::Contains("not-square"), Error);
}

TEST_CASE("eigendecompose: diagonal and identity cases") {
  Eigen::MatrixXd d(2, 2);
  d << 1, 0, 0, 3;
  const EigenDecomp ed = eigendecompose(FisherMatrix(d, 0));
  CHECK(ed.eigenvalues(0) == doctest::Approx(3.0));
  CHECK(ed.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(std::abs(ed.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(ed.eigenvectors(0, 1)) == doctest::Approx(1.0));
  // sign convention: first nonzero component positive
  CHECK(ed.eigenvectors(1, 0) > 0.0);
  CHECK(ed.eigenvectors(0, 1) > 0.0);

  const EigenDecomp id4 =
      eigendecompose(FisherMatrix(Eigen::MatrixXd::Identity(4, 4), 0));
  for (int i = 0; i < 4; ++i) {
    CHECK(id4.eigenvalues(i) == doctest::Approx(1.0));
  }
}

TEST_CASE("eigendecompose: hand-derived 2x2 spectrum") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 1;
  const EigenDecomp ed = eigendecompose(FisherMatrix(m, 0));
  const double s5 = std::sqrt(5.0);
  CHECK(ed.eigenvalues(0) == doctest::Approx((3.0 + s5) / 2.0).epsilon(1e-12));
  CHECK(ed.eigenvalues(1) == doctest::Approx((3.0 - s5) / 2.0).epsilon(1e-12));
}

TEST_CASE("eigendecompose: orthonormality, reconstruction, clamping") {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 7;
    const Eigen::MatrixXd spd = oracles::random_spd(m, rng, 0.0, 5.0);
    const FisherMatrix fim(spd, 0);
    const EigenDecomp ed = eigendecompose(fim);
    const Eigen::MatrixXd wtw =
        ed.eigenvectors.transpose() * ed.eigenvectors;
    CHECK((wtw - Eigen::MatrixXd::Identity(m, m)).norm() <= 1e-10);
    const Eigen::MatrixXd rebuilt = ed.eigenvectors *
                                    ed.eigenvalues.asDiagonal() *
                                    ed.eigenvectors.transpose();
    CHECK((rebuilt - fim.matrix()).norm() <=
          1e-8 * std::max(1.0, fim.matrix().norm()));
    for (int i = 0; i + 1 < m; ++i) {
      CHECK(ed.eigenvalues(i) >= ed.eigenvalues(i + 1));
    }
    CHECK(ed.eigenvalues(m - 1) >= 0.0);
  }

  // a slightly negative eigenvalue within the PSD tolerance clamps to zero
  Eigen::MatrixXd dirs(2, 2);
  dirs << 1, 1, 1, -1;
  dirs /= std::sqrt(2.0);
  Eigen::VectorXd vals(2);
  vals << 1.0, -1e-12;
  const FisherMatrix fim(dirs * vals.asDiagonal() * dirs.transpose(), 0);
  const EigenDecomp ed = eigendecompose(fim);
  CHECK(ed.eigenvalues(1) == 0.0);
}

TEST_CASE("directional_information: quadratic form with unit directions") {
  Eigen::MatrixXd d(2, 2);
  d << 3, 0, 0, 1;
  const FisherMatrix fim(d, 0);
  CHECK(directional_information(fim, vec2(1, 0)) == doctest::Approx(3.0));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(directional_information(fim, vec2(inv_sqrt2, inv_sqrt2)) ==
        doctest::Approx(2.0));
  CHECK_THROWS_WITH_AS(directional_information(fim, vec2(1, 1)),
                       doctest::Contains("not-normalized"), Error);
}

TEST_CASE("directional_information along eigenvectors recovers eigenvalues") {
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + trial % 6;
    const FisherMatrix fim(oracles::random_spd(m, rng, 0.0, 4.0), 0);
    const EigenDecomp ed = eigendecompose(fim);
    for (int i = 0; i < m; ++i) {
      const double info = directional_information(fim, ed.eigenvectors.col(i));
      CHECK(std::abs(info - ed.eigenvalues(i)) <=
            1e-8 * (1.0 + ed.eigenvalues(0)));
    }
  }
}

TEST_CASE("crlb_trace: diagonal arithmetic and degeneracy signal") {
  CHECK(crlb_trace(FisherMatrix(Eigen::MatrixXd::Identity(2, 2), 0), 1e-12) ==
        doctest::Approx(2.0));
  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 1;
  CHECK(crlb_trace(FisherMatrix(d, 0), 1e-12) == doctest::Approx(1.25));

  Eigen::MatrixXd degenerate(2, 2);
  degenerate << 1, 0, 0, 0;
  const double bound = crlb_trace(FisherMatrix(degenerate, 0), 1e-6);
  CHECK(bound == doctest::Approx(1e6 + 1.0).epsilon(1e-5));
  CHECK_THROWS_WITH_AS(crlb_trace(FisherMatrix(d, 0), 0.0),
                       doctest::Contains("bad-eps"), Error);
}

TEST_CASE("principal_submatrix_trace: direct sums and the eigen identity") {
  Eigen::MatrixXd d3 = Eigen::Vector3d(3, 2, 1).asDiagonal();
  CHECK(principal_submatrix_trace(FisherMatrix(d3, 0), {0, 2}) ==
        doctest::Approx(4.0));
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 1;
  CHECK(principal_submatrix_trace(FisherMatrix(m, 0), {0}) ==
        doctest::Approx(2.0));
  CHECK_THROWS_WITH_AS(principal_submatrix_trace(FisherMatrix(m, 0), {2}),
                       doctest::Contains("bad-index"), Error);
  CHECK_THROWS_WITH_AS(principal_submatrix_trace(FisherMatrix(m, 0), {}),
                       doctest::Contains("bad-index"), Error);

  // tr(F[k,k]) = sum_i lambda_i ||W_k[:,i]||^2 on a random instance
  Rng rng = make_rng(23);
  const FisherMatrix fim(oracles::random_spd(6, rng), 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim.matrix());
  const std::vector<int> k = {0, 3, 4};
  double via_eigen = 0.0;
  for (int i = 0; i < 6; ++i) {
    double norm_sq = 0.0;
    for (int row : k) norm_sq += es.eigenvectors()(row, i) * es.eigenvectors()(row, i);
    via_eigen += es.eigenvalues()(i) * norm_sq;
  }
  CHECK(principal_submatrix_trace(fim, k) ==
        doctest::Approx(via_eigen).epsilon(1e-8));
}

TEST_CASE("estimate_fim trace equals eigenvalue sum") {
  Rng rng = make_rng(29);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::vector<ScoreSample> scores;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd g(5);
    for (int j = 0; j < 5; ++j) g(j) = gauss(rng);
    scores.push_back(g);
  }
  const FisherMatrix fim = estimate_fim(scores);
  const EigenDecomp ed = eigendecompose(fim);
  CHECK(std::abs(fim.trace() - ed.eigenvalues.sum()) <=
        1e-10 * std::abs(fim.trace()));
}
