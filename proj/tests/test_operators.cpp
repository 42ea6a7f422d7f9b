#include "framelab/operators.hpp"

#include "framelab/oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace framelab;

namespace {

const SpaceSpec l2_2(2, Exponent::finite(2.0));
const SpaceSpec l2_3(3, Exponent::finite(2.0));

}  // namespace

TEST_CASE("op_norm closed forms") {
  CHECK(op_norm(Mat::Identity(2, 2), l2_2, l2_2).value == doctest::Approx(1.0));

  Mat M(2, 2);
  M << 3, 0, 4, 0;
  const BoundsEstimate b =
      op_norm(M, SpaceSpec(2, Exponent::finite(1.0)), l2_2);
  CHECK(b.value == doctest::Approx(5.0));
  CHECK(b.exact());
}

TEST_CASE("op_norm 3->3 matches the brute-force oracle value") {
  // sup ||Mv||_3 over the l^3 sphere is attained at v = (1,1)/2^(1/3).
  Mat M(2, 2);
  M << 1, 2, 2, 1;
  const SpaceSpec p3(2, Exponent::finite(3.0));
  const BoundsEstimate b = op_norm(M, p3, p3);
  CHECK(b.value == doctest::Approx(3.0).epsilon(1e-9));

  const BruteResult br = brute_op_norm(M, p3, p3, 1 << 20);
  CHECK(std::abs(b.value - br.value) <= 1e-3 * b.value + br.gap);
  CHECK(b.certified_low <= b.value);
  CHECK(b.certified_high >= b.value);
}

TEST_CASE("op_norm rejects bad input, accepts the zero matrix") {
  Mat Z = Mat::Zero(2, 3);
  CHECK(op_norm(Z, SpaceSpec(3, Exponent::finite(2.0)), l2_2).value == 0.0);

  Mat bad(1, 1);
  bad << std::numeric_limits<double>::quiet_NaN();
  const SpaceSpec s1(1, Exponent::finite(2.0));
  CHECK_THROWS_AS(op_norm(bad, s1, s1), input_error);
  CHECK_THROWS_AS(op_norm(Z, l2_2, l2_2), input_error);  // shape mismatch
}

TEST_CASE("lower_bound closed forms and rank test") {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 2;
  CHECK(lower_bound(D, l2_2, l2_2).value == doctest::Approx(1.0));

  Mat R(2, 2);
  R << 1, 0, 2, 0;  // kernel contains (0, 1)
  const BoundsEstimate b = lower_bound(R, l2_2, l2_2);
  CHECK(b.value == 0.0);
  CHECK(b.method == "rank_deficient");

  // sigma_min oracle through the eigen-decomposition of M^T M
  Mat M(3, 2);
  M << 1, 1, 1, -1, 0, 1;
  Eigen::SelfAdjointEigenSolver<Mat> eig(M.transpose() * M);
  const double sigma_min_oracle = std::sqrt(eig.eigenvalues().minCoeff());
  CHECK(sigma_min_oracle == doctest::Approx(std::sqrt(2.0)));
  CHECK(lower_bound(M, l2_2, l2_3).value ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("bessel and frame bounds") {
  FrameSystem id(Mat::Identity(2, 2), l2_2, l2_2);
  CHECK(bessel_bound(id).value == doctest::Approx(1.0));

  FrameSystem twice(2.0 * Mat::Identity(2, 2), l2_2, l2_2);
  CHECK(bessel_bound(twice).value == doctest::Approx(2.0));

  const Mat M = testutil::random_frame_matrix(4, 3, 11);
  // independent oracle: largest eigenvalue of the Gram matrix
  Eigen::SelfAdjointEigenSolver<Mat> eig(M.transpose() * M);
  FrameSystem sys(M, SpaceSpec(3, Exponent::finite(2.0)),
                  SpaceSpec(4, Exponent::finite(2.0)));
  CHECK(bessel_bound(sys).value ==
        doctest::Approx(std::sqrt(eig.eigenvalues().maxCoeff())).epsilon(1e-12));

  // rows {e1, e1, e2}: Gram eigenvalues {2, 1}
  Mat rows(3, 2);
  rows << 1, 0, 1, 0, 0, 1;
  auto [lo, hi] = frame_bounds(FrameSystem(rows, l2_2, l2_3));
  CHECK(lo.value == doctest::Approx(1.0));
  CHECK(hi.value == doctest::Approx(std::sqrt(2.0)));
  CHECK(lo.value <= hi.value);

  Mat rank_def(3, 2);
  rank_def << 1, 0, 2, 0, -1, 0;
  auto [lo2, hi2] = frame_bounds(FrameSystem(rank_def, l2_2, l2_3));
  CHECK(lo2.value == 0.0);
  CHECK(lo2.method.find("not_a_frame") != std::string::npos);
}

TEST_CASE("riesz bounds work in the synthesis direction") {
  auto [lo, hi] = riesz_bounds(FrameSystem(Mat::Identity(2, 2), l2_2, l2_2));
  CHECK(lo.value == doctest::Approx(1.0));
  CHECK(hi.value == doctest::Approx(1.0));

  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 3;
  auto [lo2, hi2] = riesz_bounds(FrameSystem(D, l2_2, l2_2));
  CHECK(lo2.value == doctest::Approx(1.0));
  CHECK(hi2.value == doctest::Approx(3.0));

  // synthesis matrix [[1,1],[0,1]]: singular values are the golden ratio pair
  Mat S(2, 2);
  S << 1, 1, 0, 1;
  auto [lo3, hi3] = riesz_bounds(FrameSystem(S.transpose(), l2_2, l2_2));
  CHECK(lo3.value == doctest::Approx(0.618033988749895).epsilon(1e-12));
  CHECK(hi3.value == doctest::Approx(1.618033988749895).epsilon(1e-12));

  Mat single(1, 2);
  single << 1, 1;
  auto [lo4, hi4] =
      riesz_bounds(FrameSystem(single, l2_2, SpaceSpec(1, Exponent::finite(2.0))));
  CHECK(lo4.method.find("not_complete") != std::string::npos);
}

TEST_CASE("op_norm homogeneity") {
  const auto grid = testutil::exponent_grid();
  int rep = 0;
  for (const Exponent& p : grid) {
    for (const Exponent& q : grid) {
      const Mat M = testutil::random_matrix(3, 2, 300 + rep++);
      const SpaceSpec from(2, p), to(3, q);
      const double base = op_norm(M, from, to).value;
      const double scaled = op_norm(Mat(2.5 * M), from, to).value;
      CHECK(scaled == doctest::Approx(2.5 * base).epsilon(1e-10));
    }
  }
}

TEST_CASE("op_norm duality: ||M||_{p->q} = ||M^T||_{q*->p*}") {
  const auto grid = testutil::exponent_grid();
  int rep = 0;
  for (const Exponent& p : grid) {
    for (const Exponent& q : grid) {
      const Mat M = testutil::random_matrix(3, 2, 700 + rep++);
      const SpaceSpec from(2, p), to(3, q);
      const double primal = op_norm(M, from, to).value;
      const double dual = op_norm(M.transpose(), dual_space(to), dual_space(from)).value;
      CHECK(dual == doctest::Approx(primal).epsilon(1e-6));
    }
  }
}

TEST_CASE("consistency with singular values at p = q = 2") {
  for (int rep = 0; rep < 10; ++rep) {
    const Mat M = testutil::random_matrix(4, 3, 1000 + rep);
    Eigen::JacobiSVD<Mat> svd(M);
    const SpaceSpec from(3, Exponent::finite(2.0)), to(4, Exponent::finite(2.0));
    CHECK(op_norm(M, from, to).value ==
          doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
    CHECK(lower_bound(M, from, to).value ==
          doctest::Approx(svd.singularValues()(2)).epsilon(1e-9));
  }
}

TEST_CASE("sandwich: brute oracle value lies inside the certified bracket") {
  const auto grid = testutil::exponent_grid();
  int rep = 0;
  for (const Exponent& p : grid) {
    for (const Exponent& q : grid) {
      const Mat M = testutil::random_matrix(3, 3, 2000 + rep++);
      const SpaceSpec from(3, p), to(3, q);
      const BoundsEstimate b = op_norm(M, from, to);
      const BruteResult br = brute_op_norm(M, from, to, 360);
      CHECK(br.value >= b.certified_low - 1e-3 * b.value - br.gap);
      CHECK(br.value <= b.certified_high + 1e-3 * b.value);

      const BoundsEstimate lb = lower_bound(M, from, to);
      const BruteResult blr = brute_lower_bound(M, from, to, 360);
      CHECK(blr.value >= lb.certified_low - 1e-3 * std::max(1.0, lb.value) - blr.gap);
      CHECK(blr.value <= lb.certified_high + 1e-3 * std::max(1.0, lb.value) + blr.gap);
    }
  }
}

TEST_CASE("neumann certificate: identity and scalar operators") {
  const auto cert = check_neumann_invertibility(Mat::Identity(2, 2), l2_2);
  REQUIRE(cert.has_value());
  CHECK(cert->lambda1 == doctest::Approx(0.0));
  CHECK(cert->lambda2 == doctest::Approx(0.0));
  CHECK(cert->inverse_lower == doctest::Approx(1.0));
  CHECK(cert->inverse_upper == doctest::Approx(1.0));

  const auto half = check_neumann_invertibility(0.5 * Mat::Identity(2, 2), l2_2);
  REQUIRE(half.has_value());
  CHECK(half->lambda1 == doctest::Approx(0.5));
  CHECK(half->lambda2 == doctest::Approx(0.0));
  CHECK(half->inverse_lower == doctest::Approx(1.0 / 1.5));
  CHECK(half->inverse_upper == doctest::Approx(2.0));
  // true ratio ||G^{-1}x||/||x|| = 2 sits inside the bracket
  CHECK(half->inverse_lower <= 2.0);
  CHECK(half->inverse_upper >= 2.0);

  CHECK_THROWS_AS(check_neumann_invertibility(Mat::Zero(2, 3),
                                              SpaceSpec(3, Exponent::finite(2.0))),
                  input_error);
}

TEST_CASE("neumann certificate brackets the true inverse norm") {
  Mat N = testutil::random_matrix(3, 3, 77);
  N *= 0.3 / Eigen::JacobiSVD<Mat>(N).singularValues()(0);
  const Mat G = Mat::Identity(3, 3) + N;
  const auto cert = check_neumann_invertibility(G, l2_3);
  REQUIRE(cert.has_value());
  CHECK(cert->lambda1 == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(cert->inverse_upper >= 1.0 / (1.0 - 0.3) - 1e-12);

  const Mat Ginv = G.inverse();
  for (int rep = 0; rep < 100; ++rep) {
    const Vec x = testutil::random_vector(3, 4000 + rep);
    const double ratio = (Ginv * x).norm() / x.norm();
    CHECK(ratio >= cert->inverse_lower - 1e-9);
    CHECK(ratio <= cert->inverse_upper + 1e-9);
  }
}

TEST_CASE("neumann certificate via the lambda2 grid for expansive operators") {
  // ||3I - I|| = 2 >= 1, but lambda2 = 0.5 certifies with lambda1 = 0.5.
  const Mat G = 3.0 * Mat::Identity(2, 2);
  const auto cert = check_neumann_invertibility(G, l2_2);
  REQUIRE(cert.has_value());
  CHECK(cert->lambda1 < 1.0);
  CHECK(cert->lambda2 < 1.0);
  CHECK(cert->inverse_lower <= 1.0 / 3.0 + 1e-12);
  CHECK(cert->inverse_upper >= 1.0 / 3.0 - 1e-12);
}
