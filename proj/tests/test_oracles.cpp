#include "framelab/oracles.hpp"

#include "framelab/perturbation.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace framelab;

namespace {
const SpaceSpec l2_2(2, Exponent::finite(2.0));
}

TEST_CASE("brute oracle hits closed-form values") {
  CHECK(brute_op_norm(Mat::Identity(2, 2), l2_2, l2_2, 720).value ==
        doctest::Approx(1.0));

  Mat M(2, 2);
  M << 3, 0, 4, 0;
  // extreme-point hit is exact for the l1 source ball
  CHECK(brute_op_norm(M, SpaceSpec(2, Exponent::finite(1.0)), l2_2, 720).value ==
        doctest::Approx(5.0));

  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 2;
  CHECK(brute_lower_bound(D, l2_2, l2_2, 720).value == doctest::Approx(1.0));
}

TEST_CASE("brute oracle rejects dim > 4 and tiny resolutions") {
  const SpaceSpec big(5, Exponent::finite(2.0));
  CHECK_THROWS_AS(brute_op_norm(Mat::Identity(5, 5), big, big, 64), input_error);
  CHECK_THROWS_AS(brute_op_norm(Mat::Identity(2, 2), l2_2, l2_2, 1), input_error);
}

TEST_CASE("monotone refinement: doubling the resolution never hurts") {
  const auto grid = testutil::exponent_grid();
  int rep = 0;
  for (int dim = 2; dim <= 3; ++dim) {
    for (const Exponent& p : grid) {
      const Mat M = testutil::random_matrix(dim, dim, 5000 + rep++);
      const SpaceSpec from(dim, p), to(dim, Exponent::finite(2.0));
      const BruteResult coarse = brute_op_norm(M, from, to, 90);
      const BruteResult fine = brute_op_norm(M, from, to, 180);
      CHECK(fine.value >= coarse.value - 1e-15);
      CHECK(fine.gap <= coarse.gap + 1e-15);

      const BruteResult lo_c = brute_lower_bound(M, from, to, 90);
      const BruteResult lo_f = brute_lower_bound(M, from, to, 180);
      CHECK(lo_f.value <= lo_c.value + 1e-15);
    }
  }
}

TEST_CASE("rank-deficient lower bound sits within the grid gap of zero") {
  Mat R(2, 2);
  R << 1, 0, 2, 0;
  const BruteResult r = brute_lower_bound(R, l2_2, l2_2, 720);
  CHECK(r.value >= 0.0);
  CHECK(r.value <= r.gap);
}

TEST_CASE("brute residual mirrors the (P*) residual contract") {
  const Mat G = testutil::random_frame_matrix(3, 2, 21);
  FrameSystem sys(G, l2_2, SpaceSpec(3, Exponent::finite(2.0)));

  // Phi = G: residual is exactly -mu
  PerturbationConstants k(0.25, 0.0, 0.0);
  const BruteResult same = brute_residual(sys, sys, k, 360);
  CHECK(same.value == doctest::Approx(-0.25));

  // k = 0: residual equals the difference synthesis norm
  const Mat E = testutil::random_matrix(3, 2, 22, 0.1);
  FrameSystem pert(G + E, l2_2, SpaceSpec(3, Exponent::finite(2.0)));
  const BruteResult diff = brute_residual(sys, pert, PerturbationConstants(), 720);
  Eigen::JacobiSVD<Mat> svd(E);
  CHECK(std::abs(diff.value - svd.singularValues()(0)) <= diff.gap + 1e-9);
}
