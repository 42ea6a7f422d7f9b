#pragma once

// Finite-dimensional normed sequence spaces: an l^p norm on R^dim with
// p in [1, inf], the conjugate exponent, and deterministic unit-sphere
// sampling used to seed the optimizers.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace framelab {

// Bad user input (dimension mismatch, non-finite entries, malformed jobs).
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that should have succeeded did not (singular solve, etc.).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Exponent p in [1, inf]. Infinity is a distinct state, never a numeric
// sentinel, so p-power sums cannot silently overflow on "p = 1e9"-style
// encodings.
class Exponent {
 public:
  Exponent() = default;  // p = 2
  static Exponent finite(double p);
  static Exponent infinity();

  bool is_infinity() const { return inf_; }
  // Finite value; throws input_error for the infinite exponent.
  double value() const;

  // Conjugate exponent: 1/p + 1/p* = 1, with 1 <-> inf.
  Exponent dual() const;

  bool operator==(const Exponent& o) const;
  bool operator!=(const Exponent& o) const { return !(*this == o); }

  std::string str() const;

 private:
  double p_ = 2.0;
  bool inf_ = false;
};

struct SpaceSpec {
  int dim = 1;
  Exponent p;

  SpaceSpec() = default;
  SpaceSpec(int dim_, Exponent p_);

  // Mirrors the reflexive-CB hypothesis: 1 < p < inf.
  bool is_reflexive_cb() const;

  bool operator==(const SpaceSpec& o) const { return dim == o.dim && p == o.p; }
  bool operator!=(const SpaceSpec& o) const { return !(*this == o); }
};

// l^p norm. Uses max-factoring so large exponents do not overflow.
double norm(const Vec& v, const Exponent& p);
// Checked flavor: validates length(v) == s.dim.
double norm(const Vec& v, const SpaceSpec& s);

Exponent dual_exponent(const Exponent& p);
SpaceSpec dual_space(const SpaceSpec& s);

// Deterministic list of `count` unit vectors. The list starts with the
// +-canonical vectors, then (dim <= 4) the +-normalized orthant
// representatives, then seeded Gaussian directions; every vector has
// norm(v, s) = 1 to within 1e-12 and the same seed reproduces the list.
std::vector<Vec> sample_unit_sphere(const SpaceSpec& s, int count,
                                    std::uint64_t seed);

// Gradient (subgradient at kinks) of v -> norm(v, p) at u != 0.
Vec norm_gradient(const Vec& u, const Exponent& p);

void require_finite(const Mat& m, const std::string& what);

}  // namespace framelab
