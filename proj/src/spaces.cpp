#include "framelab/spaces.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace framelab {

Exponent Exponent::finite(double p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw input_error("exponent must be finite and >= 1, got " +
                      std::to_string(p));
  }
  Exponent e;
  e.p_ = p;
  e.inf_ = false;
  return e;
}

Exponent Exponent::infinity() {
  Exponent e;
  e.inf_ = true;
  return e;
}

double Exponent::value() const {
  if (inf_) throw input_error("exponent is infinite; no finite value");
  return p_;
}

Exponent Exponent::dual() const {
  if (inf_) return finite(1.0);
  if (p_ == 1.0) return infinity();
  return finite(p_ / (p_ - 1.0));
}

bool Exponent::operator==(const Exponent& o) const {
  if (inf_ || o.inf_) return inf_ == o.inf_;
  return p_ == o.p_;
}

std::string Exponent::str() const {
  if (inf_) return "inf";
  std::ostringstream os;
  os << p_;
  return os.str();
}

SpaceSpec::SpaceSpec(int dim_, Exponent p_) : dim(dim_), p(p_) {
  if (dim < 1) throw input_error("space dimension must be >= 1");
}

bool SpaceSpec::is_reflexive_cb() const {
  return !p.is_infinity() && p.value() > 1.0;
}

double norm(const Vec& v, const Exponent& p) {
  if (v.size() == 0) return 0.0;
  if (!v.allFinite()) throw input_error("vector has non-finite entries");
  const double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  if (p.is_infinity()) return m;
  const double pv = p.value();
  if (pv == 1.0) return v.cwiseAbs().sum();
  // Max-factored power sum: (max)·(sum (|v_i|/max)^p)^(1/p).
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    s += std::pow(std::abs(v[i]) / m, pv);
  }
  return m * std::pow(s, 1.0 / pv);
}

double norm(const Vec& v, const SpaceSpec& s) {
  if (v.size() != s.dim) {
    throw input_error("vector length " + std::to_string(v.size()) +
                      " does not match space dimension " +
                      std::to_string(s.dim));
  }
  return norm(v, s.p);
}

Exponent dual_exponent(const Exponent& p) { return p.dual(); }

SpaceSpec dual_space(const SpaceSpec& s) { return SpaceSpec(s.dim, s.p.dual()); }

std::vector<Vec> sample_unit_sphere(const SpaceSpec& s, int count,
                                    std::uint64_t seed) {
  if (count < 1) throw input_error("sample count must be >= 1");
  const int d = s.dim;
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count) + (d <= 4 ? (1u << d) : 0u) +
              2u * d);

  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1.0;
    out.push_back(e);
    out.push_back(-e);
  }
  if (d <= 4) {
    // Orthant representatives: every sign pattern of the ones vector.
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v[i] = (mask >> i) & 1u ? -1.0 : 1.0;
      out.push_back(v / norm(v, s.p));
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = gauss(rng);
    const double n = norm(v, s.p);
    if (n < 1e-12) continue;
    out.push_back(v / n);
  }
  out.resize(static_cast<std::size_t>(count));
  return out;
}

Vec norm_gradient(const Vec& u, const Exponent& p) {
  const Eigen::Index n = u.size();
  Vec g = Vec::Zero(n);
  const double m = u.cwiseAbs().maxCoeff();
  if (m == 0.0) return g;
  if (p.is_infinity()) {
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    g[imax] = u[imax] > 0 ? 1.0 : -1.0;
    return g;
  }
  const double pv = p.value();
  if (pv == 1.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      g[i] = u[i] > 0 ? 1.0 : (u[i] < 0 ? -1.0 : 0.0);
    return g;
  }
  const double nrm = norm(u, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::abs(u[i]) / nrm;
    if (r == 0.0) continue;
    g[i] = (u[i] > 0 ? 1.0 : -1.0) * std::pow(r, pv - 1.0);
  }
  return g;
}

void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw input_error(what + " has non-finite entries");
}

}  // namespace framelab
