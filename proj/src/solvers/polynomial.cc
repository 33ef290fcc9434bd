#include "mapfree/solvers/polynomial.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace mapfree {

int Polynomial::Degree() const {
  for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) {
    if (c_[i] != 0.0) return i;
  }
  return -1;
}

double Polynomial::operator()(double x) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
  return r;
}

Polynomial Polynomial::Derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * i;
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  return *this + o * -1.0;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (c_.empty() || o.c_.empty()) return Polynomial();
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= s;
  return Polynomial(std::move(r));
}

std::vector<double> RealRoots(const Polynomial& p, double imag_tolerance) {
  const std::vector<double>& c = p.coeffs();
  double max_abs = 0.0;
  for (const double v : c) max_abs = std::max(max_abs, std::abs(v));
  if (!(max_abs > 0.0) || !std::isfinite(max_abs)) return {};

  int degree = static_cast<int>(c.size()) - 1;
  while (degree > 0 && std::abs(c[degree]) <= 1e-14 * max_abs) --degree;
  if (degree < 1) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i)
    companion(i, degree - 1) = -c[i] / c[degree];

  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return {};
  const Polynomial dp = p.Derivative();
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const std::complex<double> ev = solver.eigenvalues()(i);
    if (std::abs(ev.imag()) > imag_tolerance) continue;
    double x = ev.real();
    for (int it = 0; it < 2; ++it) {
      const double d = dp(x);
      if (d == 0.0) break;
      const double step = p(x) / d;
      if (!std::isfinite(step)) break;
      const double next = x - step;
      if (std::abs(p(next)) > std::abs(p(x))) break;
      x = next;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace mapfree
