#pragma once

#include <initializer_list>
#include <vector>

namespace mapfree {

// Univariate real polynomial, coefficients in ascending degree order.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) {}
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  const std::vector<double>& coeffs() const { return c_; }
  // Index of the highest non-zero coefficient; -1 for the zero polynomial.
  int Degree() const;

  double operator()(double x) const;
  Polynomial Derivative() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

 private:
  std::vector<double> c_;
};

// Real roots from the eigenvalues of the companion matrix. Eigenvalues with
// |imag| > imag_tolerance are discarded; kept roots get two Newton steps.
// Leading coefficients below 1e-14 of the largest are treated as zero.
std::vector<double> RealRoots(const Polynomial& p,
                              double imag_tolerance = 1e-10);

}  // namespace mapfree
