#pragma once

#include <array>
#include <compare>
#include <map>
#include <vector>

#include "pshlab/quadrature.hpp"

namespace pshlab {

/// Exponent vector (alpha_1, alpha_2). One-variable polynomials use alpha_2 = 0.
struct MultiIndex {
  std::array<int, 2> a{0, 0};

  int degree() const { return a[0] + a[1]; }

  /// Graded order: total degree first, then descending alpha_1.
  friend std::strong_ordering operator<=>(const MultiIndex& x, const MultiIndex& y) {
    if (auto c = x.degree() <=> y.degree(); c != 0) return c;
    return y.a[0] <=> x.a[0];
  }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// All multi-indices with |alpha| <= degree in `dim` variables, graded order.
std::vector<MultiIndex> monomial_basis(int dim, int degree);

/// Holomorphic polynomial sum_alpha c_alpha z^alpha.
class HoloPoly {
 public:
  explicit HoloPoly(int dim = 1) : dim_(dim) {}

  static HoloPoly monomial(int dim, MultiIndex alpha, Complex c = 1.0);

  int dim() const { return dim_; }
  int degree() const;
  bool is_zero() const { return coeffs_.empty(); }

  /// Sets a coefficient; zeros are erased so the map holds nonzeros only.
  void set(MultiIndex alpha, Complex c);
  Complex coeff(MultiIndex alpha) const;
  const std::map<MultiIndex, Complex>& coeffs() const { return coeffs_; }

  Complex operator()(const Point& z) const;

  HoloPoly& operator+=(const HoloPoly& other);
  HoloPoly& operator-=(const HoloPoly& other);
  HoloPoly& operator*=(Complex s);
  friend HoloPoly operator+(HoloPoly a, const HoloPoly& b) { return a += b; }
  friend HoloPoly operator-(HoloPoly a, const HoloPoly& b) { return a -= b; }
  friend HoloPoly operator*(Complex s, HoloPoly a) { return a *= s; }

  bool operator==(const HoloPoly&) const = default;

 private:
  int dim_;
  std::map<MultiIndex, Complex> coeffs_;
};

/// Euclidean norm of the coefficient difference.
double coefficient_distance(const HoloPoly& p, const HoloPoly& q);

}  // namespace pshlab
