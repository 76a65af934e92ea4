#include "pshlab/poly.hpp"

#include <cmath>
#include <set>

namespace pshlab {

std::vector<MultiIndex> monomial_basis(int dim, int degree) {
  if (dim != 1 && dim != 2) throw InputError("polynomials support 1 or 2 variables");
  if (degree < 0) throw InputError("degree must be >= 0");
  std::vector<MultiIndex> out;
  for (int g = 0; g <= degree; ++g) {
    if (dim == 1) {
      out.push_back({{g, 0}});
    } else {
      for (int a1 = g; a1 >= 0; --a1) out.push_back({{a1, g - a1}});
    }
  }
  return out;
}

HoloPoly HoloPoly::monomial(int dim, MultiIndex alpha, Complex c) {
  HoloPoly p(dim);
  p.set(alpha, c);
  return p;
}

int HoloPoly::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : coeffs_) d = std::max(d, alpha.degree());
  return d;
}

void HoloPoly::set(MultiIndex alpha, Complex c) {
  if (alpha.a[0] < 0 || alpha.a[1] < 0) throw InputError("negative exponent in multi-index");
  if (dim_ == 1 && alpha.a[1] != 0) throw InputError("one-variable polynomial with alpha_2 != 0");
  if (c == Complex(0.0)) {
    coeffs_.erase(alpha);
  } else {
    coeffs_[alpha] = c;
  }
}

Complex HoloPoly::coeff(MultiIndex alpha) const {
  auto it = coeffs_.find(alpha);
  return it == coeffs_.end() ? Complex(0.0) : it->second;
}

Complex HoloPoly::operator()(const Point& z) const {
  Complex v = 0.0;
  for (const auto& [alpha, c] : coeffs_) {
    Complex term = c;
    for (int k = 0; k < alpha.a[0]; ++k) term *= z[0];
    for (int k = 0; k < alpha.a[1]; ++k) term *= z[1];
    v += term;
  }
  return v;
}

HoloPoly& HoloPoly::operator+=(const HoloPoly& other) {
  if (other.dim_ != dim_) throw InputError("adding polynomials of different dimension");
  for (const auto& [alpha, c] : other.coeffs_) set(alpha, coeff(alpha) + c);
  return *this;
}

HoloPoly& HoloPoly::operator-=(const HoloPoly& other) {
  if (other.dim_ != dim_) throw InputError("subtracting polynomials of different dimension");
  for (const auto& [alpha, c] : other.coeffs_) set(alpha, coeff(alpha) - c);
  return *this;
}

HoloPoly& HoloPoly::operator*=(Complex s) {
  if (s == Complex(0.0)) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [alpha, c] : coeffs_) c *= s;
  return *this;
}

double coefficient_distance(const HoloPoly& p, const HoloPoly& q) {
  std::set<MultiIndex> keys;
  for (const auto& [alpha, c] : p.coeffs()) keys.insert(alpha);
  for (const auto& [alpha, c] : q.coeffs()) keys.insert(alpha);
  double s = 0.0;
  for (const auto& alpha : keys) s += std::norm(p.coeff(alpha) - q.coeff(alpha));
  return std::sqrt(s);
}

}  // namespace pshlab
