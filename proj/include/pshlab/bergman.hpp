#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pshlab/poly.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

/// L^2(Omega, e^{-psi} dV) discretized by a quadrature rule. Holds the node
/// measure m_i = w_i * e^{-psi(z_i)}; the rule must outlive the space.
class WeightedSpace {
 public:
  /// Throws DivergenceError if e^{-psi} fails the shell test around a log
  /// locus of psi, NumericalError if e^{-psi} overflows at a node.
  WeightedSpace(const QuadratureRule& rule, const WeightExpr& psi);

  /// Space with an explicit density e^{-w} at the nodes (for weights outside
  /// the atom algebra, e.g. w = -log(-psi)).
  static WeightedSpace from_density(const QuadratureRule& rule, std::span<const double> density);

  const QuadratureRule& rule() const { return *rule_; }
  const std::vector<double>& measure() const { return measure_; }
  int dim() const { return rule_->domain().dim(); }

 private:
  WeightedSpace(const QuadratureRule& rule, std::vector<double> measure)
      : rule_(&rule), measure_(std::move(measure)) {}

  const QuadratureRule* rule_;
  std::vector<double> measure_;
};

/// Values of a function at the nodes of the space's rule.
using NodeValues = std::vector<Complex>;

NodeValues sample_poly(const QuadratureRule& rule, const HoloPoly& p);

/// <u, v>_psi = sum_i m_i u_i conj(v_i), compensated, in node order.
Complex weighted_inner(const WeightedSpace& space, std::span<const Complex> u, std::span<const Complex> v);
double weighted_norm(const WeightedSpace& space, std::span<const Complex> h);

struct GramMatrix {
  int dim = 1;
  std::vector<MultiIndex> basis;  ///< graded order
  Eigen::MatrixXcd values;        ///< G(a, b) = <z^a, z^b>_psi
};

/// Gram matrix of the monomials with |alpha| <= degree. Accumulated in fixed
/// node chunks, merged in chunk order; the lower triangle mirrors the upper
/// one so G is exactly Hermitian.
GramMatrix gram_matrix(const WeightedSpace& space, int degree, std::size_t max_basis = 2000);

struct DroppedPivot {
  MultiIndex alpha;
  double pivot;
};

struct GramFactorization {
  int dim = 1;
  std::vector<MultiIndex> retained;  ///< graded order; rows of B
  Eigen::MatrixXcd B;                ///< b_k = sum_r B(r, k) z^{retained[r]}
  std::vector<DroppedPivot> dropped;
  double drop_tol = 0.0;

  int rank() const { return static_cast<int>(B.cols()); }
  HoloPoly basis_function(int k) const;
};

/// Pivoted Cholesky of G. Pivots below drop_tol (default 1e-12 * max diag)
/// are dropped and reported. A Schur-complement diagonal below -drop_tol is
/// a quadrature inconsistency and raises NumericalError.
GramFactorization orthonormalize(const GramMatrix& G, std::optional<double> drop_tol = std::nullopt);

/// Frobenius distance of the Gram matrix of {b_k} from the identity.
double orthonormality_defect(const GramMatrix& G, const GramFactorization& fac);

struct Projection {
  HoloPoly g;
  std::vector<Complex> coefficients;  ///< <h, b_k>_psi
  double residual = 0.0;              ///< max_k |<h - g, b_k>_psi|
  double h_norm = 0.0;                ///< ||h||_psi
};

/// Orthogonal projection of h (given at the nodes) onto span{b_k}.
Projection project(const WeightedSpace& space, const GramFactorization& fac, std::span<const Complex> h);

nlohmann::json poly_to_json(const HoloPoly& p);
HoloPoly poly_from_json(const nlohmann::json& j, int default_dim = 1);

void write_gram_csv(const GramMatrix& G, std::ostream& out);

}  // namespace pshlab
