#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pshlab/errors.hpp"
#include "pshlab/parallel.hpp"

namespace pshlab {

using Complex = std::complex<double>;

/// A point of C^n, n <= 2. For n = 1 the second coordinate is zero.
using Point = std::array<Complex, 2>;

enum class DomainKind { Disc, Polydisc, Ball };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Model domain: disc in C, polydisc or ball in C^2.
class Domain {
 public:
  Domain(DomainKind kind, std::vector<double> radii);

  DomainKind kind() const { return kind_; }
  int dim() const { return kind_ == DomainKind::Disc ? 1 : 2; }
  const std::vector<double>& radii() const { return radii_; }

  /// Radius bounding |z_j| on the domain.
  double coordinate_radius(int j) const;

  /// Closed-form Lebesgue volume.
  double volume() const;

  bool contains(const Point& z) const;

  bool operator==(const Domain&) const = default;

 private:
  DomainKind kind_;
  std::vector<double> radii_;
};

Domain build_domain(DomainKind kind, std::vector<double> radii);

/// Linear functional l(z) = sum_j c_j z_j. Its zero set is a singular locus.
struct LinearForm {
  std::vector<Complex> coeffs;

  Complex operator()(const Point& z) const {
    Complex v = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * z[j];
    return v;
  }

  /// Index of the only nonzero coefficient, or -1 if the locus is oblique.
  int aligned_coordinate() const;

  bool operator==(const LinearForm&) const = default;
};

struct QuadratureParams {
  int radial_n = 16;        ///< Gauss-Legendre nodes per radial panel
  int angular_n = 64;       ///< trapezoid nodes per circle
  int radial_panels = 1;    ///< uniform radial panels before refinement
  int levels = 0;           ///< dyadic refinement depth toward aligned loci
  std::size_t node_cap = std::size_t{1} << 24;
  /// Extra radial panel breaks for the first coordinate (ignored outside
  /// (0, R)). Used to align panels with jumps of radial integrands.
  std::vector<double> breakpoints;

  bool operator==(const QuadratureParams&) const = default;
};

/// Tensor-product polar rule over a model domain.
class QuadratureRule {
 public:
  QuadratureRule(Domain domain, QuadratureParams params, std::vector<LinearForm> loci,
                 std::vector<Point> nodes, std::vector<double> weights);

  const Domain& domain() const { return domain_; }
  const QuadratureParams& params() const { return params_; }
  const std::vector<LinearForm>& loci() const { return loci_; }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  Domain domain_;
  QuadratureParams params_;
  std::vector<LinearForm> loci_;
  std::vector<Point> nodes_;
  std::vector<double> weights_;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the three-term
/// recurrence).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// Builds the rule. Aligned loci (l = c z_j) trigger dyadic refinement of
/// the radial panels of coordinate j toward 0. Throws ResourceError when the
/// node count exceeds params.node_cap.
QuadratureRule build_quadrature(const Domain& domain, const QuadratureParams& params,
                                std::vector<LinearForm> singular_loci = {});

/// Same rule with every resolution parameter doubled.
QuadratureRule refine_twice(const QuadratureRule& rule);

/// Fixed-order compensated sum of w_i * values_i.
double weighted_sum(std::span<const double> weights, std::span<const double> values);
Complex weighted_sum(std::span<const double> weights, std::span<const Complex> values);

/// Evaluates fn at every node (possibly in parallel). Throws NumericalError
/// naming the first node where the value is not finite.
template <typename T>
std::vector<T> sample(const QuadratureRule& rule, const std::function<T(const Point&)>& fn);

double integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& fn);
Complex integrate_complex(const QuadratureRule& rule,
                          const std::function<Complex(const Point&)>& fn);

enum class Verdict { Finite, Divergent, Undecided };
std::string to_string(Verdict v);

struct IntegralOutcome {
  Verdict verdict = Verdict::Undecided;
  double value = 0.0;            ///< sum of shells plus tail when Finite
  double fitted_exponent = 0.0;  ///< mean log2 shell ratio over the tail window
  std::vector<double> shells;    ///< I_k for k = 0..k_max
};

struct ShellParams {
  int k_max = 20;
  int radial_n = 16;
  int angular_n = 32;
};

/// Dyadic-shell integration around {l = 0}: I_k over 2^-(k+1) < |l| <= 2^-k.
/// Uses the rule's domain; the shell rules are built in coordinates adapted
/// to l. Throws InputError when k_max < 3.
IntegralOutcome integrate_shells(const Domain& domain,
                                 const std::function<double(const Point&)>& integrand,
                                 const LinearForm& locus, const ShellParams& params);

IntegralOutcome integrate_shells(const QuadratureRule& rule,
                                 const std::function<double(const Point&)>& integrand,
                                 const LinearForm& locus, int k_max);

/// Classifies a shell sequence. Exposed for testing the decision rule.
IntegralOutcome classify_shells(std::vector<double> shells);

/// CSV dump: re(z1), im(z1)[, re(z2), im(z2)], weight.
void write_rule_csv(const QuadratureRule& rule, std::ostream& out);

// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> sample(const QuadratureRule& rule, const std::function<T(const Point&)>& fn) {
  const auto& nodes = rule.nodes();
  std::vector<T> values(nodes.size());
  std::vector<std::size_t> bad(chunk_count(nodes.size(), 8192), nodes.size());
  for_each_chunk(nodes.size(), 8192, [&](std::size_t c, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      values[i] = fn(nodes[i]);
      bool finite;
      if constexpr (std::is_same_v<T, Complex>) {
        finite = std::isfinite(values[i].real()) && std::isfinite(values[i].imag());
      } else {
        finite = std::isfinite(values[i]);
      }
      if (!finite && bad[c] == nodes.size()) bad[c] = i;
    }
  });
  for (std::size_t i : bad) {
    if (i < nodes.size()) {
      const Point& z = nodes[i];
      throw NumericalError("non-finite integrand at node " + std::to_string(i) + " (z1=" +
                           std::to_string(z[0].real()) + "+" + std::to_string(z[0].imag()) +
                           "i, z2=" + std::to_string(z[1].real()) + "+" +
                           std::to_string(z[1].imag()) + "i)");
    }
  }
  return values;
}

}  // namespace pshlab
