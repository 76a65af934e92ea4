#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pshlab/poly.hpp"
#include "pshlab/quadrature.hpp"

namespace pshlab {

struct WeightNode;

/// Immutable plurisubharmonic weight built from a closed atom algebra.
///
/// Atoms: a*ln|l(z)| (a >= 0, l linear), s*|z|^2 (s >= 0), constants.
/// Combinators: nonnegative sums, max, truncation from below, shifts. Every
/// constructor preserves plurisubharmonicity. Values live in [-inf, +inf);
/// -inf occurs exactly on zero sets of log atoms.
///
/// The `negative` flag is only set by enforce_negative(), which certifies
/// sup <= -margin on a dense sample grid.
class WeightExpr {
 public:
  WeightExpr();  // the constant 0

  static WeightExpr log_abs(std::vector<Complex> coeffs, double scale);
  static WeightExpr square_norm(double scale);
  static WeightExpr constant(double value);
  static WeightExpr sum(std::vector<std::pair<double, WeightExpr>> terms);
  static WeightExpr max(WeightExpr left, WeightExpr right);
  static WeightExpr truncate_below(WeightExpr child, double floor);
  static WeightExpr shift(WeightExpr child, double offset);

  double operator()(const Point& z) const;

  bool negative() const { return negative_; }
  const WeightNode& node() const { return *node_; }

  /// Distinct loci of log atoms with positive scale, in first-seen order.
  std::vector<LinearForm> loci() const;

  /// True when the expression is bounded below on bounded domains.
  bool bounded_below() const;

  /// Number of complex variables referenced by log atoms (0 if none).
  int arity() const;

 private:
  explicit WeightExpr(std::shared_ptr<const WeightNode> node, bool negative = false)
      : node_(std::move(node)), negative_(negative) {}

  friend WeightExpr enforce_negative(const WeightExpr&, const Domain&, int, double);
  friend WeightExpr truncate(const WeightExpr&, double);

  std::shared_ptr<const WeightNode> node_;
  bool negative_ = false;
};

struct LogAbsLinear {
  std::vector<Complex> coeffs;
  double scale;
};
struct SquareNorm {
  double scale;
};
struct ConstWeight {
  double value;
};
struct SumWeight {
  std::vector<std::pair<double, WeightExpr>> terms;
};
struct MaxWeight {
  WeightExpr left, right;
};
struct TruncatedWeight {
  WeightExpr child;
  double floor;
};
struct ShiftedWeight {
  WeightExpr child;
  double offset;
};

struct WeightNode {
  std::variant<LogAbsLinear, SquareNorm, ConstWeight, SumWeight, MaxWeight, TruncatedWeight, ShiftedWeight> v;
};

inline double eval_weight(const WeightExpr& w, const Point& z) { return w(z); }

/// Supremum of w over the sample grid: per coordinate, radii i*R/n for
/// i = 0..n (boundary included) times n equispaced angles starting at 0.
double sampled_sup(const WeightExpr& w, const Domain& domain, int sample_n);

/// Returns w flagged negative, shifted by -(sup + margin) when the sampled
/// sup exceeds -margin.
WeightExpr enforce_negative(const WeightExpr& w, const Domain& domain, int sample_n = 32,
                            double margin = 1e-9);

/// max(w, -j). Keeps the negative flag.
WeightExpr truncate(const WeightExpr& w, double j);

/// L1 distance of two weights under the rule. Integrability of |phi - psi| is
/// shell-checked around every log locus; divergence raises DivergenceError.
double l1_distance(const WeightExpr& phi, const WeightExpr& psi, const QuadratureRule& rule);

/// The cutoff of the construction: sharp indicator of {phi <= psi + eps}
/// when smoothing == 0, otherwise the ramp clamp((psi + eps - phi)/s, 0, 1).
struct CutoffSpec {
  WeightExpr phi;
  WeightExpr psi;
  double epsilon = 0.0;
  double smoothing = 0.0;

  void validate() const;
};

/// Cutoff value from weight values, with the -inf conventions:
/// phi = -inf gives 1; psi = -inf with phi finite gives 0.
double cutoff_value(double phi_value, double psi_value, double epsilon, double smoothing);

double cutoff(const CutoffSpec& spec, const Point& z);

/// On the disc every weight of the algebra is radial, so the cutoff is a
/// function of |z| and jumps (or kinks, for the ramp) on circles. Returns the
/// radii of those circles, located by bracketing on a fine radial grid and
/// bisection. Empty for other domains.
std::vector<double> radial_cutoff_breaks(const CutoffSpec& spec, const Domain& domain);

/// |f(z)|^2 |chi'(t)|^2 where t = log(-psi(z)) and chi is the ramp viewed as a
/// function of t with phi(z) held fixed: chi'(t) = psi(z)/s inside the open
/// ramp band, 0 outside. Requires smoothing > 0 and psi(z) < 0.
double cutoff_derivative_H(const CutoffSpec& spec, Complex f_value, const Point& z);
double cutoff_derivative_H(const CutoffSpec& spec, const HoloPoly& f, const Point& z);

nlohmann::json weight_to_json(const WeightExpr& w);
WeightExpr weight_from_json(const nlohmann::json& j);

std::string describe(const WeightExpr& w);

}  // namespace pshlab
