#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pshlab/bergman.hpp"
#include "pshlab/poly.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

/// Inputs of one approximation run. phi and psi must carry the negative
/// flag (see enforce_negative).
struct TheoremConfig {
  Domain domain{DomainKind::Disc, {1.0}};
  QuadratureParams quad;
  WeightExpr phi;
  WeightExpr psi;
  HoloPoly f;
  double epsilon = 0.0;
  int degree = 12;
  double smoothing = 0.0;
  double smooth_slack = 1e-6;
  double indicator_slack = 0.02;
  /// Radius fraction of the compact subdomain on which C' = sup |f|^2.
  double compact_fraction = 0.9;

  void validate() const;
  double slack() const { return smoothing > 0.0 ? smooth_slack : indicator_slack; }
};

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Every scalar of one run. g is the psi-weighted Bergman projection of
/// chi * f, and u = g - chi * f is the minimal solution of dbar u = -f dbar chi.
struct TheoremReport {
  double M = 0.0;               ///< int e^{-phi} |f|^2
  double l1 = 0.0;              ///< ||psi - phi||_1
  double epsilon = 0.0;
  bool hypothesis_ok = false;   ///< l1 < epsilon
  double norm_g_psi_sq = 0.0;   ///< int |g|^2 e^{-psi}
  double bound_eM = 0.0;        ///< e^eps * M
  double delta = 0.0;           ///< ||g - f||_{L^2}
  double bound_eps = 0.0;       ///< (1/eps) int |psi - phi| |f|^2
  double C_prime = 0.0;         ///< sup |f|^2 on the compact subdomain
  double bound_C = 0.0;         ///< C' * l1
  BoundCheck weighted_bound;    ///< norm_g_psi_sq <= bound_eM
  BoundCheck eps_bound;         ///< delta^2 <= bound_eps
  BoundCheck C_bound;           ///< delta^2 <= bound_C
  double u_norm = 0.0;          ///< ||g - chi f||_psi
  double chi_f_norm = 0.0;      ///< ||chi f||_psi
  double orthogonality_residual = 0.0;  ///< max_k |<g - chi f, b_k>_psi|
  bool orthogonality_ok = false;
  /// Same run with the projection taken in unweighted L^2: norm inequality
  /// int |g0|^2 <= int |chi f|^2 and identity int g0 conj(f) = int chi |f|^2.
  BoundCheck unweighted_norm;
  double unweighted_identity_gap = 0.0;
  bool unweighted_identity_ok = false;
  double psi_projection_unweighted_norm_sq = 0.0;  ///< int |g|^2 (diagnostic)
  double slack = 0.0;
  int degree = 0;
  int rank = 0;
  int dropped = 0;
  std::size_t nodes = 0;
  HoloPoly g;

  bool bounds_pass() const { return weighted_bound.pass && eps_bound.pass && C_bound.pass; }
  bool all_pass() const { return bounds_pass() && orthogonality_ok; }
};

/// int e^{-phi} |f|^2 dV. Integrability is shell-checked around every log
/// locus of phi; a divergent verdict raises DivergenceError ("f not in
/// L^2(phi)").
double compute_M(const WeightExpr& phi, const HoloPoly& f, const QuadratureRule& rule);

/// sup |f|^2 on a polar sample grid of the compact subdomain (radii scaled
/// by `fraction`); 64 radii x 64 angles per coordinate.
double sup_modulus_sq(const HoloPoly& f, const Domain& domain, double fraction, int grid = 64);

/// Case of bounded weights. Requires phi and psi bounded below.
TheoremReport run_case1(const TheoremConfig& config);

/// The construction on a prebuilt rule, with no boundedness precondition.
/// M defaults to compute_M(phi, f, rule).
TheoremReport run_construction(const TheoremConfig& config, const QuadratureRule& rule,
                               std::optional<double> M = std::nullopt);

QuadratureRule theorem_rule(const TheoremConfig& config);

struct TruncationRow {
  double j = 0.0;
  double l1_j = 0.0;
  bool l1_contracts = false;     ///< l1_j <= l1 + tol
  double norm_g_sq = 0.0;        ///< int |g_j|^2 e^{-psi_j}
  double bound_eM = 0.0;         ///< e^eps M with M for the untruncated phi
  bool bound_ok = false;
  double coeff_cauchy = 0.0;     ///< ||g_{j+1} - g_j|| in coefficients
  TheoremReport report;
};

struct TruncationReport {
  double M = 0.0;
  double l1 = 0.0;
  double epsilon = 0.0;
  std::vector<TruncationRow> rows;
  bool monotone_weights = false;  ///< e^{-psi_j}(z) nondecreasing in j
  std::size_t monotone_samples = 0;

  bool bounds_pass() const;
  bool cauchy_strictly_decreasing() const;
};

/// Runs the bounded construction on (max(phi,-j), max(psi,-j)) for every j
/// in j_list and on j+1 for the coefficient Cauchy distance.
TruncationReport run_truncation(const TheoremConfig& config, const std::vector<double>& j_list,
                                std::size_t monotone_samples = 1000, unsigned seed = 1);

struct SweepConfig {
  TheoremConfig base;      ///< phi, f, domain, quadrature, degree, smoothing
  WeightExpr direction;    ///< w <= 0; psi_eta = phi + eta * w
  std::vector<double> etas;
  double epsilon_factor = 1.1;
  double min_epsilon = 1e-6;  ///< used when ||psi - phi||_1 = 0
};

struct SweepRow {
  double eta = 0.0;
  double epsilon = 0.0;
  double l1 = 0.0;
  double delta = 0.0;
  double bound_C = 0.0;
  double ratio = 0.0;  ///< delta^2 / bound_C (0 when both vanish)
  bool C_bound_ok = false;
};

struct SweepReport {
  std::vector<SweepRow> rows;  ///< sorted by epsilon, descending
  double quadrature_floor = 0.0;
  bool nonincreasing = false;  ///< within the 5 % tolerance
  bool final_within_floor = false;
  bool C_bounds_ok = false;
};

SweepReport sweep_epsilon(const SweepConfig& config, double noise_tolerance = 0.05, double floor_factor = 10.0);

struct BlockiResult {
  double lhs = 0.0;    ///< int |u|^2 (-psi)
  double rhs = 0.0;    ///< 16 int H (-psi)
  double ratio = 0.0;
  bool pass = false;
};

/// Checks int |u|^2 e^{-w} <= 16 int H e^{-w} for w = -log(-psi) with the
/// smoothed cutoff, where u is the minimal solution in the w-weighted space.
BlockiResult blocki_check(const TheoremConfig& config);

/// One member of the seeded random bounded-weight family on the unit disc:
/// phi = max(a1 ln|z|, -T1), psi = max(a2 ln|z|, -T2), f = z^power,
/// eps = 1.1 ||psi - phi||_1; odd cases use the smoothed cutoff s = eps/2.
struct SuiteCase {
  double a1 = 0.0, T1 = 0.0, a2 = 0.0, T2 = 0.0;
  int power = 0;
  bool smoothed = false;
  TheoremReport report;
};

/// a in [0.5, 3], T in [3, 8], power in {0, 1, 2}.
std::vector<SuiteCase> random_bound_suite(int count, unsigned seed, const QuadratureParams& quad, int degree = 12);

nlohmann::json to_json(const TheoremReport& r);
nlohmann::json to_json(const SuiteCase& c);
nlohmann::json to_json(const TruncationReport& r);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const BlockiResult& r);

std::string theorem_csv_header();
std::string theorem_csv_row(const TheoremReport& r);

}  // namespace pshlab
