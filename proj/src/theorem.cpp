#include "pshlab/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace pshlab {

namespace {

constexpr double kOrthogonalityTol = 1e-8;
// Absolute allowance, relative to int |f|^2, for bounds whose both sides
// vanish mathematically (psi = phi gives delta = 0 = rhs up to roundoff).
constexpr double kRoundoffFloor = 1e-24;

BoundCheck check_bound(double lhs, double rhs, double slack, double floor = 0.0) {
  return {lhs, rhs, lhs <= rhs * (1.0 + slack) + floor};
}

// The rule with panel breaks on the circles where the cutoff jumps, when
// those are known (disc); otherwise nullopt and the given rule is used.
std::optional<QuadratureRule> align_with_cutoff(const QuadratureRule& rule, const CutoffSpec& spec) {
  const auto breaks = radial_cutoff_breaks(spec, rule.domain());
  if (breaks.empty()) return std::nullopt;
  QuadratureParams p = rule.params();
  p.breakpoints.insert(p.breakpoints.end(), breaks.begin(), breaks.end());
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  p.breakpoints.erase(std::unique(p.breakpoints.begin(), p.breakpoints.end()), p.breakpoints.end());
  if (p == rule.params()) return std::nullopt;
  return build_quadrature(rule.domain(), p, rule.loci());
}

std::vector<LinearForm> merged_loci(const Domain& domain, std::initializer_list<const WeightExpr*> weights) {
  std::vector<LinearForm> out;
  for (const WeightExpr* w : weights) {
    for (const auto& l : w->loci()) {
      if (l.coeffs.size() != static_cast<std::size_t>(domain.dim())) {
        throw InputError("weight locus arity does not match the domain dimension");
      }
      if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
    }
  }
  return out;
}

double sum_weighted(const QuadratureRule& rule, const std::vector<double>& v) {
  return weighted_sum(rule.weights(), v);
}

// Uniform point in the domain by rejection from the bounding polydisc.
Point random_point(const Domain& domain, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Point z{};
    bool inside = true;
    for (int j = 0; j < domain.dim(); ++j) {
      const double R = domain.coordinate_radius(j);
      z[j] = Complex(R * u(rng), R * u(rng));
      if (std::abs(z[j]) >= R) inside = false;
    }
    if (inside && domain.contains(z)) return z;
  }
}

nlohmann::json bound_json(const BoundCheck& b) { return {{"lhs", b.lhs}, {"rhs", b.rhs}, {"pass", b.pass}}; }

}  // namespace

void TheoremConfig::validate() const {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be > 0");
  if (!phi.negative()) throw InputError("phi must be flagged negative (apply enforce_negative)");
  if (!psi.negative()) throw InputError("psi must be flagged negative (apply enforce_negative)");
  if (f.dim() != domain.dim()) throw InputError("f has " + std::to_string(f.dim()) + " variables, domain has " +
                                                std::to_string(domain.dim()));
  if (degree < f.degree()) throw InputError("degree must be >= deg f");
  if (!(smoothing >= 0.0)) throw InputError("smoothing must be >= 0");
  if (smoothing > 0.0 && !(smoothing < epsilon)) throw InputError("smoothing must be < epsilon");
  if (!(smooth_slack >= 0.0) || !(indicator_slack >= 0.0)) throw InputError("slacks must be >= 0");
  if (!(compact_fraction > 0.0 && compact_fraction <= 1.0)) throw InputError("compact_fraction must be in (0, 1]");
}

QuadratureRule theorem_rule(const TheoremConfig& config) {
  return build_quadrature(config.domain, config.quad, merged_loci(config.domain, {&config.phi, &config.psi}));
}

double compute_M(const WeightExpr& phi, const HoloPoly& f, const QuadratureRule& rule) {
  auto integrand = [&](const Point& z) {
    const double a = std::norm(f(z));
    return a == 0.0 ? 0.0 : a * std::exp(-phi(z));
  };
  const ShellParams check{12, 8, 16};
  for (const auto& l : phi.loci()) {
    if (l.coeffs.size() != static_cast<std::size_t>(rule.domain().dim())) {
      throw InputError("weight locus arity does not match the domain dimension");
    }
    const auto outcome = integrate_shells(rule.domain(), integrand, l, check);
    if (outcome.verdict == Verdict::Divergent) {
      throw DivergenceError("f is not in L^2(phi): e^{-phi}|f|^2 diverges near a log locus",
                            outcome.fitted_exponent);
    }
  }
  return integrate(rule, integrand);
}

double sup_modulus_sq(const HoloPoly& f, const Domain& domain, double fraction, int grid) {
  auto coordinate = [&](double radius) {
    std::vector<Complex> pts;
    for (int i = 0; i < grid; ++i) {
      const double r = radius * i / (grid - 1);
      for (int k = 0; k < grid; ++k) pts.push_back(std::polar(r, 2.0 * std::numbers::pi * k / grid));
    }
    return pts;
  };
  double sup = 0.0;
  const auto g0 = coordinate(fraction * domain.coordinate_radius(0));
  if (domain.dim() == 1) {
    for (const auto& z1 : g0) sup = std::max(sup, std::norm(f({z1, Complex(0.0)})));
    return sup;
  }
  const double Rb = fraction * domain.radii()[0];
  std::vector<Complex> g1;
  if (domain.kind() == DomainKind::Polydisc) g1 = coordinate(fraction * domain.coordinate_radius(1));
  for (const auto& z1 : g0) {
    if (domain.kind() == DomainKind::Ball) g1 = coordinate(std::sqrt(std::max(0.0, Rb * Rb - std::norm(z1))));
    for (const auto& z2 : g1) sup = std::max(sup, std::norm(f({z1, z2})));
  }
  return sup;
}

TheoremReport run_construction(const TheoremConfig& config, const QuadratureRule& base_rule, std::optional<double> M) {
  config.validate();
  const CutoffSpec spec{config.phi, config.psi, config.epsilon, config.smoothing};
  spec.validate();
  const auto aligned = align_with_cutoff(base_rule, spec);
  const QuadratureRule& rule = aligned ? *aligned : base_rule;
  TheoremReport rep;
  rep.epsilon = config.epsilon;
  rep.slack = config.slack();
  rep.degree = config.degree;
  rep.nodes = rule.size();
  rep.M = M ? *M : compute_M(config.phi, config.f, rule);
  rep.l1 = l1_distance(config.phi, config.psi, rule);
  rep.hypothesis_ok = rep.l1 < config.epsilon;

  const auto chi = sample<double>(rule, [&](const Point& z) { return cutoff(spec, z); });
  const NodeValues fv = sample_poly(rule, config.f);
  NodeValues h(rule.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = chi[i] * fv[i];

  const WeightedSpace space(rule, config.psi);
  const GramMatrix G = gram_matrix(space, config.degree);
  const GramFactorization fac = orthonormalize(G);
  rep.rank = fac.rank();
  rep.dropped = static_cast<int>(fac.dropped.size());
  const Projection proj = project(space, fac, h);
  rep.g = proj.g;
  const NodeValues gv = sample_poly(rule, rep.g);

  rep.norm_g_psi_sq = weighted_inner(space, gv, gv).real();
  rep.bound_eM = std::exp(config.epsilon) * rep.M;
  rep.weighted_bound = check_bound(rep.norm_g_psi_sq, rep.bound_eM, rep.slack);

  std::vector<double> tmp(rule.size());
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = std::norm(gv[i] - fv[i]);
  rep.delta = std::sqrt(std::max(0.0, sum_weighted(rule, tmp)));

  const auto gap = sample<double>(rule, [&](const Point& z) {
    const double a = config.phi(z);
    const double b = config.psi(z);
    return a == b ? 0.0 : std::abs(a - b);
  });
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = gap[i] * std::norm(fv[i]);
  rep.bound_eps = sum_weighted(rule, tmp) / config.epsilon;
  rep.C_prime = sup_modulus_sq(config.f, config.domain, config.compact_fraction);
  rep.bound_C = rep.C_prime * rep.l1;
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = std::norm(fv[i]);
  const double floor = kRoundoffFloor * sum_weighted(rule, tmp);
  const double delta_sq = rep.delta * rep.delta;
  rep.eps_bound = check_bound(delta_sq, rep.bound_eps, rep.slack, floor);
  rep.C_bound = check_bound(delta_sq, rep.bound_C, rep.slack, floor);

  NodeValues u(rule.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = gv[i] - h[i];
  rep.u_norm = weighted_norm(space, u);
  rep.chi_f_norm = proj.h_norm;
  rep.orthogonality_residual = proj.residual;
  rep.orthogonality_ok = proj.residual <= kOrthogonalityTol * proj.h_norm;

  // Unweighted projection: the setting in which the norm inequality and the
  // identity int g0 conj(f) = int chi |f|^2 are exact.
  const std::vector<double> ones(rule.size(), 1.0);
  const WeightedSpace flat = WeightedSpace::from_density(rule, ones);
  const GramFactorization fac0 = orthonormalize(gram_matrix(flat, config.degree));
  const Projection proj0 = project(flat, fac0, h);
  const NodeValues g0 = sample_poly(rule, proj0.g);
  rep.unweighted_norm = check_bound(weighted_inner(flat, g0, g0).real(), weighted_inner(flat, h, h).real(),
                                    config.indicator_slack);
  const Complex lhs4 = weighted_inner(flat, g0, fv);
  for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = chi[i] * std::norm(fv[i]);
  const double rhs4 = sum_weighted(rule, tmp);
  const double f_sq = weighted_inner(flat, fv, fv).real();
  rep.unweighted_identity_gap = std::abs(lhs4 - rhs4);
  rep.unweighted_identity_ok = rep.unweighted_identity_gap <= config.indicator_slack * f_sq;
  rep.psi_projection_unweighted_norm_sq = weighted_inner(flat, gv, gv).real();
  return rep;
}

TheoremReport run_case1(const TheoremConfig& config) {
  config.validate();
  if (!config.phi.bounded_below() || !config.psi.bounded_below()) {
    throw InputError("the bounded-weight case needs phi and psi bounded below (truncate them)");
  }
  const QuadratureRule rule = theorem_rule(config);
  return run_construction(config, rule);
}

bool TruncationReport::bounds_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const TruncationRow& r) { return r.bound_ok && r.l1_contracts; });
}

bool TruncationReport::cauchy_strictly_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].coeff_cauchy < rows[i - 1].coeff_cauchy)) return false;
  }
  return !rows.empty();
}

TruncationReport run_truncation(const TheoremConfig& config, const std::vector<double>& j_list,
                                std::size_t monotone_samples, unsigned seed) {
  config.validate();
  if (j_list.size() < 3) throw InputError("j_list needs at least 3 entries");
  for (std::size_t i = 0; i < j_list.size(); ++i) {
    if (!(j_list[i] > 0.0)) throw InputError("truncation levels must be > 0");
    if (i > 0 && !(j_list[i] > j_list[i - 1])) throw InputError("j_list must be strictly increasing");
  }
  const QuadratureRule rule = theorem_rule(config);
  TruncationReport out;
  out.M = compute_M(config.phi, config.f, rule);
  out.l1 = l1_distance(config.phi, config.psi, rule);
  out.epsilon = config.epsilon;

  auto run_at = [&](double j) {
    TheoremConfig cj = config;
    cj.phi = truncate(config.phi, j);
    cj.psi = truncate(config.psi, j);
    return run_construction(cj, rule, out.M);
  };

  for (double j : j_list) {
    TruncationRow row;
    row.j = j;
    row.report = run_at(j);
    const TheoremReport next = run_at(j + 1.0);
    row.l1_j = row.report.l1;
    row.l1_contracts = row.l1_j <= out.l1 * (1.0 + 1e-12) + 1e-300;
    row.norm_g_sq = row.report.norm_g_psi_sq;
    row.bound_eM = std::exp(config.epsilon) * out.M;
    row.bound_ok = row.norm_g_sq <= row.bound_eM * (1.0 + config.slack());
    row.coeff_cauchy = coefficient_distance(next.g, row.report.g);
    out.rows.push_back(std::move(row));
  }

  std::mt19937_64 rng(seed);
  out.monotone_samples = monotone_samples;
  out.monotone_weights = true;
  for (std::size_t s = 0; s < monotone_samples; ++s) {
    const Point z = random_point(config.domain, rng);
    double prev = -1.0;
    for (double j : j_list) {
      const double v = std::exp(-truncate(config.psi, j)(z));
      if (v < prev) out.monotone_weights = false;
      prev = v;
    }
  }
  return out;
}

SweepReport sweep_epsilon(const SweepConfig& config, double noise_tolerance, double floor_factor) {
  if (config.etas.empty()) throw InputError("sweep needs at least one eta");
  for (double eta : config.etas) {
    if (!(eta >= 0.0)) throw InputError("eta values must be >= 0");
  }
  if (!(config.epsilon_factor > 0.0)) throw InputError("epsilon_factor must be > 0");
  const Domain& domain = config.base.domain;
  if (sampled_sup(config.direction, domain, 32) > 0.0) throw InputError("sweep direction must be <= 0 on the domain");

  const QuadratureRule rule = build_quadrature(
      domain, config.base.quad, merged_loci(domain, {&config.base.phi, &config.direction}));

  auto run_eta = [&](double eta, const QuadratureRule& r) {
    TheoremConfig c = config.base;
    const WeightExpr psi = WeightExpr::sum({{1.0, config.base.phi}, {eta, config.direction}});
    c.psi = enforce_negative(psi, domain);
    const double l1 = l1_distance(c.phi, c.psi, r);
    c.epsilon = l1 > 0.0 ? config.epsilon_factor * l1 : config.min_epsilon;
    if (c.smoothing > 0.0 && c.smoothing >= c.epsilon) c.smoothing = 0.5 * c.epsilon;
    return run_construction(c, r);
  };

  SweepReport out;
  for (double eta : config.etas) {
    const TheoremReport rep = run_eta(eta, rule);
    SweepRow row;
    row.eta = eta;
    row.epsilon = rep.epsilon;
    row.l1 = rep.l1;
    row.delta = rep.delta;
    row.bound_C = rep.bound_C;
    const double d2 = rep.delta * rep.delta;
    row.ratio = rep.bound_C > 0.0 ? d2 / rep.bound_C : (d2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    row.C_bound_ok = rep.C_bound.pass;
    out.rows.push_back(row);
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.epsilon > b.epsilon; });

  // Floor: delta of the exact case psi = phi, and the resolution sensitivity
  // of the final row.
  const double delta_zero = run_eta(0.0, rule).delta;
  const QuadratureRule fine = refine_twice(rule);
  const double delta_final_fine = run_eta(out.rows.back().eta, fine).delta;
  out.quadrature_floor = std::max(delta_zero, std::abs(delta_final_fine - out.rows.back().delta));

  out.nonincreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    if (out.rows[i].delta > out.rows[i - 1].delta * (1.0 + noise_tolerance)) out.nonincreasing = false;
  }
  out.final_within_floor = out.rows.back().delta <= floor_factor * out.quadrature_floor;
  out.C_bounds_ok = std::all_of(out.rows.begin(), out.rows.end(), [](const SweepRow& r) { return r.C_bound_ok; });
  return out;
}

BlockiResult blocki_check(const TheoremConfig& config) {
  config.validate();
  if (!(config.smoothing > 0.0)) throw InputError("the estimate check needs a smoothed cutoff (smoothing > 0)");
  const CutoffSpec spec{config.phi, config.psi, config.epsilon, config.smoothing};
  spec.validate();
  const QuadratureRule base_rule = theorem_rule(config);
  const auto aligned = align_with_cutoff(base_rule, spec);
  const QuadratureRule& rule = aligned ? *aligned : base_rule;
  const auto psi = sample<double>(rule, [&](const Point& z) { return config.psi(z); });
  std::vector<double> density(rule.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (!(psi[i] < 0.0)) throw NumericalError("psi is not strictly negative at node " + std::to_string(i));
    density[i] = -psi[i];  // e^{-w} for w = -log(-psi)
  }
  const WeightedSpace space = WeightedSpace::from_density(rule, density);
  const GramFactorization fac = orthonormalize(gram_matrix(space, config.degree));

  const NodeValues fv = sample_poly(rule, config.f);
  NodeValues h(rule.size());
  std::vector<double> H(rule.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Point& z = rule.nodes()[i];
    h[i] = cutoff(spec, z) * fv[i];
    H[i] = cutoff_derivative_H(spec, fv[i], z) * density[i];
  }
  const Projection proj = project(space, fac, h);
  const NodeValues gv = sample_poly(rule, proj.g);
  NodeValues u(rule.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = gv[i] - h[i];

  BlockiResult out;
  out.lhs = weighted_inner(space, u, u).real();
  out.rhs = 16.0 * weighted_sum(rule.weights(), H);
  if (out.rhs > 0.0) {
    out.ratio = out.lhs / out.rhs;
  } else {
    const double scale = std::max(1.0, proj.h_norm * proj.h_norm);
    out.ratio = out.lhs <= 1e-24 * scale ? 0.0 : std::numeric_limits<double>::infinity();
  }
  out.pass = out.ratio <= 1.0 + config.smooth_slack;
  return out;
}

std::vector<SuiteCase> random_bound_suite(int count, unsigned seed, const QuadratureParams& quad, int degree) {
  if (count < 1) throw InputError("suite count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> slope(0.5, 3.0);
  std::uniform_real_distribution<double> floor(3.0, 8.0);
  std::uniform_int_distribution<int> power(0, 2);
  const Domain disc(DomainKind::Disc, {1.0});
  std::vector<SuiteCase> out;
  for (int i = 0; i < count; ++i) {
    SuiteCase sc;
    sc.a1 = slope(rng);
    sc.T1 = floor(rng);
    sc.a2 = slope(rng);
    sc.T2 = floor(rng);
    sc.power = power(rng);
    sc.smoothed = (i % 2) == 1;
    TheoremConfig c;
    c.domain = disc;
    c.quad = quad;
    c.degree = degree;
    c.phi = enforce_negative(WeightExpr::max(WeightExpr::log_abs({1.0}, sc.a1), WeightExpr::constant(-sc.T1)), disc);
    c.psi = enforce_negative(WeightExpr::max(WeightExpr::log_abs({1.0}, sc.a2), WeightExpr::constant(-sc.T2)), disc);
    c.f = HoloPoly::monomial(1, {{sc.power, 0}});
    const QuadratureRule rule = theorem_rule(c);
    c.epsilon = 1.1 * l1_distance(c.phi, c.psi, rule);
    if (sc.smoothed) c.smoothing = 0.5 * c.epsilon;
    sc.report = run_construction(c, rule);
    out.push_back(std::move(sc));
  }
  return out;
}

nlohmann::json to_json(const SuiteCase& c) {
  return {{"a1", c.a1}, {"T1", c.T1}, {"a2", c.a2},         {"T2", c.T2},
          {"power", c.power}, {"smoothed", c.smoothed}, {"report", to_json(c.report)}};
}

nlohmann::json to_json(const TheoremReport& r) {
  return {
      {"M", r.M},
      {"l1", r.l1},
      {"epsilon", r.epsilon},
      {"hypothesis_ok", r.hypothesis_ok},
      {"norm_g_psi_sq", r.norm_g_psi_sq},
      {"bound_eM", r.bound_eM},
      {"delta", r.delta},
      {"bound_eps", r.bound_eps},
      {"C_prime", r.C_prime},
      {"bound_C", r.bound_C},
      {"verdicts",
       {{"weighted_norm", bound_json(r.weighted_bound)},
        {"delta_eps", bound_json(r.eps_bound)},
        {"delta_C", bound_json(r.C_bound)},
        {"orthogonality", r.orthogonality_ok}}},
      {"u_norm", r.u_norm},
      {"chi_f_norm", r.chi_f_norm},
      {"orthogonality_residual", r.orthogonality_residual},
      {"unweighted_projection",
       {{"norm", bound_json(r.unweighted_norm)},
        {"identity_gap", r.unweighted_identity_gap},
        {"identity_ok", r.unweighted_identity_ok}}},
      {"psi_projection_unweighted_norm_sq", r.psi_projection_unweighted_norm_sq},
      {"compact_subdomain_note", "C' is sup|f|^2 on the subdomain with radii scaled by the compact fraction"},
      {"slack", r.slack},
      {"degree", r.degree},
      {"rank", r.rank},
      {"dropped", r.dropped},
      {"nodes", r.nodes},
      {"g", poly_to_json(r.g)},
  };
}

nlohmann::json to_json(const TruncationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"j", row.j},
                    {"l1_j", row.l1_j},
                    {"l1_contracts", row.l1_contracts},
                    {"norm_g_sq", row.norm_g_sq},
                    {"bound_eM", row.bound_eM},
                    {"bound_ok", row.bound_ok},
                    {"coeff_cauchy", row.coeff_cauchy},
                    {"report", to_json(row.report)}});
  }
  return {{"M", r.M},
          {"l1", r.l1},
          {"epsilon", r.epsilon},
          {"rows", rows},
          {"monotone_weights", r.monotone_weights},
          {"monotone_samples", r.monotone_samples},
          {"bounds_pass", r.bounds_pass()},
          {"cauchy_strictly_decreasing", r.cauchy_strictly_decreasing()}};
}

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"eta", row.eta},
                    {"epsilon", row.epsilon},
                    {"l1", row.l1},
                    {"delta", row.delta},
                    {"bound_C", row.bound_C},
                    {"ratio", row.ratio},
                    {"C_bound_ok", row.C_bound_ok}});
  }
  return {{"rows", rows},
          {"quadrature_floor", r.quadrature_floor},
          {"nonincreasing", r.nonincreasing},
          {"final_within_floor", r.final_within_floor},
          {"C_bounds_ok", r.C_bounds_ok}};
}

nlohmann::json to_json(const BlockiResult& r) {
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}, {"pass", r.pass}};
}

std::string theorem_csv_header() {
  return "M,l1,eps,norm_g_sq,bound_eM,delta,bound_eps,bound_C,verdict_eM,verdict_eps,verdict_C,orthogonality,d,nodes";
}

std::string theorem_csv_row(const TheoremReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%d,%zu", r.M, r.l1,
                r.epsilon, r.norm_g_psi_sq, r.bound_eM, r.delta, r.bound_eps, r.bound_C, r.weighted_bound.pass ? 1 : 0,
                r.eps_bound.pass ? 1 : 0, r.C_bound.pass ? 1 : 0, r.orthogonality_ok ? 1 : 0, r.degree, r.nodes);
  return buf;
}

}  // namespace pshlab
