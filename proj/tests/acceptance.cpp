// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "pshlab/bergman.hpp"
#include "pshlab/cli.hpp"
#include "pshlab/ideals.hpp"
#include "pshlab/theorem.hpp"

using namespace pshlab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const Domain kDisc(DomainKind::Disc, {1.0});
const Domain kPolydisc(DomainKind::Polydisc, {1.0, 1.0});

WeightExpr log_z(double a) { return WeightExpr::log_abs({1.0}, a); }
HoloPoly z_pow(int k) { return HoloPoly::monomial(1, {{k, 0}}); }
HoloPoly mono2(int a, int b, Complex c = 1.0) { return HoloPoly::monomial(2, {{a, b}}, c); }

QuadratureParams suite_params() {
  QuadratureParams q;
  q.levels = 40;
  q.radial_panels = 8;
  return q;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && secs >= limit_seconds) {
    out.pass = false;
    out.detail += "; runtime over " + std::to_string(limit_seconds) + " s";
  }
  if (!out.pass) ++failures;
  std::printf("%s C%d %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome moments() {
  QuadratureParams p;
  p.radial_n = 64;
  p.angular_n = 64;
  const auto rule = build_quadrature(kDisc, p);
  double worst = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double v = integrate(rule, [k](const Point& z) { return std::pow(std::norm(z[0]), k); });
    worst = std::max(worst, std::abs(v - kPi / (k + 1)) / (kPi / (k + 1)));
  }
  return {worst <= 1e-10, "max rel err " + fmt("%.3g", worst)};
}

Outcome gram_oracle() {
  QuadratureParams p;
  p.levels = 60;
  const auto rule = build_quadrature(kDisc, p, {LinearForm{{1.0}}});
  double diag = 0.0, off = 0.0;
  for (double a : {0.5, 1.0, 1.5}) {
    const WeightedSpace space(rule, log_z(a));
    const auto G = gram_matrix(space, 10);
    for (int k = 0; k <= 10; ++k) {
      const double exact = 2 * kPi / (2 * k + 2 - a);
      diag = std::max(diag, std::abs(G.values(k, k) - exact) / exact);
      for (int l = 0; l <= 10; ++l) {
        if (l != k) off = std::max(off, std::abs(G.values(k, l)));
      }
    }
  }
  return {diag <= 1e-8 && off <= 1e-12, "max diag rel err " + fmt("%.3g", diag) + ", max off-diag " + fmt("%.3g", off)};
}

Outcome projection_oracles() {
  QuadratureParams p;
  p.radial_panels = 256;
  const auto rule = build_quadrature(kDisc, p);
  const WeightedSpace space(rule, WeightExpr());
  const auto fac = orthonormalize(gram_matrix(space, 12));
  NodeValues conj_z;
  for (const auto& z : rule.nodes()) conj_z.push_back(std::conj(z[0]));
  double conj_max = 0.0;
  const HoloPoly g_conj = project(space, fac, conj_z).g;
  for (const auto& [alpha, c] : g_conj.coeffs()) conj_max = std::max(conj_max, std::abs(c));
  double worst = 0.0;
  for (double a : {0.3, 0.6, 0.9}) {
    NodeValues h0, h1;
    for (const auto& z : rule.nodes()) {
      const double chi = std::abs(z[0]) <= a ? 1.0 : 0.0;
      h0.push_back(chi);
      h1.push_back(chi * z[0]);
    }
    const HoloPoly g0 = project(space, fac, h0).g;
    const HoloPoly g1 = project(space, fac, h1).g;
    const double a2 = a * a, a4 = a2 * a2;
    // The full projections must be the constant a^2 and the monomial a^4 z.
    worst = std::max(worst, coefficient_distance(g0, HoloPoly::monomial(1, {{0, 0}}, a2)) / a2);
    worst = std::max(worst, coefficient_distance(g1, HoloPoly::monomial(1, {{1, 0}}, a4)) / a4);
  }
  return {conj_max <= 1e-10 && worst <= 2e-3,
          "max |P(conj z)| coeff " + fmt("%.3g", conj_max) + ", max indicator rel err " + fmt("%.3g", worst)};
}

std::vector<SuiteCase> suite_cache;

Outcome bound_suite() {
  suite_cache = random_bound_suite(10, 1, suite_params());
  int ok = 0;
  std::string bad;
  for (std::size_t i = 0; i < suite_cache.size(); ++i) {
    const auto& r = suite_cache[i].report;
    if (r.hypothesis_ok && r.bounds_pass()) {
      ++ok;
      continue;
    }
    bad += " case " + std::to_string(i + 1) + " [";
    if (!r.weighted_bound.pass) bad += " eM " + fmt("%.4g", r.weighted_bound.lhs) + ">" + fmt("%.4g", r.weighted_bound.rhs);
    if (!r.eps_bound.pass) bad += " eps " + fmt("%.4g", r.eps_bound.lhs) + ">" + fmt("%.4g", r.eps_bound.rhs);
    if (!r.C_bound.pass) bad += " C " + fmt("%.4g", r.C_bound.lhs) + ">" + fmt("%.4g", r.C_bound.rhs);
    bad += " ]";
  }
  return {ok == 10, std::to_string(ok) + "/10 cases satisfy all three bounds" + (bad.empty() ? "" : ";" + bad)};
}

Outcome orthogonality() {
  if (suite_cache.empty()) suite_cache = random_bound_suite(10, 1, suite_params());
  double worst = 0.0;
  for (const auto& c : suite_cache) {
    const auto& r = c.report;
    worst = std::max(worst, r.orthogonality_residual / std::max(r.chi_f_norm, 1e-300));
  }
  return {worst <= 1e-8, "max residual / ||chi f|| " + fmt("%.3g", worst)};
}

Outcome sweep() {
  SweepConfig s;
  s.base.domain = kDisc;
  s.base.quad = suite_params();
  s.base.phi = enforce_negative(log_z(1.5), kDisc);
  s.base.psi = s.base.phi;
  s.base.f = z_pow(1);
  s.direction = log_z(1.0);
  for (double eta = 0.4; s.etas.size() < 7; eta /= 2) s.etas.push_back(eta);
  const auto r = sweep_epsilon(s);
  std::string deltas;
  for (const auto& row : r.rows) deltas += " " + fmt("%.4g", row.delta);
  return {r.nonincreasing && r.final_within_floor && r.C_bounds_ok,
          std::string("nonincreasing ") + (r.nonincreasing ? "yes" : "no") + ", C bounds " +
              (r.C_bounds_ok ? "yes" : "no") + ", final " + fmt("%.3g", r.rows.back().delta) + " vs 10 x floor " +
              fmt("%.3g", 10 * r.quadrature_floor) + "; deltas" + deltas};
}

Outcome truncation() {
  TheoremConfig c;
  c.domain = kDisc;
  c.quad = suite_params();
  c.phi = enforce_negative(log_z(1.5), kDisc);
  c.psi = enforce_negative(log_z(1.9), kDisc);
  c.f = z_pow(1);
  c.epsilon = 1.1 * l1_distance(c.phi, c.psi, theorem_rule(c));
  const auto t = run_truncation(c, {1, 2, 4, 8, 16});
  bool contracts = true;
  for (const auto& row : t.rows) contracts = contracts && row.l1_contracts;
  const double last = t.rows.back().coeff_cauchy;
  const bool strict = t.cauchy_strictly_decreasing();
  std::string d;
  for (const auto& row : t.rows) d += " " + fmt("%.3g", row.coeff_cauchy);
  return {t.bounds_pass() && contracts && t.monotone_weights && strict && last <= 1e-6,
          std::string("uniform bound ") + (t.bounds_pass() ? "yes" : "no") + ", l1 contracts " +
              (contracts ? "yes" : "no") + ", strictly decreasing " + (strict ? "yes" : "no") + ", final " +
              fmt("%.3g", last) + "; distances" + d};
}

Outcome blocki() {
  struct Case {
    double a1, a2, T;
    int power;
  };
  const Case cases[] = {{1.5, 1.9, 5}, {0.8, 1.2, 4}, {2.0, 2.6, 6}, {1.0, 1.4, 3}, {2.5, 2.9, 8}};
  const int powers[] = {1, 0, 2, 1, 0};
  double worst = 0.0;
  int i = 0;
  for (const auto& k : cases) {
    TheoremConfig c;
    c.domain = kDisc;
    c.quad = suite_params();
    c.phi = enforce_negative(WeightExpr::max(log_z(k.a1), WeightExpr::constant(-k.T)), kDisc);
    c.psi = enforce_negative(WeightExpr::max(log_z(k.a2), WeightExpr::constant(-k.T)), kDisc);
    c.f = z_pow(powers[i++]);
    c.epsilon = 1.1 * l1_distance(c.phi, c.psi, theorem_rule(c));
    c.smoothing = c.epsilon / 2;
    worst = std::max(worst, blocki_check(c).ratio);
  }
  return {worst <= 1 + 1e-6, "max ratio " + fmt("%.4g", worst)};
}

Outcome remark() {
  bool ok = true;
  std::string d;
  for (auto [eps, j] : {std::pair{0.5, 3}, std::pair{0.9, 1}, std::pair{0.1, 10}}) {
    const auto rep = remark_suite(eps, j);
    d += " (" + fmt("%g", eps) + "," + std::to_string(j) + "):";
    for (const auto& item : rep.items) {
      const double e = item.result.fitted_exponent;
      // The boundary itself counts, up to the classifier's round-off allowance:
      // at eps = 0.1 the exact exponent of the In items is 0.1.
      const bool side = item.expected == Membership::In ? e >= 0.1 - 1e-9 : e <= -0.1 + 1e-9;
      ok = ok && item.matches() && side;
      d += " " + to_string(item.result.verdict) + "[" + fmt("%.6f", e) + "]";
    }
  }
  return {ok, "verdicts and exponents" + d};
}

Outcome ideals() {
  const int j = 3;
  const auto phi = WeightExpr::log_abs({1.0, 0.0}, 3.5);
  const auto phi_j = WeightExpr::log_abs({1.0, 1.0 / j}, 3.5);
  const HoloPoly g = mono2(1, 0) + mono2(0, 1, 1.0 / j);
  const auto tilted = compare_ideals({g}, phi_j, {mono2(1, 0)}, phi, 0.5, kPolydisc);
  const bool detected = tilted.a_not_subset_b && tilted.under_b[0] == Membership::Out;
  const auto mild = WeightExpr::log_abs({1.0, 0.0}, 1.5);
  const std::vector<HoloPoly> gens{mono2(0, 0), mono2(1, 0), mono2(0, 1)};
  bool equal = true;
  for (double t : {1.0, 4.0, 16.0}) {
    equal = equal && compare_ideals(gens, mild, gens, truncate(mild, t), 0.5, kPolydisc).conclusion == IdealRelation::Equal;
  }
  return {detected && equal, std::string("z1 + z2/3 outside I(1/2, phi): ") + (detected ? "detected" : "missed") +
                                 ", truncation Equal on {1, z1, z2}: " + (equal ? "yes" : "no")};
}

Outcome determinism() {
  const auto tmp = fs::temp_directory_path() / "pshlab_acceptance";
  const nlohmann::json suite = {{"command", "theorem"},
                                {"quadrature", {{"levels", 40}, {"radial_panels", 8}}},
                                {"suite_count", 10},
                                {"seed", 1}};
  const nlohmann::json rem = {{"command", "remark"},
                              {"remark_cases", {{{"epsilon", 0.5}, {"j", 3}}, {{"epsilon", 0.9}, {"j", 1}}, {{"epsilon", 0.1}, {"j", 10}}}}};
  bool same = true;
  std::string d;
  for (const auto& [name, doc] : {std::pair{"theorem", suite}, std::pair{"remark", rem}}) {
    const auto cfg = parse_config(doc);
    std::string reports[2];
    for (int k = 0; k < 2; ++k) {
      const auto dir = tmp / (std::string(name) + std::to_string(k));
      fs::remove_all(dir);
      const int code = run(cfg, {dir, true});
      if (code == 1) throw std::runtime_error(std::string(name) + " run failed");
      reports[k] = slurp(dir / "report.json");
    }
    const bool eq = !reports[0].empty() && reports[0] == reports[1];
    same = same && eq;
    d += std::string(" ") + name + (eq ? " identical" : " differs") + " (" + std::to_string(reports[0].size()) + " bytes)";
  }
  fs::remove_all(tmp);
  return {same, "canonical reports:" + d};
}

}  // namespace

int main() {
  criterion(1, "quadrature moments", 1.0, moments);
  criterion(2, "weighted Gram oracle", 5.0, gram_oracle);
  criterion(3, "projection oracles", 0.0, projection_oracles);
  criterion(4, "bound suite", 60.0, bound_suite);
  criterion(5, "orthogonality residual", 0.0, orthogonality);
  criterion(6, "epsilon sweep", 0.0, sweep);
  criterion(7, "truncation sequence", 0.0, truncation);
  criterion(8, "Blocki constant", 0.0, blocki);
  criterion(9, "remark suite", 120.0, remark);
  criterion(10, "ideal comparison", 0.0, ideals);
  criterion(11, "determinism", 0.0, determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
