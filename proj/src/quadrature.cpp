#include "pshlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace pshlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Angular offsets (in units of one step) per coordinate. Distinct
// non-rational-ratio offsets keep oblique loci off the node set.
constexpr std::array<double, 2> kAngularOffset = {0.5, 0.3819660112501051};

// Slope decisions allow this much round-off at the +-0.1 boundaries, so an
// exponent that equals the boundary in exact arithmetic is classified as the
// boundary's side.
constexpr double kSlopeRoundoff = 1e-9;
constexpr double kDeadZone = 0.1;

struct RadialNode {
  double r;
  double w;  // includes the polar Jacobian r
};

struct AngularNode {
  Complex unit;
  double w;
};

void check_resolution(int radial_n, int angular_n) {
  if (radial_n < 4 || angular_n < 4) {
    throw InputError("radial_n and angular_n must be >= 4 (got " + std::to_string(radial_n) +
                     ", " + std::to_string(angular_n) + ")");
  }
}

// Gauss-Legendre mapped to [a, b], weights multiplied by r.
void append_panel(double a, double b, const std::vector<double>& gx, const std::vector<double>& gw,
                  std::vector<RadialNode>& out) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double r = mid + half * gx[i];
    out.push_back({r, gw[i] * half * r});
  }
}

std::vector<double> panel_breaks(double radius, int panels, int levels, bool refine,
                                 const std::vector<double>& extra) {
  std::vector<double> breaks;
  const double h = radius / panels;
  breaks.push_back(0.0);
  if (refine && levels > 0) {
    for (int l = levels; l >= 1; --l) breaks.push_back(std::ldexp(h, -l));
  }
  for (int i = 1; i <= panels; ++i) breaks.push_back(i == panels ? radius : h * i);
  if (!extra.empty()) {
    for (double b : extra) {
      if (b > 0.0 && b < radius) breaks.push_back(b);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  }
  return breaks;
}

std::vector<RadialNode> radial_rule(double radius, const QuadratureParams& p, bool refine,
                                    const std::vector<double>& gx, const std::vector<double>& gw,
                                    const std::vector<double>& extra = {}) {
  std::vector<RadialNode> out;
  if (radius <= 0.0) return out;
  const auto breaks = panel_breaks(radius, p.radial_panels, p.levels, refine, extra);
  out.reserve((breaks.size() - 1) * gx.size());
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) append_panel(breaks[i], breaks[i + 1], gx, gw, out);
  return out;
}

std::vector<AngularNode> angular_rule(int n, int coordinate) {
  std::vector<AngularNode> out(n);
  const double step = 2.0 * kPi / n;
  for (int k = 0; k < n; ++k) {
    const double theta = step * (k + kAngularOffset[coordinate]);
    out[k] = {std::polar(1.0, theta), step};
  }
  return out;
}

std::size_t radial_count(const QuadratureParams& p, bool refine, bool with_breakpoints) {
  const std::size_t panels = static_cast<std::size_t>(p.radial_panels) +
                             (refine ? static_cast<std::size_t>(std::max(p.levels, 0)) : 0) +
                             (with_breakpoints ? p.breakpoints.size() : 0);
  return panels * static_cast<std::size_t>(p.radial_n);
}

bool refines(const std::vector<LinearForm>& loci, int coordinate) {
  return std::any_of(loci.begin(), loci.end(),
                     [&](const LinearForm& l) { return l.aligned_coordinate() == coordinate; });
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Disc: return "disc";
    case DomainKind::Polydisc: return "polydisc";
    case DomainKind::Ball: return "ball";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "disc") return DomainKind::Disc;
  if (name == "polydisc") return DomainKind::Polydisc;
  if (name == "ball") return DomainKind::Ball;
  throw InputError("unknown domain kind '" + name + "' (expected disc, polydisc or ball)");
}

Domain::Domain(DomainKind kind, std::vector<double> radii) : kind_(kind), radii_(std::move(radii)) {
  const std::size_t expected = kind == DomainKind::Polydisc ? 2 : 1;
  if (radii_.size() != expected) {
    throw InputError(to_string(kind) + " expects " + std::to_string(expected) + " radius value(s), got " +
                     std::to_string(radii_.size()));
  }
  for (double r : radii_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InputError("domain radii must be positive and finite");
  }
}

double Domain::coordinate_radius(int j) const {
  return kind_ == DomainKind::Polydisc ? radii_.at(j) : radii_[0];
}

double Domain::volume() const {
  switch (kind_) {
    case DomainKind::Disc: return kPi * radii_[0] * radii_[0];
    case DomainKind::Polydisc: {
      const double a = radii_[0] * radii_[0];
      const double b = radii_[1] * radii_[1];
      return kPi * kPi * a * b;
    }
    case DomainKind::Ball: return 0.5 * kPi * kPi * std::pow(radii_[0], 4);
  }
  return 0.0;
}

bool Domain::contains(const Point& z) const {
  switch (kind_) {
    case DomainKind::Disc: return std::abs(z[0]) < radii_[0];
    case DomainKind::Polydisc: return std::abs(z[0]) < radii_[0] && std::abs(z[1]) < radii_[1];
    case DomainKind::Ball: return std::norm(z[0]) + std::norm(z[1]) < radii_[0] * radii_[0];
  }
  return false;
}

Domain build_domain(DomainKind kind, std::vector<double> radii) { return Domain(kind, std::move(radii)); }

int LinearForm::aligned_coordinate() const {
  int found = -1;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != Complex(0.0)) {
      if (found >= 0) return -1;
      found = static_cast<int>(j);
    }
  }
  return found;
}

QuadratureRule::QuadratureRule(Domain domain, QuadratureParams params, std::vector<LinearForm> loci,
                               std::vector<Point> nodes, std::vector<double> weights)
    : domain_(std::move(domain)),
      params_(params),
      loci_(std::move(loci)),
      nodes_(std::move(nodes)),
      weights_(std::move(weights)) {}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

QuadratureRule build_quadrature(const Domain& domain, const QuadratureParams& params,
                                std::vector<LinearForm> singular_loci) {
  check_resolution(params.radial_n, params.angular_n);
  if (params.levels < 0) throw InputError("levels must be >= 0");
  if (params.radial_panels < 1) throw InputError("radial_panels must be >= 1");
  for (const auto& l : singular_loci) {
    if (l.coeffs.size() != static_cast<std::size_t>(domain.dim())) {
      throw InputError("singular locus arity does not match the domain dimension");
    }
    if (l.aligned_coordinate() < 0 && std::all_of(l.coeffs.begin(), l.coeffs.end(),
                                                  [](Complex c) { return c == Complex(0.0); })) {
      throw InputError("singular locus has all-zero coefficients");
    }
  }

  const int n = domain.dim();
  const bool refine0 = refines(singular_loci, 0);
  const bool refine1 = n == 2 && refines(singular_loci, 1);
  std::size_t count = radial_count(params, refine0, true) * params.angular_n;
  if (n == 2) count *= radial_count(params, refine1, false) * params.angular_n;
  if (count > params.node_cap) {
    throw ResourceError("quadrature would need " + std::to_string(count) + " nodes, cap is " +
                        std::to_string(params.node_cap));
  }

  std::vector<double> gx, gw;
  gauss_legendre(params.radial_n, gx, gw);

  std::vector<Point> nodes;
  std::vector<double> weights;
  nodes.reserve(count);
  weights.reserve(count);

  const auto ang0 = angular_rule(params.angular_n, 0);
  const auto rad0 = radial_rule(domain.coordinate_radius(0), params, refine0, gx, gw, params.breakpoints);
  if (n == 1) {
    for (const auto& rn : rad0) {
      for (const auto& an : ang0) {
        nodes.push_back({rn.r * an.unit, Complex(0.0)});
        weights.push_back(rn.w * an.w);
      }
    }
  } else {
    const auto ang1 = angular_rule(params.angular_n, 1);
    std::vector<RadialNode> rad1;
    if (domain.kind() == DomainKind::Polydisc) rad1 = radial_rule(domain.coordinate_radius(1), params, refine1, gx, gw);
    const double ball_r = domain.radii()[0];
    for (const auto& rn : rad0) {
      // Ball: second radius ranges over [0, sqrt(R^2 - r1^2)].
      if (domain.kind() == DomainKind::Ball) {
        rad1 = radial_rule(std::sqrt(std::max(0.0, ball_r * ball_r - rn.r * rn.r)), params, refine1, gx, gw);
      }
      for (const auto& an : ang0) {
        const Complex z1 = rn.r * an.unit;
        const double w1 = rn.w * an.w;
        for (const auto& rm : rad1) {
          for (const auto& am : ang1) {
            nodes.push_back({z1, rm.r * am.unit});
            weights.push_back(w1 * rm.w * am.w);
          }
        }
      }
    }
  }

  for (const auto& l : singular_loci) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (l(nodes[i]) == Complex(0.0)) {
        throw NumericalError("quadrature node " + std::to_string(i) + " lies on a singular locus");
      }
    }
  }
  return QuadratureRule(domain, params, std::move(singular_loci), std::move(nodes), std::move(weights));
}

QuadratureRule refine_twice(const QuadratureRule& rule) {
  QuadratureParams p = rule.params();
  p.radial_panels *= 2;
  p.angular_n *= 2;
  p.levels += 8;
  p.node_cap = std::max(p.node_cap, rule.size() * 8);
  return build_quadrature(rule.domain(), p, rule.loci());
}

double weighted_sum(std::span<const double> weights, std::span<const double> values) {
  CompensatedSum s;
  for (std::size_t i = 0; i < weights.size(); ++i) s.add(weights[i] * values[i]);
  return s.value();
}

Complex weighted_sum(std::span<const double> weights, std::span<const Complex> values) {
  CompensatedSum re, im;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    re.add(weights[i] * values[i].real());
    im.add(weights[i] * values[i].imag());
  }
  return {re.value(), im.value()};
}

double integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& fn) {
  const auto values = sample<double>(rule, fn);
  return weighted_sum(rule.weights(), values);
}

Complex integrate_complex(const QuadratureRule& rule, const std::function<Complex(const Point&)>& fn) {
  const auto values = sample<Complex>(rule, fn);
  return weighted_sum(rule.weights(), values);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Finite: return "finite";
    case Verdict::Divergent: return "divergent";
    case Verdict::Undecided: return "undecided";
  }
  return "undecided";
}

namespace {

// Integral of the integrand over one dyadic shell {2^-(k+1) < |l| <= 2^-k}.
double shell_integral(const Domain& domain, const std::function<double(const Point&)>& fn,
                      const LinearForm& locus, int k, const ShellParams& sp,
                      const std::vector<double>& gx, const std::vector<double>& gw) {
  const double lo_l = std::ldexp(1.0, -(k + 1));
  const double hi_l = std::ldexp(1.0, -k);
  CompensatedSum acc;
  auto add = [&](const Point& z, double w) {
    const double v = fn(z);
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite integrand in shell " + std::to_string(k));
    }
    acc.add(w * v);
  };
  auto shell_radial = [&](double lo, double hi) {
    std::vector<RadialNode> out;
    if (hi > lo) append_panel(lo, hi, gx, gw, out);
    return out;
  };
  auto disc_radial = [&](double radius) {
    std::vector<RadialNode> out;
    if (radius > 0.0) append_panel(0.0, radius, gx, gw, out);
    return out;
  };

  if (domain.dim() == 1) {
    const double c = std::abs(locus.coeffs[0]);
    const auto rad = shell_radial(lo_l / c, std::min(hi_l / c, domain.radii()[0]));
    const auto ang = angular_rule(sp.angular_n, 0);
    for (const auto& rn : rad) {
      for (const auto& an : ang) add({rn.r * an.unit, Complex(0.0)}, rn.w * an.w);
    }
    return acc.value();
  }

  const int p = std::abs(locus.coeffs[0]) >= std::abs(locus.coeffs[1]) ? 0 : 1;
  const int q = 1 - p;
  const Complex cp = locus.coeffs[p];
  const Complex cq = locus.coeffs[q];
  const double jac = 1.0 / std::norm(cp);
  const auto ang_w = angular_rule(sp.angular_n, 0);
  const auto ang_q = angular_rule(sp.angular_n, 1);

  if (cq == Complex(0.0)) {
    // Aligned: exact annulus in z_p, full (or conditional) disc in z_q.
    const double rp = domain.coordinate_radius(p);
    const auto rad = shell_radial(lo_l / std::abs(cp), std::min(hi_l / std::abs(cp), rp));
    for (const auto& rn : rad) {
      const double rq = domain.kind() == DomainKind::Ball
                            ? std::sqrt(std::max(0.0, rp * rp - rn.r * rn.r))
                            : domain.coordinate_radius(q);
      const auto radq = disc_radial(rq);
      for (const auto& an : ang_w) {
        const Complex zp = rn.r * an.unit;
        for (const auto& rm : radq) {
          for (const auto& am : ang_q) {
            Point z{};
            z[p] = zp;
            z[q] = rm.r * am.unit;
            add(z, rn.w * an.w * rm.w * am.w);
          }
        }
      }
    }
    return acc.value();
  }

  // Oblique: integrate in (w, z_q) with w = l(z); z_p = (w - c_q z_q) / c_p.
  const double rq = domain.coordinate_radius(q);
  const double w_max = std::abs(cp) * domain.coordinate_radius(p) + std::abs(cq) * rq;
  const auto rad = shell_radial(lo_l, std::min(hi_l, w_max));
  const auto radq = disc_radial(rq);
  for (const auto& rn : rad) {
    for (const auto& an : ang_w) {
      const Complex w = rn.r * an.unit;
      for (const auto& rm : radq) {
        for (const auto& am : ang_q) {
          Point z{};
          z[q] = rm.r * am.unit;
          z[p] = (w - cq * z[q]) / cp;
          if (!domain.contains(z)) continue;
          add(z, jac * rn.w * an.w * rm.w * am.w);
        }
      }
    }
  }
  return acc.value();
}

}  // namespace

IntegralOutcome classify_shells(std::vector<double> shells) {
  IntegralOutcome out;
  out.shells = std::move(shells);
  const auto& I = out.shells;
  const int K = static_cast<int>(I.size()) - 1;
  if (K < 3) throw InputError("shell classification needs k_max >= 3");

  CompensatedSum total;
  for (double v : I) total.add(v);

  if (std::all_of(I.begin(), I.end(), [](double v) { return v == 0.0; })) {
    out.verdict = Verdict::Finite;
    out.value = 0.0;
    out.fitted_exponent = std::numeric_limits<double>::infinity();
    return out;
  }

  int first = 0;
  while (I[first] <= 0.0) ++first;
  const int start = std::max(first, K / 2);
  if (start > K - 2) {
    out.verdict = Verdict::Undecided;
    return out;
  }

  // A shell that vanishes after a positive one counts as very fast decay.
  constexpr double kVanished = 64.0;
  double slope_sum = 0.0;
  bool non_decaying = true;
  for (int k = start; k < K; ++k) {
    const double ratio = I[k + 1] > 0.0 ? std::log2(I[k] / I[k + 1]) : kVanished;
    slope_sum += ratio;
    if (I[k + 1] < I[k] * (1.0 - kSlopeRoundoff)) non_decaying = false;
  }
  const double s = slope_sum / (K - start);
  out.fitted_exponent = s;

  if (s >= kDeadZone - kSlopeRoundoff) {
    const double q = std::exp2(-s);
    out.verdict = Verdict::Finite;
    out.value = total.value() + I[K] * q / (1.0 - q);
  } else if (s <= -kDeadZone + kSlopeRoundoff || non_decaying) {
    out.verdict = Verdict::Divergent;
  } else {
    out.verdict = Verdict::Undecided;
  }
  return out;
}

IntegralOutcome integrate_shells(const Domain& domain, const std::function<double(const Point&)>& integrand,
                                 const LinearForm& locus, const ShellParams& params) {
  if (params.k_max < 3) throw InputError("integrate_shells needs k_max >= 3");
  check_resolution(params.radial_n, params.angular_n);
  if (locus.coeffs.size() != static_cast<std::size_t>(domain.dim())) {
    throw InputError("shell locus arity does not match the domain dimension");
  }
  if (std::all_of(locus.coeffs.begin(), locus.coeffs.end(), [](Complex c) { return c == Complex(0.0); })) {
    throw InputError("shell locus has all-zero coefficients");
  }
  std::vector<double> gx, gw;
  gauss_legendre(params.radial_n, gx, gw);
  std::vector<double> shells(params.k_max + 1, 0.0);
  for_each_chunk(shells.size(), 1, [&](std::size_t, std::size_t k, std::size_t) {
    shells[k] = shell_integral(domain, integrand, locus, static_cast<int>(k), params, gx, gw);
  });
  return classify_shells(std::move(shells));
}

IntegralOutcome integrate_shells(const QuadratureRule& rule, const std::function<double(const Point&)>& integrand,
                                 const LinearForm& locus, int k_max) {
  ShellParams sp;
  sp.k_max = k_max;
  sp.radial_n = rule.params().radial_n;
  sp.angular_n = rule.params().angular_n;
  return integrate_shells(rule.domain(), integrand, locus, sp);
}

void write_rule_csv(const QuadratureRule& rule, std::ostream& out) {
  const bool two = rule.domain().dim() == 2;
  out << (two ? "re_z1,im_z1,re_z2,im_z2,weight\n" : "re_z1,im_z1,weight\n");
  char buf[160];
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Point& z = rule.nodes()[i];
    if (two) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", z[0].real(), z[0].imag(), z[1].real(),
                    z[1].imag(), rule.weights()[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", z[0].real(), z[0].imag(), rule.weights()[i]);
    }
    out << buf;
  }
}

}  // namespace pshlab
