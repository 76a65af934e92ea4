#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "pshlab/errors.hpp"
#include "pshlab/quadrature.hpp"

using namespace pshlab;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Unit-ball moment of |z1|^(2k) |z2|^(2l): pi^2 k! l! / (k + l + 2)!.
double ball_moment(int k, int l) {
  return kPi * kPi * std::tgamma(k + 1.0) * std::tgamma(l + 1.0) / std::tgamma(k + l + 3.0);
}

}  // namespace

TEST(GaussLegendre, ThreePointRuleMatchesClosedForm) {
  std::vector<double> x, w;
  gauss_legendre(3, x, w);
  ASSERT_EQ(x.size(), 3u);
  std::sort(x.begin(), x.end());
  EXPECT_NEAR(x[0], -std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
  EXPECT_NEAR(x[2], std::sqrt(0.6), 1e-15);
  double total = 0.0;
  for (double wi : w) total += wi;
  EXPECT_NEAR(total, 2.0, 1e-14);
}

TEST(GaussLegendre, ExactUpToDegreeTwoNMinusOne) {
  for (int n : {4, 16, 64}) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int p = 0; p <= 2 * n - 1; p += 2) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], p);
      EXPECT_NEAR(s, 2.0 / (p + 1), 1e-13) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Domain, VolumesAndMembership) {
  EXPECT_NEAR(Domain(DomainKind::Disc, {2.0}).volume(), 4 * kPi, 1e-14);
  EXPECT_NEAR(Domain(DomainKind::Polydisc, {1.0, 0.5}).volume(), kPi * kPi * 0.25, 1e-14);
  EXPECT_NEAR(Domain(DomainKind::Ball, {1.0}).volume(), kPi * kPi / 2, 1e-14);
  const Domain ball(DomainKind::Ball, {1.0});
  EXPECT_TRUE(ball.contains({Complex(0.6, 0), Complex(0, 0.6)}));
  EXPECT_FALSE(ball.contains({Complex(0.8, 0), Complex(0, 0.8)}));
  EXPECT_THROW(build_domain(DomainKind::Disc, {-1.0}), InputError);
  EXPECT_THROW(build_domain(DomainKind::Polydisc, {1.0}), InputError);
}

TEST(Quadrature, DiscMomentsAt64By64) {
  QuadratureParams p;
  p.radial_n = 64;
  p.angular_n = 64;
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), p);
  for (int k = 0; k <= 10; ++k) {
    const double v = integrate(rule, [k](const Point& z) { return std::pow(std::norm(z[0]), k); });
    EXPECT_LE(rel(v, kPi / (k + 1)), 1e-10) << "k=" << k;
  }
}

TEST(Quadrature, AngularExactness) {
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), {});
  // int Re(z)^2 over the unit disc = pi/4; int z over the disc = 0.
  EXPECT_NEAR(integrate(rule, [](const Point& z) { return z[0].real() * z[0].real(); }), kPi / 4, 1e-13);
  EXPECT_NEAR(std::abs(integrate_complex(rule, [](const Point& z) { return z[0]; })), 0.0, 1e-14);
}

TEST(Quadrature, PolydiscAndBallMoments) {
  QuadratureParams p;
  p.radial_n = 16;
  p.angular_n = 16;
  const auto poly = build_quadrature(Domain(DomainKind::Polydisc, {1.0, 0.5}), p);
  const auto ball = build_quadrature(Domain(DomainKind::Ball, {1.0}), p);
  for (int k = 0; k <= 3; ++k) {
    for (int l = 0; l <= 3; ++l) {
      auto mono = [k, l](const Point& z) { return std::pow(std::norm(z[0]), k) * std::pow(std::norm(z[1]), l); };
      const double exact_poly = kPi / (k + 1) * kPi * std::pow(0.5, 2 * l + 2) / (l + 1);
      EXPECT_LE(rel(integrate(poly, mono), exact_poly), 1e-12);
      EXPECT_LE(rel(integrate(ball, mono), ball_moment(k, l)), 1e-12) << k << "," << l;
    }
  }
}

TEST(Quadrature, RefinementTowardAlignedLocusIntegratesLogSingularity) {
  QuadratureParams p;
  p.levels = 40;
  const LinearForm z{{1.0}};
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), p, {z});
  // int_D |z|^-1 = 2 pi; int_D log|z| = -pi/2.
  EXPECT_LE(rel(integrate(rule, [](const Point& w) { return 1.0 / std::abs(w[0]); }), 2 * kPi), 1e-9);
  EXPECT_LE(rel(integrate(rule, [](const Point& w) { return std::log(std::abs(w[0])); }), -kPi / 2), 1e-9);
}

TEST(Quadrature, ObliqueLocusAvoidsNodes) {
  const LinearForm diag{{1.0, -1.0}};
  QuadratureParams p;
  p.radial_n = 8;
  p.angular_n = 16;
  const auto rule = build_quadrature(Domain(DomainKind::Polydisc, {1.0, 1.0}), p, {diag});
  double closest = 1.0;
  for (const auto& z : rule.nodes()) closest = std::min(closest, std::abs(diag(z)));
  EXPECT_GT(closest, 0.0);
}

TEST(Quadrature, NodeCapRaisesResourceError) {
  QuadratureParams p;
  p.radial_n = 64;
  p.angular_n = 64;
  p.node_cap = 1000;
  EXPECT_THROW(build_quadrature(Domain(DomainKind::Disc, {1.0}), p), ResourceError);
}

TEST(Quadrature, RefineTwiceDoublesResolution) {
  QuadratureParams p;
  p.radial_n = 8;
  p.angular_n = 16;
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), p);
  const auto fine = refine_twice(rule);
  EXPECT_GT(fine.size(), rule.size());
  EXPECT_EQ(fine.params().angular_n, 32);
}

TEST(Quadrature, NonFiniteIntegrandNamesNode) {
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), {});
  try {
    integrate(rule, [](const Point&) { return std::nan(""); });
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
}

TEST(Quadrature, ResultIndependentOfThreadCount) {
  QuadratureParams p;
  p.radial_n = 32;
  p.angular_n = 128;
  p.radial_panels = 8;
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), p);
  auto fn = [](const Point& z) { return std::exp(z[0].real()) * std::cos(3 * z[0].imag()); };
  setenv("PSHLAB_THREADS", "1", 1);
  const double one = integrate(rule, fn);
  setenv("PSHLAB_THREADS", "5", 1);
  const double five = integrate(rule, fn);
  unsetenv("PSHLAB_THREADS");
  EXPECT_EQ(one, five);
}

TEST(ShellClassification, GeometricDecayIsFinite) {
  std::vector<double> shells;
  for (int k = 0; k <= 20; ++k) shells.push_back(std::pow(2.0, -0.5 * k));
  const auto out = classify_shells(shells);
  EXPECT_EQ(out.verdict, Verdict::Finite);
  EXPECT_NEAR(out.fitted_exponent, 0.5, 1e-12);
  EXPECT_NEAR(out.value, 1.0 / (1.0 - std::pow(2.0, -0.5)), 1e-12);
}

TEST(ShellClassification, GrowthAndPlateauAreDivergent) {
  std::vector<double> grow, flat;
  for (int k = 0; k <= 20; ++k) {
    grow.push_back(std::pow(2.0, 0.3 * k));
    flat.push_back(1.0);
  }
  const auto g = classify_shells(grow);
  EXPECT_EQ(g.verdict, Verdict::Divergent);
  EXPECT_NEAR(g.fitted_exponent, -0.3, 1e-12);
  EXPECT_EQ(classify_shells(flat).verdict, Verdict::Divergent);
}

TEST(ShellClassification, DeadZoneIsUndecided) {
  std::vector<double> slow;
  for (int k = 0; k <= 20; ++k) slow.push_back(std::pow(2.0, -0.05 * k));
  EXPECT_EQ(classify_shells(slow).verdict, Verdict::Undecided);
}

TEST(ShellClassification, AllZeroIsFiniteZero) {
  const auto out = classify_shells(std::vector<double>(21, 0.0));
  EXPECT_EQ(out.verdict, Verdict::Finite);
  EXPECT_EQ(out.value, 0.0);
}

TEST(ShellIntegration, PowerSingularityOnDisc) {
  const Domain disc(DomainKind::Disc, {1.0});
  const LinearForm z{{1.0}};
  // int_D |z|^-a = 2 pi / (2 - a); shell I_k scales like 2^{-k(2-a)}.
  const auto fin = integrate_shells(disc, [](const Point& w) { return std::pow(std::abs(w[0]), -1.0); }, z, {});
  EXPECT_EQ(fin.verdict, Verdict::Finite);
  EXPECT_NEAR(fin.fitted_exponent, 1.0, 1e-9);
  EXPECT_LE(rel(fin.value, 2 * kPi), 1e-9);
  const auto div = integrate_shells(disc, [](const Point& w) { return std::pow(std::abs(w[0]), -2.5); }, z, {});
  EXPECT_EQ(div.verdict, Verdict::Divergent);
  EXPECT_NEAR(div.fitted_exponent, -0.5, 1e-9);
}

TEST(ShellIntegration, PolydiscAlignedAndOblique) {
  const Domain pd(DomainKind::Polydisc, {1.0, 1.0});
  const auto aligned =
      integrate_shells(pd, [](const Point& w) { return 1.0 / std::abs(w[0]); }, LinearForm{{1.0, 0.0}}, {});
  EXPECT_EQ(aligned.verdict, Verdict::Finite);
  EXPECT_LE(rel(aligned.value, 2 * kPi * kPi), 1e-8);
  const LinearForm tilt{{1.0, 0.5}};
  const auto oblique =
      integrate_shells(pd, [&](const Point& w) { return std::pow(std::abs(tilt(w)), -3.0); }, tilt, {});
  EXPECT_EQ(oblique.verdict, Verdict::Divergent);
  EXPECT_NEAR(oblique.fitted_exponent, -1.0, 1e-6);
}

TEST(ShellIntegration, RejectsTooFewShells) {
  EXPECT_THROW(integrate_shells(Domain(DomainKind::Disc, {1.0}), [](const Point&) { return 1.0; },
                                LinearForm{{1.0}}, ShellParams{2, 8, 8}),
               InputError);
}

TEST(Quadrature, RuleCsvHasOneRowPerNode) {
  QuadratureParams p;
  p.radial_n = 4;
  p.angular_n = 4;
  const auto rule = build_quadrature(Domain(DomainKind::Disc, {1.0}), p);
  std::ostringstream out;
  write_rule_csv(rule, out);
  const std::string s = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), rule.size() + 1);
}
