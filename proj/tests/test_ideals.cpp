#include <gtest/gtest.h>

#include <random>

#include "pshlab/errors.hpp"
#include "pshlab/ideals.hpp"

using namespace pshlab;

namespace {

const Domain kPolydisc(DomainKind::Polydisc, {1.0, 1.0});
const LinearForm kZ1{{1.0, 0.0}};

HoloPoly mono(int a, int b, Complex c = 1.0) { return HoloPoly::monomial(2, {{a, b}}, c); }

// Smaller shell rule for the randomized property checks.
const ShellParams kQuick{16, 8, 16};

void expect_outside_dead_zone(const MembershipResult& r) {
  if (r.verdict == Membership::In) EXPECT_GE(r.fitted_exponent, 0.1 - 1e-9);
  if (r.verdict == Membership::Out) EXPECT_LE(r.fitted_exponent, -0.1 + 1e-9);
}

}  // namespace

TEST(Membership, AxisExamples) {
  const auto phi = WeightExpr::log_abs(kZ1.coeffs, 3.5);
  const auto in = classify_membership({mono(1, 0), 0.5, phi, kPolydisc, kZ1});
  EXPECT_EQ(in.verdict, Membership::In);
  EXPECT_NEAR(in.fitted_exponent, 0.5, 1e-9);
  const auto out = classify_membership({mono(0, 1), 0.5, phi, kPolydisc, kZ1});
  EXPECT_EQ(out.verdict, Membership::Out);
  EXPECT_NEAR(out.fitted_exponent, -1.5, 1e-9);
  EXPECT_EQ(classify_membership({HoloPoly(2), 0.5, phi, kPolydisc, kZ1}).verdict, Membership::In);
}

TEST(Membership, QueryValidation) {
  const auto phi = WeightExpr::log_abs(kZ1.coeffs, 1.0);
  EXPECT_THROW(classify_membership({mono(1, 0), 0.0, phi, kPolydisc, kZ1}), InputError);
  EXPECT_THROW(classify_membership({mono(1, 0), 0.5, phi, kPolydisc, LinearForm{{0.0, 0.0}}}), InputError);
  EXPECT_THROW(classify_membership({HoloPoly::monomial(1, {{1, 0}}), 0.5, phi, kPolydisc, kZ1}), InputError);
}

TEST(Membership, BoundedWeightAdmitsEverything) {
  const auto r = classify_membership_auto(mono(0, 0), 0.5, WeightExpr::square_norm(1.0), kPolydisc);
  EXPECT_EQ(r.verdict, Membership::In);
}

TEST(RemarkSuite, ReproducesTheFourClassifications) {
  for (auto [eps, j] : {std::pair{0.5, 3}, std::pair{0.9, 1}}) {
    const auto rep = remark_suite(eps, j);
    ASSERT_EQ(rep.items.size(), 4u);
    EXPECT_EQ(rep.items[0].result.verdict, Membership::In);
    EXPECT_EQ(rep.items[1].result.verdict, Membership::Out);
    EXPECT_EQ(rep.items[2].result.verdict, Membership::In);
    EXPECT_EQ(rep.items[3].result.verdict, Membership::Out);
    EXPECT_TRUE(rep.all_match());
    EXPECT_FALSE(rep.any_undecided());
    for (const auto& item : rep.items) expect_outside_dead_zone(item.result);
  }
}

TEST(RemarkSuite, TiltedItemGrowthExponent) {
  // |l|^-(4 - eps) |z1|^2 near {l = 0} with z1 ~ -z2/j: shells grow like 2^{k(2 - eps)}.
  const auto rep = remark_suite(0.5, 3);
  EXPECT_NEAR(rep.items[1].result.fitted_exponent, -1.5, 1e-3);
}

TEST(RemarkSuite, RejectsOutOfRangeParameters) {
  EXPECT_THROW(remark_suite(0.0, 3), InputError);
  EXPECT_THROW(remark_suite(1.0, 3), InputError);
  EXPECT_THROW(remark_suite(0.5, 0), InputError);
}

TEST(Membership, ScalingConsistencyOnRandomQueries) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> scale(0.5, 4.0), tilt(-1.0, 1.0), cdist(0.2, 1.0);
  std::uniform_int_distribution<int> deg(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearForm l{{1.0, Complex(tilt(rng), tilt(rng))}};
    const auto phi = WeightExpr::log_abs(l.coeffs, scale(rng));
    const double c = cdist(rng);
    const HoloPoly f = mono(deg(rng), deg(rng));
    const auto a = classify_membership({f, c, phi, kPolydisc, l}, kQuick);
    const auto b = classify_membership({f, c / 2, WeightExpr::sum({{2.0, phi}}), kPolydisc, l}, kQuick);
    EXPECT_EQ(a.verdict, b.verdict) << "trial " << trial;
    expect_outside_dead_zone(a);
  }
}

TEST(Membership, LargerWeightAdmitsMore) {
  // truncate(phi, j) >= phi, so membership under phi implies membership under
  // the truncation.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> scale(0.5, 4.0);
  std::uniform_int_distribution<int> deg(0, 2);
  for (int trial = 0; trial < 8; ++trial) {
    const auto phi = WeightExpr::log_abs(kZ1.coeffs, scale(rng));
    const auto phi_j = truncate(phi, 1.0 + trial);
    const HoloPoly f = mono(deg(rng), deg(rng));
    const auto under_phi = classify_membership_auto(f, 0.5, phi, kPolydisc, kQuick).verdict;
    const auto under_trunc = classify_membership_auto(f, 0.5, phi_j, kPolydisc, kQuick).verdict;
    EXPECT_EQ(under_trunc, Membership::In);
    if (under_phi == Membership::In) EXPECT_EQ(under_trunc, Membership::In);
  }
}

TEST(CompareIdeals, SameWeightIsEqual) {
  const auto phi = WeightExpr::log_abs(kZ1.coeffs, 3.5);
  const auto cmp = compare_ideals({mono(1, 0)}, phi, {mono(1, 0), mono(2, 0)}, phi, 0.5, kPolydisc, kQuick);
  EXPECT_EQ(cmp.conclusion, IdealRelation::Equal);
}

TEST(CompareIdeals, TiltedWeightDetectsNonInclusion) {
  const int j = 3;
  const auto phi = WeightExpr::log_abs(kZ1.coeffs, 3.5);
  const auto phi_j = WeightExpr::log_abs({1.0, 1.0 / j}, 3.5);
  const HoloPoly g = mono(1, 0) + mono(0, 1, 1.0 / j);
  const auto cmp = compare_ideals({g}, phi_j, {mono(1, 0)}, phi, 0.5, kPolydisc, kQuick);
  EXPECT_TRUE(cmp.a_not_subset_b);
  EXPECT_EQ(cmp.under_a[0], Membership::In);
  EXPECT_EQ(cmp.under_b[0], Membership::Out);
  // z1 is not in I(1/2, phi_j) either, so the two ideals are incomparable.
  EXPECT_TRUE(cmp.b_not_subset_a);
  EXPECT_EQ(cmp.conclusion, IdealRelation::Incomparable);
}

TEST(CompareIdeals, TruncationKeepsGeneratorsOfMildWeight) {
  const auto phi = WeightExpr::log_abs(kZ1.coeffs, 1.5);
  const std::vector<HoloPoly> gens{mono(0, 0), mono(1, 0), mono(0, 1)};
  const auto cmp = compare_ideals(gens, phi, gens, truncate(phi, 4.0), 0.5, kPolydisc, kQuick);
  EXPECT_EQ(cmp.conclusion, IdealRelation::Equal);
  for (auto m : cmp.under_a) EXPECT_EQ(m, Membership::In);
}

TEST(IdealsJson, RemarkReportCarriesPerQueryRecords) {
  const auto rep = remark_suite(0.5, 3, kQuick);
  const auto j = to_json(rep);
  ASSERT_EQ(j["items"].size(), 4u);
  for (const char* key : {"f", "c", "weight", "verdict", "fitted_exponent", "shells"}) {
    EXPECT_TRUE(j["items"][0].contains(key)) << key;
  }
  EXPECT_EQ(remark_csv_rows(rep).size(), 4u);
}
