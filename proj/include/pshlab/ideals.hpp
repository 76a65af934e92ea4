#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pshlab/poly.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

enum class Membership { In, Out, Undecided };
std::string to_string(Membership m);

/// Is |f|^2 e^{-2c weight} integrable on the domain? The shell test runs
/// around `locus`.
struct MembershipQuery {
  HoloPoly f;
  double c = 0.5;
  WeightExpr weight;
  Domain domain{DomainKind::Polydisc, {1.0, 1.0}};
  LinearForm locus;

  void validate() const;
};

struct MembershipResult {
  Membership verdict = Membership::Undecided;
  double fitted_exponent = 0.0;
  std::vector<double> shells;
};

/// In iff the shell classification is Finite, Out iff Divergent.
MembershipResult classify_membership(const MembershipQuery& q, const ShellParams& params = {});

/// Membership with the shell test run around every log locus of the weight:
/// Out if any locus diverges, In if all converge (or there is no locus).
MembershipResult classify_membership_auto(const HoloPoly& f, double c, const WeightExpr& weight,
                                          const Domain& domain, const ShellParams& params = {});

struct RemarkItem {
  std::string label;
  HoloPoly f;
  WeightExpr weight;
  LinearForm locus;
  Membership expected = Membership::Undecided;
  MembershipResult result;

  bool matches() const { return result.verdict == expected; }
};

/// The four membership items on the unit polydisc with c = 1/2:
///   (a) z1 under (4-eps) ln|z1|               expected In
///   (b) z1 under (4-eps) ln|z1 + z2/j|        expected Out
///   (c) z1 + z2/j under (4-eps) ln|z1 + z2/j| expected In
///   (d) z2 under (4-eps) ln|z1|               expected Out
struct RemarkReport {
  double epsilon = 0.0;
  int j = 1;
  std::vector<RemarkItem> items;

  bool all_match() const;
  bool any_undecided() const;
};

RemarkReport remark_suite(double epsilon, int j, const ShellParams& params = {});

enum class IdealRelation { Equal, AnotSubsetB, BnotSubsetA, Incomparable, Undecided };
std::string to_string(IdealRelation r);

/// Comparison of I(c, weight_A) and I(c, weight_B) restricted to the union of
/// the two generator lists. Every generator is classified under both weights;
/// A is not contained in B when some generator is In under A and Out under B.
/// Equality is certified only on the tested generators.
struct IdealComparison {
  std::vector<HoloPoly> generators;             ///< A's generators, then B's
  std::vector<Membership> under_a, under_b;     ///< per generator
  bool a_not_subset_b = false;
  bool b_not_subset_a = false;
  IdealRelation conclusion = IdealRelation::Undecided;
};

IdealComparison compare_ideals(const std::vector<HoloPoly>& generators_a, const WeightExpr& weight_a,
                               const std::vector<HoloPoly>& generators_b, const WeightExpr& weight_b,
                               double c, const Domain& domain, const ShellParams& params = {});

nlohmann::json to_json(const MembershipResult& r);
nlohmann::json to_json(const RemarkReport& r);
nlohmann::json to_json(const IdealComparison& r);

std::string remark_csv_header();
std::vector<std::string> remark_csv_rows(const RemarkReport& r);

}  // namespace pshlab
