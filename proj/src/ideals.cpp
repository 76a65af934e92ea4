#include "pshlab/ideals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pshlab/bergman.hpp"
#include "pshlab/errors.hpp"

namespace pshlab {

namespace {

Membership from_verdict(Verdict v) {
  switch (v) {
    case Verdict::Finite: return Membership::In;
    case Verdict::Divergent: return Membership::Out;
    case Verdict::Undecided: break;
  }
  return Membership::Undecided;
}

nlohmann::json locus_json(const LinearForm& l) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : l.coeffs) out.push_back({c.real(), c.imag()});
  return out;
}

}  // namespace

std::string to_string(Membership m) {
  switch (m) {
    case Membership::In: return "In";
    case Membership::Out: return "Out";
    case Membership::Undecided: return "Undecided";
  }
  return "Undecided";
}

std::string to_string(IdealRelation r) {
  switch (r) {
    case IdealRelation::Equal: return "Equal";
    case IdealRelation::AnotSubsetB: return "AnotSubsetB";
    case IdealRelation::BnotSubsetA: return "BnotSubsetA";
    case IdealRelation::Incomparable: return "Incomparable";
    case IdealRelation::Undecided: return "Undecided";
  }
  return "Undecided";
}

void MembershipQuery::validate() const {
  if (!(c > 0.0)) throw InputError("membership exponent c must be > 0");
  if (f.dim() != domain.dim()) throw InputError("f and the domain have different dimensions");
  if (locus.coeffs.size() != static_cast<std::size_t>(domain.dim())) {
    throw InputError("locus arity does not match the domain dimension");
  }
  if (std::all_of(locus.coeffs.begin(), locus.coeffs.end(), [](Complex v) { return v == 0.0; })) {
    throw InputError("locus must have a nonzero coefficient");
  }
}

MembershipResult classify_membership(const MembershipQuery& q, const ShellParams& params) {
  q.validate();
  MembershipResult out;
  if (q.f.is_zero()) {
    out.verdict = Membership::In;
    out.fitted_exponent = std::numeric_limits<double>::infinity();
    out.shells.assign(static_cast<std::size_t>(params.k_max) + 1, 0.0);
    return out;
  }
  auto integrand = [&](const Point& z) {
    const double a = std::norm(q.f(z));
    if (a == 0.0) return 0.0;
    return std::exp(std::log(a) - 2.0 * q.c * q.weight(z));
  };
  const IntegralOutcome r = integrate_shells(q.domain, integrand, q.locus, params);
  out.verdict = from_verdict(r.verdict);
  out.fitted_exponent = r.fitted_exponent;
  out.shells = r.shells;
  return out;
}

MembershipResult classify_membership_auto(const HoloPoly& f, double c, const WeightExpr& weight,
                                          const Domain& domain, const ShellParams& params) {
  const auto loci = weight.loci();
  if (loci.empty()) {
    // No log atom: the weight is bounded and the integrand is bounded.
    if (!(c > 0.0)) throw InputError("membership exponent c must be > 0");
    return {Membership::In, std::numeric_limits<double>::infinity(), {}};
  }
  MembershipResult worst;
  bool first = true;
  for (const auto& l : loci) {
    const MembershipResult r = classify_membership({f, c, weight, domain, l}, params);
    const auto rank = [](Membership m) { return m == Membership::Out ? 2 : m == Membership::Undecided ? 1 : 0; };
    if (first || rank(r.verdict) > rank(worst.verdict)) worst = r;
    first = false;
  }
  return worst;
}

bool RemarkReport::all_match() const {
  return std::all_of(items.begin(), items.end(), [](const RemarkItem& i) { return i.matches(); });
}

bool RemarkReport::any_undecided() const {
  return std::any_of(items.begin(), items.end(),
                     [](const RemarkItem& i) { return i.result.verdict == Membership::Undecided; });
}

RemarkReport remark_suite(double epsilon, int j, const ShellParams& params) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (j < 1) throw InputError("j must be >= 1");
  const Domain domain(DomainKind::Polydisc, {1.0, 1.0});
  const double a = 4.0 - epsilon;
  const double inv_j = 1.0 / j;
  const LinearForm l_axis{{1.0, 0.0}};
  const LinearForm l_tilt{{1.0, inv_j}};
  const WeightExpr phi = WeightExpr::log_abs(l_axis.coeffs, a);
  const WeightExpr phi_j = WeightExpr::log_abs(l_tilt.coeffs, a);
  const HoloPoly z1 = HoloPoly::monomial(2, {{1, 0}});
  const HoloPoly z2 = HoloPoly::monomial(2, {{0, 1}});
  const HoloPoly g = z1 + HoloPoly::monomial(2, {{0, 1}}, inv_j);

  RemarkReport rep;
  rep.epsilon = epsilon;
  rep.j = j;
  rep.items = {
      {"a", z1, phi, l_axis, Membership::In, {}},
      {"b", z1, phi_j, l_tilt, Membership::Out, {}},
      {"c", g, phi_j, l_tilt, Membership::In, {}},
      {"d", z2, phi, l_axis, Membership::Out, {}},
  };
  for (auto& item : rep.items) item.result = classify_membership({item.f, 0.5, item.weight, domain, item.locus}, params);
  return rep;
}

IdealComparison compare_ideals(const std::vector<HoloPoly>& generators_a, const WeightExpr& weight_a,
                               const std::vector<HoloPoly>& generators_b, const WeightExpr& weight_b,
                               double c, const Domain& domain, const ShellParams& params) {
  IdealComparison out;
  out.generators = generators_a;
  out.generators.insert(out.generators.end(), generators_b.begin(), generators_b.end());
  bool a_in_b_open = false;  // some generator leaves A-in-B undecided
  bool b_in_a_open = false;
  for (const auto& f : out.generators) {
    const Membership ma = classify_membership_auto(f, c, weight_a, domain, params).verdict;
    const Membership mb = classify_membership_auto(f, c, weight_b, domain, params).verdict;
    out.under_a.push_back(ma);
    out.under_b.push_back(mb);
    if (ma == Membership::In && mb == Membership::Out) out.a_not_subset_b = true;
    if (mb == Membership::In && ma == Membership::Out) out.b_not_subset_a = true;
    const bool undecided = ma == Membership::Undecided || mb == Membership::Undecided;
    if (undecided && ma != Membership::Out) a_in_b_open = true;
    if (undecided && mb != Membership::Out) b_in_a_open = true;
  }
  if (out.a_not_subset_b && out.b_not_subset_a) {
    out.conclusion = IdealRelation::Incomparable;
  } else if (out.a_not_subset_b) {
    out.conclusion = IdealRelation::AnotSubsetB;
  } else if (out.b_not_subset_a) {
    out.conclusion = IdealRelation::BnotSubsetA;
  } else if (!a_in_b_open && !b_in_a_open) {
    out.conclusion = IdealRelation::Equal;
  }
  return out;
}

nlohmann::json to_json(const MembershipResult& r) {
  return {{"verdict", to_string(r.verdict)}, {"fitted_exponent", r.fitted_exponent}, {"shells", r.shells}};
}

nlohmann::json to_json(const RemarkReport& r) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : r.items) {
    nlohmann::json j = to_json(item.result);
    j["item"] = item.label;
    j["f"] = poly_to_json(item.f);
    j["c"] = 0.5;
    j["weight"] = weight_to_json(item.weight);
    j["locus"] = locus_json(item.locus);
    j["expected"] = to_string(item.expected);
    j["matches"] = item.matches();
    items.push_back(std::move(j));
  }
  return {{"epsilon", r.epsilon},
          {"j", r.j},
          {"domain", "polydisc(1,1)"},
          {"items", items},
          {"all_match", r.all_match()}};
}

nlohmann::json to_json(const IdealComparison& r) {
  nlohmann::json gens = nlohmann::json::array();
  for (std::size_t i = 0; i < r.generators.size(); ++i) {
    gens.push_back({{"f", poly_to_json(r.generators[i])},
                    {"under_a", to_string(r.under_a[i])},
                    {"under_b", to_string(r.under_b[i])}});
  }
  return {{"generators", gens},
          {"a_not_subset_b", r.a_not_subset_b},
          {"b_not_subset_a", r.b_not_subset_a},
          {"conclusion", to_string(r.conclusion)},
          {"scope", "certified on the tested generators only"}};
}

std::string remark_csv_header() { return "epsilon,j,item,expected,verdict,fitted_exponent"; }

std::vector<std::string> remark_csv_rows(const RemarkReport& r) {
  std::vector<std::string> rows;
  for (const auto& item : r.items) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%d,%s,%s,%s,%.17g", r.epsilon, r.j, item.label.c_str(),
                  to_string(item.expected).c_str(), to_string(item.result.verdict).c_str(),
                  item.result.fitted_exponent);
    rows.emplace_back(buf);
  }
  return rows;
}

}  // namespace pshlab
