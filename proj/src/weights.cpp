#include "pshlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pshlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::shared_ptr<const WeightNode> make_node(WeightNode n) {
  return std::make_shared<const WeightNode>(std::move(n));
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
}

// Grid of points for one complex coordinate: radii i*R/n (i=0..n), n angles.
std::vector<Complex> coordinate_grid(double radius, int n) {
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(n + 1) * n);
  for (int i = 0; i <= n; ++i) {
    const double r = radius * i / n;
    for (int k = 0; k < n; ++k) pts.push_back(std::polar(r, 2.0 * std::numbers::pi * k / n));
  }
  return pts;
}

}  // namespace

WeightExpr::WeightExpr() : node_(make_node({ConstWeight{0.0}})) {}

WeightExpr WeightExpr::log_abs(std::vector<Complex> coeffs, double scale) {
  if (coeffs.empty() || coeffs.size() > 2) throw InputError("logabs needs 1 or 2 coefficients");
  if (std::all_of(coeffs.begin(), coeffs.end(), [](Complex c) { return c == Complex(0.0); })) {
    throw InputError("logabs coefficients must not all be zero");
  }
  if (!(scale >= 0.0)) throw InputError("logabs scale must be >= 0");
  require_finite(scale, "logabs scale");
  return WeightExpr(make_node({LogAbsLinear{std::move(coeffs), scale}}));
}

WeightExpr WeightExpr::square_norm(double scale) {
  if (!(scale >= 0.0)) throw InputError("sqnorm scale must be >= 0");
  require_finite(scale, "sqnorm scale");
  return WeightExpr(make_node({SquareNorm{scale}}));
}

WeightExpr WeightExpr::constant(double value) {
  require_finite(value, "const value");
  return WeightExpr(make_node({ConstWeight{value}}));
}

WeightExpr WeightExpr::sum(std::vector<std::pair<double, WeightExpr>> terms) {
  if (terms.empty()) throw InputError("sum needs at least one term");
  for (const auto& [c, w] : terms) {
    if (!(c >= 0.0)) throw InputError("sum coefficients must be >= 0");
    require_finite(c, "sum coefficient");
  }
  return WeightExpr(make_node({SumWeight{std::move(terms)}}));
}

WeightExpr WeightExpr::max(WeightExpr left, WeightExpr right) {
  return WeightExpr(make_node({MaxWeight{std::move(left), std::move(right)}}));
}

WeightExpr WeightExpr::truncate_below(WeightExpr child, double floor) {
  require_finite(floor, "trunc floor");
  return WeightExpr(make_node({TruncatedWeight{std::move(child), floor}}));
}

WeightExpr WeightExpr::shift(WeightExpr child, double offset) {
  require_finite(offset, "shift offset");
  return WeightExpr(make_node({ShiftedWeight{std::move(child), offset}}));
}

double WeightExpr::operator()(const Point& z) const {
  return std::visit(
      overloaded{
          [&](const LogAbsLinear& a) {
            if (a.scale == 0.0) return 0.0;
            Complex l = 0.0;
            for (std::size_t j = 0; j < a.coeffs.size(); ++j) l += a.coeffs[j] * z[j];
            const double m = std::abs(l);
            return m == 0.0 ? kNegInf : a.scale * std::log(m);
          },
          [&](const SquareNorm& a) { return a.scale * (std::norm(z[0]) + std::norm(z[1])); },
          [&](const ConstWeight& a) { return a.value; },
          [&](const SumWeight& a) {
            double s = 0.0;
            for (const auto& [c, w] : a.terms) {
              if (c == 0.0) continue;
              s += c * w(z);
            }
            return s;
          },
          [&](const MaxWeight& a) { return std::max(a.left(z), a.right(z)); },
          [&](const TruncatedWeight& a) { return std::max(a.child(z), a.floor); },
          [&](const ShiftedWeight& a) { return a.child(z) + a.offset; },
      },
      node_->v);
}

std::vector<LinearForm> WeightExpr::loci() const {
  std::vector<LinearForm> out;
  auto add = [&](const LinearForm& l) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  };
  auto walk = [&](auto&& self, const WeightExpr& w) -> void {
    std::visit(overloaded{
                   [&](const LogAbsLinear& a) {
                     if (a.scale > 0.0) add(LinearForm{a.coeffs});
                   },
                   [&](const SquareNorm&) {},
                   [&](const ConstWeight&) {},
                   [&](const SumWeight& a) {
                     for (const auto& [c, child] : a.terms) {
                       if (c > 0.0) self(self, child);
                     }
                   },
                   [&](const MaxWeight& a) {
                     self(self, a.left);
                     self(self, a.right);
                   },
                   [&](const TruncatedWeight& a) { self(self, a.child); },
                   [&](const ShiftedWeight& a) { self(self, a.child); },
               },
               w.node().v);
  };
  walk(walk, *this);
  return out;
}

bool WeightExpr::bounded_below() const {
  return std::visit(overloaded{
                        [](const LogAbsLinear& a) { return a.scale == 0.0; },
                        [](const SquareNorm&) { return true; },
                        [](const ConstWeight&) { return true; },
                        [](const SumWeight& a) {
                          return std::all_of(a.terms.begin(), a.terms.end(), [](const auto& t) {
                            return t.first == 0.0 || t.second.bounded_below();
                          });
                        },
                        [](const MaxWeight& a) { return a.left.bounded_below() || a.right.bounded_below(); },
                        [](const TruncatedWeight&) { return true; },
                        [](const ShiftedWeight& a) { return a.child.bounded_below(); },
                    },
                    node_->v);
}

int WeightExpr::arity() const {
  int n = 0;
  for (const auto& l : loci()) n = std::max(n, static_cast<int>(l.coeffs.size()));
  return n;
}

double sampled_sup(const WeightExpr& w, const Domain& domain, int sample_n) {
  if (sample_n < 2) throw InputError("sample_n must be >= 2");
  double sup = kNegInf;
  auto visit = [&](const Point& z) {
    const double v = w(z);
    if (v > sup) sup = v;
  };
  const auto g0 = coordinate_grid(domain.coordinate_radius(0), sample_n);
  if (domain.dim() == 1) {
    for (const auto& z1 : g0) visit({z1, Complex(0.0)});
    return sup;
  }
  if (domain.kind() == DomainKind::Polydisc) {
    const auto g1 = coordinate_grid(domain.coordinate_radius(1), sample_n);
    for (const auto& z1 : g0) {
      for (const auto& z2 : g1) visit({z1, z2});
    }
    return sup;
  }
  const double R = domain.radii()[0];
  for (const auto& z1 : g0) {
    const auto g1 = coordinate_grid(std::sqrt(std::max(0.0, R * R - std::norm(z1))), sample_n);
    for (const auto& z2 : g1) visit({z1, z2});
  }
  return sup;
}

WeightExpr enforce_negative(const WeightExpr& w, const Domain& domain, int sample_n, double margin) {
  if (!(margin >= 0.0)) throw InputError("margin must be >= 0");
  const double sup = sampled_sup(w, domain, sample_n);
  if (sup == std::numeric_limits<double>::infinity() || std::isnan(sup)) {
    throw NumericalError("weight has unbounded or undefined sampled supremum");
  }
  if (sup <= -margin) return WeightExpr(w.node_, true);
  const WeightExpr shifted = WeightExpr::shift(w, -(sup + margin));
  return WeightExpr(shifted.node_, true);
}

WeightExpr truncate(const WeightExpr& w, double j) {
  if (!(j > 0.0)) throw InputError("truncation level j must be > 0");
  const WeightExpr t = WeightExpr::max(w, WeightExpr::constant(-j));
  return WeightExpr(t.node_, w.negative());
}

double l1_distance(const WeightExpr& phi, const WeightExpr& psi, const QuadratureRule& rule) {
  auto diff = [&](const Point& z) {
    const double a = phi(z);
    const double b = psi(z);
    if (a == b) return 0.0;
    return std::abs(a - b);
  };
  std::vector<LinearForm> loci = phi.loci();
  for (const auto& l : psi.loci()) {
    if (std::find(loci.begin(), loci.end(), l) == loci.end()) loci.push_back(l);
  }
  const ShellParams coarse{8, 8, 16};
  for (const auto& l : loci) {
    if (l.coeffs.size() != static_cast<std::size_t>(rule.domain().dim())) {
      throw InputError("weight locus arity does not match the domain dimension");
    }
    const auto outcome = integrate_shells(rule.domain(), diff, l, coarse);
    if (outcome.verdict == Verdict::Divergent) {
      throw DivergenceError("|phi - psi| is not integrable near a log locus", outcome.fitted_exponent);
    }
  }
  return integrate(rule, diff);
}

void CutoffSpec::validate() const {
  if (!(epsilon > 0.0)) throw InputError("cutoff epsilon must be > 0");
  if (!(smoothing >= 0.0)) throw InputError("cutoff smoothing must be >= 0");
  if (smoothing > 0.0 && !(smoothing < epsilon)) throw InputError("cutoff smoothing must be < epsilon");
}

double cutoff_value(double phi_value, double psi_value, double epsilon, double smoothing) {
  if (phi_value == kNegInf) return 1.0;
  if (psi_value == kNegInf) return 0.0;
  const double gap = psi_value + epsilon - phi_value;
  if (smoothing == 0.0) return gap >= 0.0 ? 1.0 : 0.0;
  return std::clamp(gap / smoothing, 0.0, 1.0);
}

std::vector<double> radial_cutoff_breaks(const CutoffSpec& spec, const Domain& domain) {
  std::vector<double> out;
  if (domain.kind() != DomainKind::Disc) return out;
  const double R = domain.radii()[0];
  auto gap = [&](double r) {
    const Point z{Complex(r, 0.0), Complex(0.0)};
    return spec.phi(z) - spec.psi(z);
  };
  std::vector<double> grid;
  for (int k = 60; k >= 13; --k) grid.push_back(std::ldexp(R, -k));
  constexpr int kSteps = 4096;
  for (int i = 1; i < kSteps; ++i) grid.push_back(R * i / kSteps);
  std::vector<double> levels{spec.epsilon};
  if (spec.smoothing > 0.0) levels.push_back(spec.epsilon - spec.smoothing);
  for (double level : levels) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      double lo = grid[i], hi = grid[i + 1];
      const double glo = gap(lo) - level, ghi = gap(hi) - level;
      if (!std::isfinite(glo) || !std::isfinite(ghi) || (glo > 0.0) == (ghi > 0.0)) continue;
      const bool lo_above = glo > 0.0;
      for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((gap(mid) - level > 0.0) == lo_above) lo = mid; else hi = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double cutoff(const CutoffSpec& spec, const Point& z) {
  return cutoff_value(spec.phi(z), spec.psi(z), spec.epsilon, spec.smoothing);
}

double cutoff_derivative_H(const CutoffSpec& spec, Complex f_value, const Point& z) {
  if (!(spec.smoothing > 0.0)) throw InputError("H needs a smoothed cutoff (smoothing > 0)");
  const double psi = spec.psi(z);
  if (!(psi < 0.0)) throw NumericalError("H needs psi(z) < 0 strictly");
  const double phi = spec.phi(z);
  if (phi == kNegInf || psi == kNegInf) return 0.0;
  const double x = (psi + spec.epsilon - phi) / spec.smoothing;
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  // chi(t) = (-e^t + eps - phi)/s, so d chi/dt = -e^t/s = psi/s.
  const double dchi = psi / spec.smoothing;
  return std::norm(f_value) * dchi * dchi;
}

double cutoff_derivative_H(const CutoffSpec& spec, const HoloPoly& f, const Point& z) {
  return cutoff_derivative_H(spec, f(z), z);
}

nlohmann::json weight_to_json(const WeightExpr& w) {
  using nlohmann::json;
  return std::visit(overloaded{
                        [](const LogAbsLinear& a) {
                          json coeffs = json::array();
                          for (Complex c : a.coeffs) coeffs.push_back({c.real(), c.imag()});
                          return json{{"op", "logabs"}, {"coeffs", coeffs}, {"scale", a.scale}};
                        },
                        [](const SquareNorm& a) { return json{{"op", "sqnorm"}, {"scale", a.scale}}; },
                        [](const ConstWeight& a) { return json{{"op", "const"}, {"value", a.value}}; },
                        [](const SumWeight& a) {
                          json terms = json::array();
                          for (const auto& [c, child] : a.terms) {
                            terms.push_back({{"coeff", c}, {"expr", weight_to_json(child)}});
                          }
                          return json{{"op", "sum"}, {"terms", terms}};
                        },
                        [](const MaxWeight& a) {
                          return json{{"op", "max"}, {"left", weight_to_json(a.left)}, {"right", weight_to_json(a.right)}};
                        },
                        [](const TruncatedWeight& a) {
                          return json{{"op", "trunc"}, {"child", weight_to_json(a.child)}, {"floor", a.floor}};
                        },
                        [](const ShiftedWeight& a) {
                          return json{{"op", "shift"}, {"child", weight_to_json(a.child)}, {"offset", a.offset}};
                        },
                    },
                    w.node().v);
}

namespace {

void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
      throw InputError("unknown key '" + key + "' in " + where);
    }
  }
  for (const char* k : allowed) {
    if (!j.contains(k)) throw InputError("missing key '" + std::string(k) + "' in " + where);
  }
}

double number(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw InputError("'" + std::string(key) + "' in " + where + " must be a number");
  return v.get<double>();
}

WeightExpr parse_weight(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("op") || !j.at("op").is_string()) {
    throw InputError(where + ": weight must be an object with a string 'op'");
  }
  const std::string op = j.at("op").get<std::string>();
  const std::string here = where + "(" + op + ")";
  if (op == "logabs") {
    expect_keys(j, {"op", "coeffs", "scale"}, here);
    std::vector<Complex> coeffs;
    const auto& cs = j.at("coeffs");
    if (!cs.is_array()) throw InputError(here + ": coeffs must be an array of [re, im]");
    for (const auto& c : cs) {
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
        throw InputError(here + ": each coefficient must be [re, im]");
      }
      coeffs.emplace_back(c[0].get<double>(), c[1].get<double>());
    }
    return WeightExpr::log_abs(std::move(coeffs), number(j, "scale", here));
  }
  if (op == "sqnorm") {
    expect_keys(j, {"op", "scale"}, here);
    return WeightExpr::square_norm(number(j, "scale", here));
  }
  if (op == "const") {
    expect_keys(j, {"op", "value"}, here);
    return WeightExpr::constant(number(j, "value", here));
  }
  if (op == "sum") {
    expect_keys(j, {"op", "terms"}, here);
    std::vector<std::pair<double, WeightExpr>> terms;
    const auto& ts = j.at("terms");
    if (!ts.is_array()) throw InputError(here + ": terms must be an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string item = here + ".terms[" + std::to_string(i) + "]";
      expect_keys(ts[i], {"coeff", "expr"}, item);
      terms.emplace_back(number(ts[i], "coeff", item), parse_weight(ts[i].at("expr"), item + ".expr"));
    }
    return WeightExpr::sum(std::move(terms));
  }
  if (op == "max") {
    expect_keys(j, {"op", "left", "right"}, here);
    return WeightExpr::max(parse_weight(j.at("left"), here + ".left"), parse_weight(j.at("right"), here + ".right"));
  }
  if (op == "trunc") {
    expect_keys(j, {"op", "child", "floor"}, here);
    return WeightExpr::truncate_below(parse_weight(j.at("child"), here + ".child"), number(j, "floor", here));
  }
  if (op == "shift") {
    expect_keys(j, {"op", "child", "offset"}, here);
    return WeightExpr::shift(parse_weight(j.at("child"), here + ".child"), number(j, "offset", here));
  }
  throw InputError(where + ": unknown weight op '" + op + "'");
}

}  // namespace

WeightExpr weight_from_json(const nlohmann::json& j) { return parse_weight(j, "weight"); }

std::string describe(const WeightExpr& w) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const LogAbsLinear& a) {
                   os << a.scale << "*ln|";
                   for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
                     if (k) os << " + ";
                     os << "(" << a.coeffs[k].real() << (a.coeffs[k].imag() < 0 ? "" : "+") << a.coeffs[k].imag()
                        << "i)z" << k + 1;
                   }
                   os << "|";
                 },
                 [&](const SquareNorm& a) { os << a.scale << "*|z|^2"; },
                 [&](const ConstWeight& a) { os << a.value; },
                 [&](const SumWeight& a) {
                   os << "(";
                   for (std::size_t k = 0; k < a.terms.size(); ++k) {
                     if (k) os << " + ";
                     os << a.terms[k].first << "*" << describe(a.terms[k].second);
                   }
                   os << ")";
                 },
                 [&](const MaxWeight& a) { os << "max(" << describe(a.left) << ", " << describe(a.right) << ")"; },
                 [&](const TruncatedWeight& a) { os << "max(" << describe(a.child) << ", " << a.floor << ")"; },
                 [&](const ShiftedWeight& a) { os << "(" << describe(a.child) << " + " << a.offset << ")"; },
             },
             w.node().v);
  return os.str();
}

}  // namespace pshlab
