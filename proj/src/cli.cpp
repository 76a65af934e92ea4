#include "pshlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pshlab/bergman.hpp"
#include "pshlab/errors.hpp"
#include "pshlab/ideals.hpp"
#include "pshlab/theorem.hpp"

namespace pshlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can
// be rejected with their location.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw InputError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw InputError(path(key) + ": expected a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw InputError(path(key) + ": expected an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw InputError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) throw InputError(path(key) + ": expected an array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw InputError(path(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw InputError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

template <class F>
auto located(const std::string& where, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

int to_int(long long v, const std::string& where) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw InputError(where + ": integer out of range");
  }
  return static_cast<int>(v);
}

std::vector<HoloPoly> parse_polys(ObjectReader& r, const std::string& key, int dim) {
  std::vector<HoloPoly> out;
  if (!r.has(key)) return out;
  const json& v = r.raw(key);
  if (!v.is_array()) throw InputError(r.path(key) + ": expected an array of polynomials");
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(located(r.path(key) + "[" + std::to_string(i) + "]", [&] { return poly_from_json(v[i], dim); }));
  }
  return out;
}

std::optional<WeightExpr> parse_weight(ObjectReader& r, const std::string& key) {
  if (!r.has(key)) return std::nullopt;
  const json& v = r.raw(key);
  return located(r.path(key), [&] { return weight_from_json(v); });
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw ResourceError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

TheoremConfig theorem_config(const ExperimentConfig& c) {
  TheoremConfig t;
  t.domain = c.domain();
  t.quad = c.quad;
  t.phi = enforce_negative(*c.phi, t.domain);
  if (c.psi) t.psi = enforce_negative(*c.psi, t.domain);
  t.f = *c.f;
  t.degree = c.degree;
  t.smoothing = c.smoothing;
  t.smooth_slack = c.smooth_slack;
  t.indicator_slack = c.indicator_slack;
  return t;
}

// Fills epsilon (explicit or epsilon_factor * l1) and the smoothing width.
void resolve_epsilon(TheoremConfig& t, const ExperimentConfig& c, const QuadratureRule& rule) {
  t.epsilon = c.epsilon ? *c.epsilon : c.epsilon_factor * l1_distance(t.phi, t.psi, rule);
  if (c.smoothing_fraction) t.smoothing = *c.smoothing_fraction * t.epsilon;
}

json weights_json(const TheoremConfig& t) {
  return {{"phi", describe(t.phi)}, {"psi", describe(t.psi)}, {"epsilon", t.epsilon}, {"smoothing", t.smoothing}};
}

double exact_moment(const Domain& d, int k, int l) {
  const double pi = std::numbers::pi;
  if (d.kind() == DomainKind::Disc) return pi * std::pow(d.radii()[0], 2 * k + 2) / (k + 1);
  if (d.kind() == DomainKind::Polydisc) {
    return pi * std::pow(d.radii()[0], 2 * k + 2) / (k + 1) * pi * std::pow(d.radii()[1], 2 * l + 2) / (l + 1);
  }
  // Unit-ball moment pi^2 k! l! / (k + l + 2)!, scaled by R^(2(k+l+2)).
  return pi * pi * std::exp(std::lgamma(k + 1.0) + std::lgamma(l + 1.0) - std::lgamma(k + l + 3.0)) *
         std::pow(d.radii()[0], 2 * (k + l + 2));
}

CommandOutput run_quad_check(const ExperimentConfig& c) {
  const Domain d = c.domain();
  const QuadratureRule rule = build_quadrature(d, c.quad);
  CommandOutput out;
  out.nodes = rule.size();
  std::string csv = "k,l,exact,computed,rel_err\n";
  json rows = json::array();
  double worst = 0.0;
  for (int k = 0; k <= c.max_moment; ++k) {
    for (int l = 0; l + k <= c.max_moment; ++l) {
      if (d.dim() == 1 && l > 0) break;
      const double exact = exact_moment(d, k, l);
      const double computed = integrate(rule, [&](const Point& z) {
        return std::pow(std::norm(z[0]), k) * (d.dim() == 2 ? std::pow(std::norm(z[1]), l) : 1.0);
      });
      const double rel = std::abs(computed - exact) / exact;
      worst = std::max(worst, rel);
      csv += std::to_string(k) + "," + std::to_string(l) + "," + fmt(exact) + "," + fmt(computed) + "," + fmt(rel) + "\n";
      rows.push_back({{"k", k}, {"l", l}, {"exact", exact}, {"computed", computed}, {"rel_err", rel}});
    }
  }
  out.passed = worst <= c.moment_tolerance;
  out.report = {{"moments", rows}, {"max_rel_err", worst}, {"tolerance", c.moment_tolerance},
                {"pass", out.passed}, {"nodes", rule.size()}};
  out.csv_files.emplace_back("moments.csv", csv);
  return out;
}

CommandOutput run_theorem(const ExperimentConfig& c) {
  CommandOutput out;
  std::string csv = theorem_csv_header() + "\n";
  if (c.suite_count > 0) {
    const auto suite = random_bound_suite(c.suite_count, c.seed, c.quad, c.degree);
    json cases = json::array();
    for (const auto& sc : suite) {
      cases.push_back(to_json(sc));
      csv += theorem_csv_row(sc.report) + "\n";
      out.passed = out.passed && sc.report.all_pass() && sc.report.hypothesis_ok;
      out.nodes = sc.report.nodes;
    }
    out.report = {{"suite", {{"count", c.suite_count}, {"seed", c.seed}}}, {"cases", cases}, {"all_pass", out.passed}};
  } else {
    TheoremConfig t = theorem_config(c);
    if (!t.phi.bounded_below() || !t.psi.bounded_below()) {
      throw InputError("theorem: phi and psi must be bounded below (use trunc or max with a constant)");
    }
    const QuadratureRule rule = theorem_rule(t);
    resolve_epsilon(t, c, rule);
    const TheoremReport rep = run_construction(t, rule);
    out.passed = rep.all_pass() && rep.hypothesis_ok;
    out.nodes = rep.nodes;
    out.report = to_json(rep);
    out.report["weights"] = weights_json(t);
    csv += theorem_csv_row(rep) + "\n";
  }
  out.csv_files.emplace_back("theorem.csv", csv);
  return out;
}

CommandOutput run_truncation_cmd(const ExperimentConfig& c) {
  TheoremConfig t = theorem_config(c);
  const QuadratureRule rule = theorem_rule(t);
  resolve_epsilon(t, c, rule);
  const TruncationReport rep = run_truncation(t, c.j_list, 1000, c.seed);
  CommandOutput out;
  out.nodes = rule.size();
  out.passed = rep.bounds_pass() && rep.monotone_weights && rep.cauchy_strictly_decreasing();
  out.report = to_json(rep);
  out.report["weights"] = weights_json(t);
  std::string csv = "j,l1_j,l1_contracts,norm_g_sq,bound_eM,bound_ok,coeff_cauchy\n";
  for (const auto& r : rep.rows) {
    csv += fmt(r.j) + "," + fmt(r.l1_j) + "," + (r.l1_contracts ? "1" : "0") + "," + fmt(r.norm_g_sq) + "," +
           fmt(r.bound_eM) + "," + (r.bound_ok ? "1" : "0") + "," + fmt(r.coeff_cauchy) + "\n";
  }
  out.csv_files.emplace_back("truncation.csv", csv);
  return out;
}

CommandOutput run_sweep_cmd(const ExperimentConfig& c) {
  SweepConfig s;
  s.base = theorem_config(c);
  s.base.psi = s.base.phi;
  s.base.epsilon = 1.0;  // replaced per row
  s.direction = *c.direction;
  s.etas = c.eta_list;
  s.epsilon_factor = c.epsilon_factor;
  const SweepReport rep = sweep_epsilon(s);
  CommandOutput out;
  out.passed = rep.nonincreasing && rep.C_bounds_ok && rep.final_within_floor;
  out.report = to_json(rep);
  std::string csv = "eta,epsilon,l1,delta,bound_C,ratio,C_bound_ok\n";
  for (const auto& r : rep.rows) {
    csv += fmt(r.eta) + "," + fmt(r.epsilon) + "," + fmt(r.l1) + "," + fmt(r.delta) + "," + fmt(r.bound_C) + "," +
           fmt(r.ratio) + "," + (r.C_bound_ok ? "1" : "0") + "\n";
  }
  out.csv_files.emplace_back("sweep.csv", csv);
  return out;
}

CommandOutput run_blocki_cmd(const ExperimentConfig& c) {
  TheoremConfig t = theorem_config(c);
  const QuadratureRule rule = theorem_rule(t);
  resolve_epsilon(t, c, rule);
  const BlockiResult r = blocki_check(t);
  CommandOutput out;
  out.nodes = rule.size();
  out.passed = r.pass;
  out.report = to_json(r);
  out.report["weights"] = weights_json(t);
  out.csv_files.emplace_back("blocki.csv", "lhs,rhs,ratio,pass\n" + fmt(r.lhs) + "," + fmt(r.rhs) + "," +
                                               fmt(r.ratio) + "," + (r.pass ? "1" : "0") + "\n");
  return out;
}

CommandOutput run_remark_cmd(const ExperimentConfig& c) {
  const std::vector<RemarkCase> cases = c.remark_cases.empty() ? std::vector<RemarkCase>{{}} : c.remark_cases;
  CommandOutput out;
  json reports = json::array();
  std::string csv = remark_csv_header() + "\n";
  for (const auto& rc : cases) {
    const RemarkReport rep = remark_suite(rc.epsilon, rc.j, c.shells);
    out.passed = out.passed && rep.all_match();
    reports.push_back(to_json(rep));
    for (const auto& row : remark_csv_rows(rep)) csv += row + "\n";
  }
  out.report = {{"cases", reports}, {"all_match", out.passed}};
  out.csv_files.emplace_back("remark.csv", csv);
  return out;
}

CommandOutput run_ideal_cmd(const ExperimentConfig& c) {
  const IdealComparison cmp = compare_ideals(c.generators_a, *c.weight_a, c.generators_b, *c.weight_b, c.c,
                                             c.domain(), c.shells);
  CommandOutput out;
  out.report = to_json(cmp);
  std::string csv = "generator,under_a,under_b\n";
  for (std::size_t i = 0; i < cmp.generators.size(); ++i) {
    csv += std::to_string(i) + "," + to_string(cmp.under_a[i]) + "," + to_string(cmp.under_b[i]) + "\n";
  }
  csv += "conclusion," + to_string(cmp.conclusion) + ",\n";
  out.csv_files.emplace_back("ideal.csv", csv);
  return out;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::QuadCheck: return "quad-check";
    case Command::Theorem: return "theorem";
    case Command::Truncation: return "truncation";
    case Command::Sweep: return "sweep";
    case Command::Blocki: return "blocki";
    case Command::Remark: return "remark";
    case Command::Ideal: return "ideal";
  }
  return "theorem";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::QuadCheck, Command::Theorem, Command::Truncation, Command::Sweep, Command::Blocki,
                    Command::Remark, Command::Ideal}) {
    if (to_string(c) == name) return c;
  }
  throw InputError("unknown command '" + name + "'");
}

void ExperimentConfig::validate() const {
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw InputError(to_string(command) + ": " + what);
  };
  const Domain d = domain();
  require(quad.radial_n > 0 && quad.angular_n > 0 && quad.radial_panels > 0 && quad.levels >= 0,
          "quadrature sizes must be positive");
  require(shells.k_max >= 3, "shells.k_max must be >= 3");
  require(epsilon_factor > 0.0, "epsilon_factor must be > 0");
  require(!epsilon || *epsilon > 0.0, "epsilon must be > 0");
  require(degree >= 0, "degree must be >= 0");
  require(smoothing >= 0.0, "smoothing must be >= 0");
  require(!smoothing_fraction || (*smoothing_fraction > 0.0 && *smoothing_fraction < 1.0),
          "smoothing_fraction must lie in (0, 1)");
  if (f) require(f->dim() == d.dim(), "f dimension does not match the domain");
  auto needs_weights = [&] {
    require(phi.has_value(), "missing field 'phi'");
    require(f.has_value(), "missing field 'f'");
  };
  switch (command) {
    case Command::QuadCheck:
      require(max_moment >= 0, "max_moment must be >= 0");
      require(moment_tolerance > 0.0, "moment_tolerance must be > 0");
      break;
    case Command::Theorem:
      require(suite_count >= 0, "suite_count must be >= 0");
      if (suite_count == 0) {
        needs_weights();
        require(psi.has_value(), "missing field 'psi'");
      }
      break;
    case Command::Truncation:
      needs_weights();
      require(psi.has_value(), "missing field 'psi'");
      require(j_list.size() >= 3, "j_list needs at least 3 entries");
      break;
    case Command::Sweep:
      needs_weights();
      require(direction.has_value(), "missing field 'direction'");
      require(!eta_list.empty(), "eta_list must not be empty");
      break;
    case Command::Blocki:
      needs_weights();
      require(psi.has_value(), "missing field 'psi'");
      require(smoothing > 0.0 || smoothing_fraction.has_value(), "needs smoothing > 0 or smoothing_fraction");
      break;
    case Command::Remark:
      for (const auto& rc : remark_cases) {
        require(rc.epsilon > 0.0 && rc.epsilon < 1.0, "remark epsilon must lie in (0, 1)");
        require(rc.j >= 1, "remark j must be >= 1");
      }
      break;
    case Command::Ideal:
      require(!generators_a.empty() && !generators_b.empty(), "generators_a and generators_b must be non-empty");
      require(weight_a.has_value() && weight_b.has_value(), "missing field 'weight_a' or 'weight_b'");
      require(c > 0.0, "c must be > 0");
      for (const auto& g : generators_a) require(g.dim() == d.dim(), "generator dimension does not match the domain");
      for (const auto& g : generators_b) require(g.dim() == d.dim(), "generator dimension does not match the domain");
      break;
  }
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return serialize_config(*this) == serialize_config(other);
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  ObjectReader r(j, "config");
  if (!r.has("command")) throw InputError("config: missing field 'command'");
  c.command = located(r.path("command"), [&] { return command_from_string(r.string("command", "")); });

  if (r.has("domain")) {
    ObjectReader d(r.raw("domain"), r.path("domain"));
    c.domain_kind = located(d.path("kind"), [&] { return domain_kind_from_string(d.string("kind", "disc")); });
    c.radii = d.numbers("radii");
    if (c.radii.empty()) c.radii = c.domain_kind == DomainKind::Polydisc ? std::vector<double>{1.0, 1.0}
                                                                          : std::vector<double>{1.0};
    d.finish();
  }
  located("config.domain", [&] { return build_domain(c.domain_kind, c.radii); });
  const int dim = c.domain().dim();

  if (r.has("quadrature")) {
    ObjectReader q(r.raw("quadrature"), r.path("quadrature"));
    c.quad.radial_n = to_int(q.integer("radial_n", c.quad.radial_n), q.path("radial_n"));
    c.quad.angular_n = to_int(q.integer("angular_n", c.quad.angular_n), q.path("angular_n"));
    c.quad.radial_panels = to_int(q.integer("radial_panels", c.quad.radial_panels), q.path("radial_panels"));
    c.quad.levels = to_int(q.integer("levels", c.quad.levels), q.path("levels"));
    const long long cap = q.integer("node_cap", static_cast<long long>(c.quad.node_cap));
    if (cap <= 0) throw InputError(q.path("node_cap") + ": must be > 0");
    c.quad.node_cap = static_cast<std::size_t>(cap);
    q.finish();
  }
  if (r.has("shells")) {
    ObjectReader s(r.raw("shells"), r.path("shells"));
    c.shells.k_max = to_int(s.integer("k_max", c.shells.k_max), s.path("k_max"));
    c.shells.radial_n = to_int(s.integer("radial_n", c.shells.radial_n), s.path("radial_n"));
    c.shells.angular_n = to_int(s.integer("angular_n", c.shells.angular_n), s.path("angular_n"));
    s.finish();
  }
  c.phi = parse_weight(r, "phi");
  c.psi = parse_weight(r, "psi");
  c.direction = parse_weight(r, "direction");
  c.weight_a = parse_weight(r, "weight_a");
  c.weight_b = parse_weight(r, "weight_b");
  if (r.has("f")) {
    const json& v = r.raw("f");
    c.f = located(r.path("f"), [&] { return poly_from_json(v, dim); });
  }
  if (r.has("epsilon")) c.epsilon = r.number("epsilon", 0.0);
  c.epsilon_factor = r.number("epsilon_factor", c.epsilon_factor);
  c.degree = to_int(r.integer("degree", c.degree), r.path("degree"));
  c.smoothing = r.number("smoothing", c.smoothing);
  if (r.has("smoothing_fraction")) c.smoothing_fraction = r.number("smoothing_fraction", 0.0);
  c.smooth_slack = r.number("smooth_slack", c.smooth_slack);
  c.indicator_slack = r.number("indicator_slack", c.indicator_slack);
  c.j_list = r.numbers("j_list");
  c.eta_list = r.numbers("eta_list");
  c.suite_count = to_int(r.integer("suite_count", c.suite_count), r.path("suite_count"));
  if (r.has("remark_cases")) {
    const json& v = r.raw("remark_cases");
    if (!v.is_array()) throw InputError(r.path("remark_cases") + ": expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      ObjectReader rc(v[i], r.path("remark_cases") + "[" + std::to_string(i) + "]");
      RemarkCase item;
      item.epsilon = rc.number("epsilon", item.epsilon);
      item.j = to_int(rc.integer("j", item.j), rc.path("j"));
      rc.finish();
      c.remark_cases.push_back(item);
    }
  }
  c.c = r.number("c", c.c);
  c.generators_a = parse_polys(r, "generators_a", dim);
  c.generators_b = parse_polys(r, "generators_b", dim);
  c.max_moment = to_int(r.integer("max_moment", c.max_moment), r.path("max_moment"));
  c.moment_tolerance = r.number("moment_tolerance", c.moment_tolerance);
  c.output_dir = r.string("output_dir", c.output_dir);
  const long long seed = r.integer("seed", c.seed);
  if (seed < 0 || seed > std::numeric_limits<unsigned>::max()) throw InputError(r.path("seed") + ": out of range");
  c.seed = static_cast<unsigned>(seed);
  r.finish();
  c.validate();
  return c;
}

json serialize_config(const ExperimentConfig& c) {
  json j = {
      {"command", to_string(c.command)},
      {"domain", {{"kind", to_string(c.domain_kind)}, {"radii", c.radii}}},
      {"quadrature",
       {{"radial_n", c.quad.radial_n},
        {"angular_n", c.quad.angular_n},
        {"radial_panels", c.quad.radial_panels},
        {"levels", c.quad.levels},
        {"node_cap", c.quad.node_cap}}},
      {"shells", {{"k_max", c.shells.k_max}, {"radial_n", c.shells.radial_n}, {"angular_n", c.shells.angular_n}}},
      {"epsilon_factor", c.epsilon_factor},
      {"degree", c.degree},
      {"smoothing", c.smoothing},
      {"smooth_slack", c.smooth_slack},
      {"indicator_slack", c.indicator_slack},
      {"j_list", c.j_list},
      {"eta_list", c.eta_list},
      {"suite_count", c.suite_count},
      {"c", c.c},
      {"max_moment", c.max_moment},
      {"moment_tolerance", c.moment_tolerance},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
  };
  if (c.phi) j["phi"] = weight_to_json(*c.phi);
  if (c.psi) j["psi"] = weight_to_json(*c.psi);
  if (c.direction) j["direction"] = weight_to_json(*c.direction);
  if (c.weight_a) j["weight_a"] = weight_to_json(*c.weight_a);
  if (c.weight_b) j["weight_b"] = weight_to_json(*c.weight_b);
  if (c.f) j["f"] = poly_to_json(*c.f);
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  if (c.smoothing_fraction) j["smoothing_fraction"] = *c.smoothing_fraction;
  json cases = json::array();
  for (const auto& rc : c.remark_cases) cases.push_back({{"epsilon", rc.epsilon}, {"j", rc.j}});
  j["remark_cases"] = cases;
  json ga = json::array();
  for (const auto& g : c.generators_a) ga.push_back(poly_to_json(g));
  json gb = json::array();
  for (const auto& g : c.generators_b) gb.push_back(poly_to_json(g));
  j["generators_a"] = ga;
  j["generators_b"] = gb;
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw InputError("override key '" + key + "' has an empty segment");
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw InputError("override key '" + key + "': '" + part + "' is not an array index");
      }
      if (idx >= node->size()) throw InputError("override key '" + key + "': index out of range");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw InputError("override key '" + key + "' descends into a scalar");
      next = &(*node)[part];
    }
    node = next;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string bytes = serialize_config(c).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json RunManifest::to_json() const {
  json j = {{"config_hash", config_hash}, {"tool_version", tool_version}, {"command", command},
            {"nodes", nodes},             {"files", files}};
  if (start_time) j["start_time"] = *start_time;
  if (end_time) j["end_time"] = *end_time;
  return j;
}

CommandOutput execute(const ExperimentConfig& config) {
  config.validate();
  CommandOutput out;
  switch (config.command) {
    case Command::QuadCheck: out = run_quad_check(config); break;
    case Command::Theorem: out = run_theorem(config); break;
    case Command::Truncation: out = run_truncation_cmd(config); break;
    case Command::Sweep: out = run_sweep_cmd(config); break;
    case Command::Blocki: out = run_blocki_cmd(config); break;
    case Command::Remark: out = run_remark_cmd(config); break;
    case Command::Ideal: out = run_ideal_cmd(config); break;
  }
  out.report = json{{"report_type", to_string(config.command)},
                    {"tool_version", kToolVersion},
                    {"config_hash", hex(config_hash(config))},
                    {"config", serialize_config(config)},
                    {"pass", out.passed},
                    {"result", std::move(out.report)}};
  return out;
}

int run(const ExperimentConfig& config, const RunOptions& options) {
  const fs::path dir = options.out_dir.empty() ? fs::path(config.output_dir) : options.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create output directory %s: %s\n", dir.string().c_str(), ec.message().c_str());
    return 1;
  }
  // One writer per output directory.
  const fs::path lock = dir / ".lock";
  std::FILE* lock_file = std::fopen(lock.string().c_str(), "wx");
  if (!lock_file) {
    std::fprintf(stderr, "error: output directory %s is in use (remove %s if stale)\n", dir.string().c_str(),
                 lock.string().c_str());
    return 1;
  }
  std::fclose(lock_file);

  RunManifest manifest;
  manifest.config_hash = hex(config_hash(config));
  manifest.command = to_string(config.command);
  if (!options.canonical) manifest.start_time = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  int status = 0;
  json report;
  std::vector<std::pair<std::string, std::string>> csv_files;
  try {
    CommandOutput out = execute(config);
    report = std::move(out.report);
    csv_files = std::move(out.csv_files);
    manifest.nodes = out.nodes;
    status = exit_status(out);
  } catch (const DivergenceError& e) {
    report = {{"report_type", to_string(config.command)},
              {"tool_version", kToolVersion},
              {"config_hash", manifest.config_hash},
              {"error", {{"kind", "divergence"}, {"message", e.what()}, {"fitted_exponent", e.fitted_exponent()}}}};
    std::fprintf(stderr, "error: %s\n", e.what());
    status = 1;
  } catch (const Error& e) {
    const char* kind = dynamic_cast<const InputError*>(&e)      ? "input"
                       : dynamic_cast<const ResourceError*>(&e) ? "resource"
                                                                : "numerical";
    report = {{"report_type", to_string(config.command)},
              {"tool_version", kToolVersion},
              {"config_hash", manifest.config_hash},
              {"error", {{"kind", kind}, {"message", e.what()}}}};
    std::fprintf(stderr, "error: %s\n", e.what());
    status = 1;
  }
  if (!options.canonical) {
    report["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.end_time = utc_now();
  }
  try {
    write_file(dir / "report.json", report.dump(2) + "\n");
    manifest.files.push_back((dir / "report.json").string());
    for (const auto& [name, contents] : csv_files) {
      write_file(dir / name, contents);
      manifest.files.push_back((dir / name).string());
    }
    manifest.files.push_back((dir / "manifest.json").string());
    write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    status = 1;
  }
  fs::remove(lock, ec);
  return status;
}

std::string emit_plotdata(const json& report) {
  if (!report.is_object() || !report.contains("report_type") || !report["report_type"].is_string()) {
    throw InputError("plotdata: report has no report_type");
  }
  const std::string type = report["report_type"];
  std::string x, y;
  if (type == "sweep") {
    x = "epsilon";
    y = "delta";
  } else if (type == "truncation") {
    x = "j";
    y = "coeff_cauchy";
  } else {
    throw InputError("plotdata: unknown report type '" + type + "'");
  }
  std::vector<std::pair<double, double>> pts;
  if (report.contains("result") && report["result"].contains("rows")) {
    for (const auto& row : report["result"]["rows"]) {
      if (!row.contains(x) || !row.contains(y) || !row[x].is_number() || !row[y].is_number()) {
        throw InputError("plotdata: row lacks numeric '" + x + "' or '" + y + "'");
      }
      pts.emplace_back(row[x].get<double>(), row[y].get<double>());
    }
  }
  if (type == "sweep") {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  }
  std::string csv = x + "," + y + "\n";
  for (const auto& [a, b] : pts) csv += fmt(a) + "," + fmt(b) + "\n";
  return csv;
}

}  // namespace pshlab
