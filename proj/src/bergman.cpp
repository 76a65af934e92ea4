#include "pshlab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace pshlab {

namespace {

constexpr std::size_t kChunk = 4096;

// Rows: nodes [begin, end); columns: monomials.
Eigen::MatrixXcd monomial_block(const std::vector<Point>& nodes, std::size_t begin, std::size_t end,
                                const std::vector<MultiIndex>& basis) {
  int max0 = 0;
  int max1 = 0;
  for (const auto& a : basis) {
    max0 = std::max(max0, a.a[0]);
    max1 = std::max(max1, a.a[1]);
  }
  const auto rows = static_cast<Eigen::Index>(end - begin);
  Eigen::MatrixXcd V(rows, static_cast<Eigen::Index>(basis.size()));
  std::vector<Complex> p0(max0 + 1), p1(max1 + 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Point& z = nodes[begin + r];
    p0[0] = 1.0;
    for (int k = 1; k <= max0; ++k) p0[k] = p0[k - 1] * z[0];
    p1[0] = 1.0;
    for (int k = 1; k <= max1; ++k) p1[k] = p1[k - 1] * z[1];
    for (std::size_t c = 0; c < basis.size(); ++c) V(r, c) = p0[basis[c].a[0]] * p1[basis[c].a[1]];
  }
  return V;
}

// y_a = sum_i m_i h_i conj(z_i^a), chunked and merged in chunk order.
Eigen::VectorXcd moment_vector(const WeightedSpace& space, const std::vector<MultiIndex>& basis,
                               std::span<const Complex> h) {
  const auto& nodes = space.rule().nodes();
  const auto& m = space.measure();
  std::vector<Eigen::VectorXcd> partial(chunk_count(nodes.size(), kChunk));
  for_each_chunk(nodes.size(), kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    const Eigen::MatrixXcd V = monomial_block(nodes, begin, end, basis);
    Eigen::VectorXcd mh(static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i) mh(i - begin) = m[i] * h[i];
    partial[c] = V.adjoint() * mh;
  });
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (const auto& p : partial) y += p;
  return y;
}

}  // namespace

WeightedSpace::WeightedSpace(const QuadratureRule& rule, const WeightExpr& psi) : rule_(&rule) {
  const ShellParams coarse{8, 8, 16};
  auto density = [&](const Point& z) { return std::exp(-psi(z)); };
  for (const auto& l : psi.loci()) {
    if (l.coeffs.size() != static_cast<std::size_t>(rule.domain().dim())) continue;
    const auto outcome = integrate_shells(rule.domain(), density, l, coarse);
    if (outcome.verdict == Verdict::Divergent) {
      throw DivergenceError("e^{-psi} is not integrable near a log locus of psi", outcome.fitted_exponent);
    }
  }
  const auto& nodes = rule.nodes();
  measure_.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = density(nodes[i]);
    if (!std::isfinite(d)) {
      throw NumericalError("e^{-psi} overflows at node " + std::to_string(i) +
                           " (|z1|=" + std::to_string(std::abs(nodes[i][0])) +
                           ", |z2|=" + std::to_string(std::abs(nodes[i][1])) + "); truncate the weight");
    }
    measure_[i] = rule.weights()[i] * d;
  }
}

WeightedSpace WeightedSpace::from_density(const QuadratureRule& rule, std::span<const double> density) {
  if (density.size() != rule.size()) throw InputError("density size does not match the rule");
  std::vector<double> m(rule.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(density[i]) || density[i] < 0.0) {
      throw NumericalError("density is negative or non-finite at node " + std::to_string(i));
    }
    m[i] = rule.weights()[i] * density[i];
  }
  return WeightedSpace(rule, std::move(m));
}

NodeValues sample_poly(const QuadratureRule& rule, const HoloPoly& p) {
  return sample<Complex>(rule, [&](const Point& z) { return p(z); });
}

Complex weighted_inner(const WeightedSpace& space, std::span<const Complex> u, std::span<const Complex> v) {
  const auto& m = space.measure();
  if (u.size() != m.size() || v.size() != m.size()) throw InputError("node value count does not match the space");
  CompensatedSum re, im;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Complex t = m[i] * u[i] * std::conj(v[i]);
    re.add(t.real());
    im.add(t.imag());
  }
  const Complex r{re.value(), im.value()};
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
    throw NumericalError("weighted inner product is not finite");
  }
  return r;
}

double weighted_norm(const WeightedSpace& space, std::span<const Complex> h) {
  return std::sqrt(std::max(0.0, weighted_inner(space, h, h).real()));
}

GramMatrix gram_matrix(const WeightedSpace& space, int degree, std::size_t max_basis) {
  GramMatrix G;
  G.dim = space.dim();
  G.basis = monomial_basis(G.dim, degree);
  const auto nb = static_cast<Eigen::Index>(G.basis.size());
  if (G.basis.size() > max_basis) {
    throw ResourceError("basis of size " + std::to_string(G.basis.size()) + " exceeds cap " + std::to_string(max_basis));
  }
  const auto& nodes = space.rule().nodes();
  const auto& m = space.measure();
  std::vector<Eigen::MatrixXcd> partial(chunk_count(nodes.size(), kChunk));
  for_each_chunk(nodes.size(), kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Eigen::MatrixXcd W = monomial_block(nodes, begin, end, G.basis);
    for (std::size_t i = begin; i < end; ++i) W.row(static_cast<Eigen::Index>(i - begin)) *= std::sqrt(m[i]);
    // G(a, b) = sum_i m_i z^a conj(z^b)
    partial[c] = W.transpose() * W.conjugate();
  });
  G.values = Eigen::MatrixXcd::Zero(nb, nb);
  for (const auto& p : partial) G.values += p;
  for (Eigen::Index a = 0; a < nb; ++a) {
    G.values(a, a) = Complex(G.values(a, a).real(), 0.0);
    for (Eigen::Index b = a + 1; b < nb; ++b) G.values(b, a) = std::conj(G.values(a, b));
  }
  if (!G.values.allFinite()) throw NumericalError("Gram matrix has non-finite entries");
  if (G.values(0, 0).real() <= 0.0 && G.basis.front().degree() == 0) {
    throw NumericalError("Gram matrix has a non-positive constant-monomial norm");
  }
  return G;
}

HoloPoly GramFactorization::basis_function(int k) const {
  HoloPoly p(dim);
  for (std::size_t r = 0; r < retained.size(); ++r) p.set(retained[r], B(static_cast<Eigen::Index>(r), k));
  return p;
}

GramFactorization orthonormalize(const GramMatrix& G, std::optional<double> drop_tol) {
  const Eigen::Index n = G.values.rows();
  if (n == 0) throw InputError("empty Gram matrix");
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, G.values(i, i).real());
  const double tol = drop_tol.value_or(1e-12 * max_diag);
  if (!(tol > 0.0)) throw InputError("drop tolerance must be > 0");

  Eigen::MatrixXcd A = G.values;
  std::vector<Eigen::Index> perm(n);
  for (Eigen::Index i = 0; i < n; ++i) perm[i] = i;
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (A(i, i).real() > A(p, p).real()) p = i;
    }
    for (Eigen::Index i = k; i < n; ++i) {
      if (A(i, i).real() < -tol) {
        throw NumericalError("Gram matrix is not positive semidefinite (Schur diagonal " +
                             std::to_string(A(i, i).real()) + ")");
      }
    }
    if (A(p, p).real() < tol) break;
    if (p != k) {
      A.row(k).swap(A.row(p));
      A.col(k).swap(A.col(p));
      L.row(k).swap(L.row(p));
      std::swap(perm[k], perm[p]);
    }
    const double d = std::sqrt(A(k, k).real());
    L(k, k) = d;
    for (Eigen::Index i = k + 1; i < n; ++i) L(i, k) = A(i, k) / d;
    for (Eigen::Index j = k + 1; j < n; ++j) {
      for (Eigen::Index i = k + 1; i < n; ++i) A(i, j) -= L(i, k) * std::conj(L(j, k));
    }
    ++rank;
  }

  GramFactorization fac;
  fac.dim = G.dim;
  fac.drop_tol = tol;
  for (Eigen::Index k = rank; k < n; ++k) fac.dropped.push_back({G.basis[perm[k]], A(k, k).real()});

  // G_PP = L L^H and <b_k, b_l> = (B^T G conj(B))(k, l), so B = L^{-T} on the
  // leading rank x rank block; rows in pivot order.
  const Eigen::MatrixXcd Lr = L.topLeftCorner(rank, rank);
  const Eigen::MatrixXcd Bp =
      Lr.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(rank, rank));

  // Reorder rows into graded order of the retained monomials.
  std::vector<Eigen::Index> order(rank);
  for (Eigen::Index k = 0; k < rank; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return perm[a] < perm[b]; });
  fac.B.resize(rank, rank);
  for (Eigen::Index r = 0; r < rank; ++r) {
    fac.retained.push_back(G.basis[perm[order[r]]]);
    fac.B.row(r) = Bp.row(order[r]);
  }
  std::sort(fac.dropped.begin(), fac.dropped.end(),
            [](const DroppedPivot& a, const DroppedPivot& b) { return a.alpha < b.alpha; });
  return fac;
}

double orthonormality_defect(const GramMatrix& G, const GramFactorization& fac) {
  const auto r = static_cast<Eigen::Index>(fac.retained.size());
  std::vector<Eigen::Index> idx(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    idx[k] = std::find(G.basis.begin(), G.basis.end(), fac.retained[k]) - G.basis.begin();
  }
  Eigen::MatrixXcd Grr(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b < r; ++b) Grr(a, b) = G.values(idx[a], idx[b]);
  }
  // <b_k, b_l> = sum_{a,b} B(a,k) conj(B(b,l)) G(a,b) = (B^T G conj(B))(k,l)
  const Eigen::MatrixXcd M = fac.B.transpose() * Grr * fac.B.conjugate();
  return (M - Eigen::MatrixXcd::Identity(r, r)).norm();
}

Projection project(const WeightedSpace& space, const GramFactorization& fac, std::span<const Complex> h) {
  if (h.size() != space.rule().size()) throw InputError("node value count does not match the space");
  Projection out;
  out.h_norm = weighted_norm(space, h);

  // <h, b_k> = sum_a conj(B(a,k)) y_a with y_a = <h, z^a>.
  const Eigen::VectorXcd y = moment_vector(space, fac.retained, h);
  const Eigen::VectorXcd c = fac.B.adjoint() * y;
  const Eigen::VectorXcd g = fac.B * c;

  out.g = HoloPoly(fac.dim);
  for (std::size_t r = 0; r < fac.retained.size(); ++r) out.g.set(fac.retained[r], g(static_cast<Eigen::Index>(r)));
  out.coefficients.assign(c.data(), c.data() + c.size());

  const NodeValues gv = sample_poly(space.rule(), out.g);
  NodeValues residual(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) residual[i] = h[i] - gv[i];
  const Eigen::VectorXcd rc = fac.B.adjoint() * moment_vector(space, fac.retained, residual);
  out.residual = rc.size() ? rc.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

nlohmann::json poly_to_json(const HoloPoly& p) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [alpha, c] : p.coeffs()) {
    nlohmann::json a = p.dim() == 1 ? nlohmann::json::array({alpha.a[0]})
                                    : nlohmann::json::array({alpha.a[0], alpha.a[1]});
    coeffs.push_back({{"alpha", a}, {"re", c.real()}, {"im", c.imag()}});
  }
  return {{"coeffs", coeffs}};
}

HoloPoly poly_from_json(const nlohmann::json& j, int default_dim) {
  if (!j.is_object() || !j.contains("coeffs") || !j.at("coeffs").is_array()) {
    throw InputError("polynomial must be an object with a 'coeffs' array");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "coeffs") throw InputError("unknown key '" + key + "' in polynomial");
  }
  const auto& cs = j.at("coeffs");
  int dim = default_dim;
  if (!cs.empty()) {
    if (!cs[0].is_object() || !cs[0].contains("alpha") || !cs[0].at("alpha").is_array()) {
      throw InputError("polynomial term needs an 'alpha' array");
    }
    dim = static_cast<int>(cs[0].at("alpha").size());
  }
  HoloPoly p(dim);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& t = cs[i];
    const std::string where = "polynomial coeffs[" + std::to_string(i) + "]";
    if (!t.is_object()) throw InputError(where + " must be an object");
    for (const auto& [key, value] : t.items()) {
      if (key != "alpha" && key != "re" && key != "im") throw InputError("unknown key '" + key + "' in " + where);
    }
    const auto& a = t.at("alpha");
    if (!a.is_array() || static_cast<int>(a.size()) != dim) throw InputError(where + ": alpha arity mismatch");
    MultiIndex alpha;
    for (int k = 0; k < dim; ++k) {
      if (!a[k].is_number_integer()) throw InputError(where + ": alpha entries must be integers");
      alpha.a[k] = a[k].get<int>();
    }
    const double re = t.value("re", 0.0);
    const double im = t.value("im", 0.0);
    p.set(alpha, p.coeff(alpha) + Complex(re, im));
  }
  return p;
}

void write_gram_csv(const GramMatrix& G, std::ostream& out) {
  out << "alpha1,alpha2,beta1,beta2,re,im\n";
  char buf[160];
  for (std::size_t a = 0; a < G.basis.size(); ++a) {
    for (std::size_t b = 0; b < G.basis.size(); ++b) {
      const Complex v = G.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g,%.17g\n", G.basis[a].a[0], G.basis[a].a[1], G.basis[b].a[0],
                    G.basis[b].a[1], v.real(), v.imag());
      out << buf;
    }
  }
}

}  // namespace pshlab
