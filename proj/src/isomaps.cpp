#include "coniso/isomaps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

#include "coniso/spectral.hpp"

namespace coniso {

namespace {

void check_shape(std::size_t rows, std::size_t cols, int ng, int nh) {
  if (ng < 0 || nh < 0) throw std::invalid_argument("iso matrix: negative vertex count");
  const std::size_t n = static_cast<std::size_t>(ng) * nh;
  if (rows != n || cols != n)
    throw std::invalid_argument("iso matrix: expected " + std::to_string(n) + "x" +
                                std::to_string(n) + ", got " + std::to_string(rows) + "x" +
                                std::to_string(cols));
}

void check_graphs(const IsoMatrix& m, const Graph& g, const Graph& h) {
  if (g.order() != m.ng || h.order() != m.nh)
    throw std::invalid_argument("iso matrix indexed by " + std::to_string(m.ng) + "x" +
                                std::to_string(m.nh) + " pairs, graphs have orders " +
                                std::to_string(g.order()) + " and " + std::to_string(h.order()));
}

Rational rabs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Rational max_abs(const RatMatrix& m) {
  Rational best = 0;
  for (const auto& x : m.data())
    if (rabs(x) > best) best = rabs(x);
  return best;
}

std::string label(double lambda) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", lambda);
  return buf;
}

}  // namespace

IsoMatrix make_iso_matrix(Eigen::MatrixXd values, int ng, int nh, std::string cone) {
  check_shape(values.rows(), values.cols(), ng, nh);
  IsoMatrix m;
  m.ng = ng;
  m.nh = nh;
  m.values = std::move(values);
  m.cone = std::move(cone);
  return m;
}

IsoMatrix make_iso_matrix(RatMatrix values, int ng, int nh, std::string cone) {
  check_shape(values.rows(), values.cols(), ng, nh);
  IsoMatrix m;
  m.ng = ng;
  m.nh = nh;
  m.values = to_double(values);
  m.exact = std::move(values);
  m.cone = std::move(cone);
  return m;
}

Eigen::MatrixXd apply_map(const IsoMatrix& m, const Eigen::MatrixXd& x, MapDirection direction) {
  const int ng = m.ng, nh = m.nh;
  const bool fwd = direction == MapDirection::forward;
  const int in = fwd ? ng : nh, out = fwd ? nh : ng;
  if (x.rows() != in || x.cols() != in)
    throw std::invalid_argument("apply_map: expected a " + std::to_string(in) + "x" +
                                std::to_string(in) + " matrix");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(out, out);
  for (int g = 0; g < ng; ++g)
    for (int g2 = 0; g2 < ng; ++g2)
      for (int h = 0; h < nh; ++h)
        for (int h2 = 0; h2 < nh; ++h2) {
          const double v = m.values(g * nh + h, g2 * nh + h2);
          if (v == 0.0) continue;
          if (fwd) y(h, h2) += v * x(g, g2);
          else y(g, g2) += v * x(h, h2);
        }
  return y;
}

RatMatrix apply_map(const RatMatrix& m, int ng, int nh, const RatMatrix& x, MapDirection direction) {
  check_shape(m.rows(), m.cols(), ng, nh);
  const bool fwd = direction == MapDirection::forward;
  const std::size_t in = fwd ? ng : nh, out = fwd ? nh : ng;
  if (x.rows() != in || x.cols() != in)
    throw std::invalid_argument("apply_map: expected a " + std::to_string(in) + "x" +
                                std::to_string(in) + " matrix");
  RatMatrix y(out, out);
  Rational t;
  for (int g = 0; g < ng; ++g)
    for (int g2 = 0; g2 < ng; ++g2)
      for (int h = 0; h < nh; ++h)
        for (int h2 = 0; h2 < nh; ++h2) {
          const Rational& v = m(g * nh + h, g2 * nh + h2);
          if (v == 0) continue;
          if (fwd) {
            if (x(g, g2) == 0) continue;
            t = v * x(g, g2);
            y(h, h2) += t;
          } else {
            if (x(h, h2) == 0) continue;
            t = v * x(h, h2);
            y(g, g2) += t;
          }
        }
  return y;
}

IsoMatrix transpose_roles(const IsoMatrix& m) {
  const int ng = m.ng, nh = m.nh, n = ng * nh;
  std::vector<int> to(n);
  for (int g = 0; g < ng; ++g)
    for (int h = 0; h < nh; ++h) to[g * nh + h] = h * ng + g;
  IsoMatrix t;
  t.ng = nh;
  t.nh = ng;
  t.cone = m.cone;
  t.g_label = m.h_label;
  t.h_label = m.g_label;
  t.values.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t.values(to[a], to[b]) = m.values(a, b);
  if (m.exact) {
    RatMatrix e(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) e(to[a], to[b]) = (*m.exact)(a, b);
    t.exact = std::move(e);
  }
  for (const auto& f : m.cp_factors) {
    Eigen::VectorXd p(n);
    for (int a = 0; a < n; ++a) p[to[a]] = f[a];
    t.cp_factors.push_back(std::move(p));
  }
  return t;
}

KrausSet kraus_decompose(const IsoMatrix& m) {
  const int ng = m.ng, nh = m.nh;
  KrausSet out;
  if (ng * nh == 0) return out;
  Eigensystem es = eigendecompose(0.5 * (m.values + m.values.transpose()));
  const double scale = es.values.cwiseAbs().maxCoeff();
  const double lowest = es.values.minCoeff();
  if (lowest < -1e-9 * scale)
    throw NotPositiveError("kraus_decompose: matrix is not positive semidefinite (eigenvalue " +
                           std::to_string(lowest) + ")");
  const double cutoff = 1e-12 * std::max(1.0, scale);
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    const double lambda = es.values[k];
    if (lambda <= cutoff) break;  // values are sorted in descending order
    Eigen::VectorXd v = es.vectors.col(k);
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v[at] < 0) v = -v;
    Eigen::MatrixXd kmat(nh, ng);
    for (int g = 0; g < ng; ++g)
      for (int h = 0; h < nh; ++h) kmat(h, g) = std::sqrt(lambda) * v[g * nh + h];
    out.push_back(std::move(kmat));
  }
  return out;
}

Eigen::MatrixXd apply_kraus(const KrausSet& ks, const Eigen::MatrixXd& x, MapDirection direction) {
  if (ks.empty()) throw std::invalid_argument("apply_kraus: empty Kraus set");
  const bool fwd = direction == MapDirection::forward;
  const Eigen::Index out = fwd ? ks[0].rows() : ks[0].cols();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(out, out);
  for (const auto& k : ks) {
    if (fwd) y.noalias() += k * x * k.transpose();
    else y.noalias() += k.transpose() * x * k;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Reports

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool Report::has(std::string_view name) const {
  return std::any_of(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
}

const Check& Report::at(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("report has no check named '" + std::string(name) + "'");
}

std::vector<std::string> Report::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c.name);
  return out;
}

json Report::to_json() const {
  json j;
  j["passed"] = passed();
  json list = json::array();
  for (const auto& c : checks)
    list.push_back({{"name", c.name},
                    {"passed", c.passed},
                    {"residual", c.residual},
                    {"threshold", c.threshold},
                    {"exact", c.exact}});
  j["checks"] = list;
  return j;
}

void Report::add(std::string name, double residual, double threshold, bool exact) {
  checks.push_back({std::move(name), residual <= threshold, residual, threshold, exact});
}

void Report::add_exact(std::string name, const Rational& residual) {
  checks.push_back({std::move(name), residual == 0, residual.get_d(), 0.0, true});
}

// ---------------------------------------------------------------------------
// Verification

Report verify_iso_matrix(const IsoMatrix& m, const Graph& g, const Graph& h, Cone cone,
                         VerifyOptions opt) {
  check_shape(m.values.rows(), m.values.cols(), m.ng, m.nh);
  check_graphs(m, g, h);
  const int ng = m.ng, nh = m.nh;
  Report r;

  if (m.exact) {
    const RatMatrix& e = *m.exact;
    RatMatrix sg(ng, ng), sh(nh, nh);
    Rational pattern = 0, asym = 0;
    for (int a = 0; a < ng; ++a)
      for (int b = 0; b < nh; ++b)
        for (int a2 = 0; a2 < ng; ++a2)
          for (int b2 = 0; b2 < nh; ++b2) {
            const Rational& v = e(a * nh + b, a2 * nh + b2);
            if (v == 0) continue;
            sg(a, a2) += v;
            sh(b, b2) += v;
            if (rel(g, a, a2) != rel(h, b, b2)) pattern = std::max(pattern, rabs(v));
            asym = std::max(asym, rabs(v - e(a2 * nh + b2, a * nh + b)));
          }
    r.add_exact("block_sums_g", max_abs(sg - RatMatrix::ones(ng, ng)));
    r.add_exact("block_sums_h", max_abs(sh - RatMatrix::ones(nh, nh)));
    r.add_exact("zero_pattern", pattern);
    r.add_exact("symmetry", asym);
  } else {
    const double scale = std::max(1.0, max_abs(m.values));
    Eigen::MatrixXd sg = Eigen::MatrixXd::Zero(ng, ng), sh = Eigen::MatrixXd::Zero(nh, nh);
    double pattern = 0;
    for (int a = 0; a < ng; ++a)
      for (int b = 0; b < nh; ++b)
        for (int a2 = 0; a2 < ng; ++a2)
          for (int b2 = 0; b2 < nh; ++b2) {
            const double v = m.values(a * nh + b, a2 * nh + b2);
            sg(a, a2) += v;
            sh(b, b2) += v;
            if (rel(g, a, a2) != rel(h, b, b2)) pattern = std::max(pattern, std::abs(v));
          }
    const double t = opt.tol * scale;
    r.add("block_sums_g", max_abs(sg.array() - 1.0), t);
    r.add("block_sums_h", max_abs(sh.array() - 1.0), t);
    r.add("zero_pattern", pattern, t);
    r.add("symmetry", max_abs(m.values - m.values.transpose()), t);
  }

  const double min_eig =
      m.values.size() ? eigendecompose(0.5 * (m.values + m.values.transpose())).values.minCoeff()
                      : 0.0;
  r.add("psd", std::max(0.0, -min_eig), opt.psd_tol);
  if (cone == Cone::dnn) {
    if (m.exact) {
      Rational lowest = 0;
      for (const auto& x : m.exact->data()) lowest = std::min(lowest, x);
      r.add_exact("nonnegative", -lowest);
    } else {
      const double lowest = m.values.size() ? m.values.minCoeff() : 0.0;
      r.add("nonnegative", std::max(0.0, -lowest), opt.nonneg_tol);
    }
  }

  if (m.exact) {
    const RatMatrix ag = to_rational(g.adjacency()), ah = to_rational(h.adjacency());
    r.add_exact("phi_identity",
                max_abs(apply_map(*m.exact, ng, nh, RatMatrix::identity(ng)) - RatMatrix::identity(nh)));
    r.add_exact("phi_adjacency", max_abs(apply_map(*m.exact, ng, nh, ag) - ah));
    r.add_exact("phi_ones", max_abs(apply_map(*m.exact, ng, nh, RatMatrix::ones(ng, ng)) -
                                    RatMatrix::ones(nh, nh)));
  } else {
    const double t = opt.tol * std::max(1.0, max_abs(m.values));
    const Eigen::MatrixXd ag = to_double(g.adjacency()), ah = to_double(h.adjacency());
    r.add("phi_identity",
          max_abs(apply_map(m, Eigen::MatrixXd::Identity(ng, ng)) - Eigen::MatrixXd::Identity(nh, nh)), t);
    r.add("phi_adjacency", max_abs(apply_map(m, ag) - ah), t);
    r.add("phi_ones", max_abs(apply_map(m, Eigen::MatrixXd::Ones(ng, ng)).array() - 1.0), t);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Constructions

IsoMatrix build_cp_from_isomorphisms(const Graph& g, const Graph& h,
                                     std::span<const Permutation> fs,
                                     std::span<const Rational> weights) {
  if (fs.empty()) throw std::invalid_argument("build_cp_from_isomorphisms: no isomorphisms given");
  if (fs.size() != weights.size())
    throw std::invalid_argument("build_cp_from_isomorphisms: one weight per isomorphism is required");
  Rational total = 0;
  for (const auto& w : weights) {
    if (w <= 0) throw std::invalid_argument("build_cp_from_isomorphisms: weights must be positive");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("build_cp_from_isomorphisms: weights must sum to 1");
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (!is_isomorphism(g, h, fs[i]))
      throw std::invalid_argument("build_cp_from_isomorphisms: map " + std::to_string(i) +
                                  " is not an isomorphism");

  const int ng = g.order(), nh = h.order(), n = ng * nh;
  RatMatrix e(n, n);
  std::vector<Eigen::VectorXd> factors;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Permutation& f = fs[i];
    for (int a = 0; a < ng; ++a)
      for (int b = 0; b < ng; ++b) e(a * nh + f[a], b * nh + f[b]) += weights[i];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    const double root = std::sqrt(weights[i].get_d());
    for (int a = 0; a < ng; ++a) v[a * nh + f[a]] = root;
    factors.push_back(std::move(v));
  }
  IsoMatrix m = make_iso_matrix(std::move(e), ng, nh, "cp");
  m.cp_factors = std::move(factors);
  return m;
}

IsoMatrix build_dnn_choi_from_wl(const Graph& g, const Graph& h, const WLResult& wl) {
  if (!wl.verdict.holds() || !wl.basis_g || !wl.basis_h)
    throw std::invalid_argument("build_dnn_choi_from_wl: the graphs are not WL-equivalent");
  const CoherentBasis& bg = *wl.basis_g;
  const CoherentBasis& bh = *wl.basis_h;
  if (bg.order() != g.order() || bh.order() != h.order() ||
      wl.pairing.size() != static_cast<std::size_t>(bg.dimension()))
    throw std::invalid_argument("build_dnn_choi_from_wl: pairing missing or inconsistent");
  const int ng = g.order(), nh = h.order(), n = ng * nh;
  std::vector<Rational> inverse(bg.dimension());
  for (int i = 0; i < bg.dimension(); ++i) inverse[i] = Rational(1, bg.size(i));
  RatMatrix e(n, n);
  for (int a = 0; a < ng; ++a)
    for (int a2 = 0; a2 < ng; ++a2) {
      const int i = bg.class_of(a, a2);
      const int j = wl.pairing[i];
      for (int b = 0; b < nh; ++b)
        for (int b2 = 0; b2 < nh; ++b2)
          if (bh.class_of(b, b2) == j) e(a * nh + b, a2 * nh + b2) = inverse[i];
    }
  return make_iso_matrix(std::move(e), ng, nh, "dnn");
}

QuantumCertificate classical_certificate(const Graph& g, const Graph& h, const Permutation& f) {
  if (!is_isomorphism(g, h, f))
    throw std::invalid_argument("classical_certificate: map is not an isomorphism");
  QuantumCertificate c;
  c.ng = g.order();
  c.nh = h.order();
  for (int a = 0; a < c.ng; ++a)
    for (int b = 0; b < c.nh; ++b)
      c.projectors.push_back(Eigen::MatrixXd::Constant(1, 1, f[a] == b ? 1.0 : 0.0));
  return c;
}

IsoMatrix iso_matrix_from_certificate(const QuantumCertificate& cert) {
  const int n = cert.ng * cert.nh;
  const double d = cert.dimension();
  Eigen::MatrixXd m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      m(a, b) = (cert.projectors[a].transpose().cwiseProduct(cert.projectors[b])).sum() / d;
  return make_iso_matrix(std::move(m), cert.ng, cert.nh, "quantum");
}

Report verify_quantum_certificate(const QuantumCertificate& cert, const Graph& g, const Graph& h) {
  const int ng = cert.ng, nh = cert.nh;
  if (ng != g.order() || nh != h.order())
    throw std::invalid_argument("quantum certificate does not match the graph orders");
  if (cert.projectors.size() != static_cast<std::size_t>(ng) * nh)
    throw std::invalid_argument("quantum certificate needs one projector per vertex pair");
  const int d = cert.dimension();
  for (const auto& p : cert.projectors)
    if (p.rows() != d || p.cols() != d)
      throw std::invalid_argument("quantum certificate projectors must share one square size");

  constexpr double tol = 1e-8;
  Report r;
  double proj = 0;
  for (const auto& p : cert.projectors)
    proj = std::max({proj, max_abs(p - p.transpose()), max_abs(p * p - p)});
  r.add("projectors", proj, tol);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  double rows = 0, cols = 0;
  for (int a = 0; a < ng; ++a) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (int b = 0; b < nh; ++b) s += cert.at(a, b);
    rows = std::max(rows, max_abs(s - id));
  }
  for (int b = 0; b < nh; ++b) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < ng; ++a) s += cert.at(a, b);
    cols = std::max(cols, max_abs(s - id));
  }
  r.add("row_sums", rows, tol);
  r.add("column_sums", cols, tol);

  double orth = 0;
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < nh; ++b)
      for (int a2 = 0; a2 < ng; ++a2)
        for (int b2 = 0; b2 < nh; ++b2)
          if (rel(g, a, a2) != rel(h, b, b2))
            orth = std::max(orth, max_abs(cert.at(a, b) * cert.at(a2, b2)));
  r.add("orthogonality", orth, tol);

  if (r.passed()) {
    const Report inner = verify_iso_matrix(iso_matrix_from_certificate(cert), g, h, Cone::dnn);
    for (Check c : inner.checks) {
      c.name = "matrix." + c.name;
      r.checks.push_back(std::move(c));
    }
  }
  return r;
}

Report verify_map_properties(const IsoMatrix& m, const Graph& g, const Graph& h, double tol,
                             std::uint64_t seed) {
  check_shape(m.values.rows(), m.values.cols(), m.ng, m.nh);
  check_graphs(m, g, h);
  const int ng = m.ng, nh = m.nh;
  Report r;
  const IntMatrix ag_int = g.adjacency(), ah_int = h.adjacency();
  const bool cospectral = char_poly_exact(ag_int) == char_poly_exact(ah_int);
  r.checks.push_back({"cospectral", cospectral, cospectral ? 0.0 : 1.0, 0.0, true});

  const Eigen::MatrixXd ag = to_double(ag_int), ah = to_double(ah_int);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double left = 0, right = 0;
  for (int probe = 0; probe < 3; ++probe) {
    Eigen::MatrixXd w(ng, ng);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = normal(rng);
    w /= std::max(1e-300, max_abs(w));
    const Eigen::MatrixXd pw = apply_map(m, w);
    left = std::max(left, max_abs(apply_map(m, ag * w) - ah * pw));
    right = std::max(right, max_abs(apply_map(m, w * ag) - pw * ah));
  }
  r.add("left_multiplicative", left, tol);
  r.add("right_multiplicative", right, tol);

  try {
    const KrausSet ks = kraus_decompose(m);
    double trace_preserving = 0, unital = 0;
    Eigen::MatrixXd ktk = Eigen::MatrixXd::Zero(ng, ng), kkt = Eigen::MatrixXd::Zero(nh, nh);
    for (const auto& k : ks) {
      ktk += k.transpose() * k;
      kkt += k * k.transpose();
    }
    trace_preserving = max_abs(ktk - Eigen::MatrixXd::Identity(ng, ng));
    unital = max_abs(kkt - Eigen::MatrixXd::Identity(nh, nh));
    r.add("kraus_trace_preserving", trace_preserving, tol);
    r.add("kraus_unital", unital, tol);
  } catch (const NotPositiveError&) {
    r.checks.push_back({"kraus_trace_preserving", false, INFINITY, tol, false});
  }

  const EigenprojectorSet eg = eigenprojectors(ag_int), eh = eigenprojectors(ah_int);
  for (const auto& e : eg.items) {
    const Eigenprojector* match = nullptr;
    for (const auto& f : eh.items) {
      const bool same = e.exact_value && f.exact_value ? *e.exact_value == *f.exact_value
                                                       : std::abs(e.value - f.value) <= 1e-6;
      if (same) match = &f;
    }
    const std::string tag = "(" + label(e.value) + ")";
    if (!match) {
      r.checks.push_back({"projector_forward" + tag, false, INFINITY, tol, false});
      continue;
    }
    r.add("projector_forward" + tag, max_abs(apply_map(m, e.projector) - match->projector), tol);
    r.add("projector_adjoint" + tag,
          max_abs(apply_map(m, match->projector, MapDirection::adjoint) - e.projector), tol);
  }
  return r;
}

}  // namespace coniso
