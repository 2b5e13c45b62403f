#include "coniso/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace coniso {

namespace {

Integer eval_poly(const std::vector<Integer>& c, const Integer& x) {
  Integer acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Divides c by (x - r); caller guarantees r is a root.
std::vector<Integer> deflate(const std::vector<Integer>& c, const Integer& r) {
  const std::size_t deg = c.size() - 1;
  std::vector<Integer> q(deg);
  Integer carry = 0;
  for (std::size_t k = deg; k-- > 0;) {
    carry = c[k + 1] + carry * r;
    q[k] = carry;
  }
  return q;
}

// Integer roots with multiplicity, when the polynomial splits over Z.
std::optional<std::vector<std::pair<Integer, int>>> integer_roots(std::vector<Integer> poly,
                                                                  const Eigen::VectorXd& approx) {
  std::vector<long> candidates;
  for (double v : approx) candidates.push_back(std::lround(v));
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::pair<Integer, int>> roots;
  for (long c : candidates) {
    Integer r = c;
    int mult = 0;
    while (poly.size() > 1 && eval_poly(poly, r) == 0) {
      poly = deflate(poly, r);
      ++mult;
    }
    if (mult == 0) return std::nullopt;
    roots.emplace_back(r, mult);
  }
  if (poly.size() != 1) return std::nullopt;
  return roots;
}

}  // namespace

std::vector<Integer> char_poly_exact(const IntMatrix& a) {
  if (!a.square()) throw std::invalid_argument("char_poly_exact: matrix must be square");
  const std::size_t n = a.rows();
  // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k.
  // Every M_k is an integer polynomial in A, and the divisions are exact.
  std::vector<Integer> c(n + 1);
  c[n] = 1;
  IntMatrix m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    IntMatrix next = a * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    m = std::move(next);
    IntMatrix am = a * m;
    Integer t = am.trace();
    Integer q;
    mpz_divexact_ui(q.get_mpz_t(), t.get_mpz_t(), k);
    c[n - k] = -q;
  }
  return c;
}

Eigensystem eigendecompose(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigendecompose: matrix must be square");
  Eigensystem out;
  if (a.rows() == 0) return out;
  // Tridiagonal QR; single-threaded, so results are reproducible run to run.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: symmetric eigensolver did not converge");
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Spectrum spectrum(const IntMatrix& a) {
  Spectrum s;
  s.char_poly = char_poly_exact(a);
  if (a.rows() == 0) {
    s.exact = true;
    return s;
  }
  Eigensystem es = eigendecompose(to_double(a));
  if (auto roots = integer_roots(s.char_poly, es.values)) {
    s.exact = true;
    for (auto& [r, m] : *roots) s.eigenvalues.emplace_back(r.get_d(), m);
    return s;
  }
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (!s.eigenvalues.empty() && s.eigenvalues.back().first - es.values[i] <= 1e-6 * scale) {
      s.eigenvalues.back().second++;
    } else {
      s.eigenvalues.emplace_back(es.values[i], 1);
    }
  }
  return s;
}

EigenprojectorSet eigenprojectors(const IntMatrix& a) {
  if (!a.symmetric()) throw std::invalid_argument("eigenprojectors: matrix must be symmetric");
  EigenprojectorSet out;
  const std::size_t n = a.rows();
  if (n == 0) {
    out.exact = true;
    return out;
  }
  Eigensystem es = eigendecompose(to_double(a));

  if (auto roots = integer_roots(char_poly_exact(a), es.values)) {
    out.exact = true;
    for (const auto& [lambda, mult] : *roots) {
      IntMatrix num = IntMatrix::identity(n);
      Integer den = 1;
      for (const auto& [tau, m2] : *roots) {
        if (tau == lambda) continue;
        IntMatrix shifted = a;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= tau;
        num = num * shifted;
        den *= lambda - tau;
      }
      RatMatrix e = to_rational(num);
      const Rational inv = Rational(1) / Rational(den);
      e *= inv;
      for (auto& x : e.data()) x.canonicalize();
      Eigenprojector p;
      p.value = lambda.get_d();
      p.exact_value = lambda;
      p.projector = to_double(e);
      p.exact_projector = std::move(e);
      out.items.push_back(std::move(p));
    }
    return out;
  }

  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  const Eigen::Index total = es.values.size();
  while (start < total) {
    Eigen::Index end = start + 1;
    while (end < total && es.values[end - 1] - es.values[end] <= 1e-6 * scale) ++end;
    const auto block = es.vectors.middleCols(start, end - start);
    Eigenprojector p;
    p.value = es.values.segment(start, end - start).mean();
    p.projector = block * block.transpose();
    out.items.push_back(std::move(p));
    start = end;
  }
  return out;
}

IntMatrix laplacian(const Graph& g) {
  IntMatrix l(g.order(), g.order());
  for (auto [u, v] : g.edges()) {
    l(u, v) = l(v, u) = -1;
    l(u, u) += 1;
    l(v, v) += 1;
  }
  return l;
}

CospectralityReport cospectrality_suite(const Graph& g, const Graph& h) {
  CospectralityReport r;
  const Graph gc = complement(g), hc = complement(h);
  r.adjacency = char_poly_exact(g.adjacency()) == char_poly_exact(h.adjacency());
  r.complement_adjacency = char_poly_exact(gc.adjacency()) == char_poly_exact(hc.adjacency());
  r.laplacian = char_poly_exact(laplacian(g)) == char_poly_exact(laplacian(h));
  r.complement_laplacian = char_poly_exact(laplacian(gc)) == char_poly_exact(laplacian(hc));
  return r;
}

int component_count(const Graph& g) {
  std::vector<int> parent(g.order());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int count = g.order();
  for (auto [u, v] : g.edges()) {
    int a = find(u), b = find(v);
    if (a != b) {
      parent[a] = b;
      --count;
    }
  }
  return count;
}

namespace {

bool check_distance_regular(const Graph& g) {
  const int n = g.order();
  auto dist = distance_table(g);
  int diam = 0;
  for (const auto& row : dist)
    for (int d : row) diam = std::max(diam, d);
  const int span = diam + 1;
  // For each distance k, the table c[i][j] = |N_i(u) ∩ N_j(v)| must not depend on (u,v).
  std::vector<std::optional<std::vector<int>>> reference(span);
  std::vector<int> table(static_cast<std::size_t>(span) * span);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      std::fill(table.begin(), table.end(), 0);
      for (int w = 0; w < n; ++w) table[dist[u][w] * span + dist[v][w]]++;
      auto& ref = reference[dist[u][v]];
      if (!ref) {
        ref = table;
      } else if (*ref != table) {
        return false;
      }
    }
  return true;
}

}  // namespace

RegularityProfile regularity_profile(const Graph& g) {
  RegularityProfile p;
  const int n = g.order();
  p.components = component_count(g);
  p.connected = p.components == 1;

  auto lpoly = char_poly_exact(laplacian(g));
  while (p.laplacian_zero_multiplicity < static_cast<int>(lpoly.size()) - 1 &&
         lpoly[p.laplacian_zero_multiplicity] == 0)
    ++p.laplacian_zero_multiplicity;
  if (p.laplacian_zero_multiplicity != p.components)
    throw std::logic_error("Laplacian nullity disagrees with the component count");

  p.regular = true;
  for (int v = 1; v < n; ++v)
    if (g.degree(v) != g.degree(0)) p.regular = false;

  p.walk_regular = true;
  p.one_walk_regular = true;
  const IntMatrix a = g.adjacency();
  IntMatrix power = IntMatrix::identity(n);
  for (int l = 0; l < n; ++l) {
    for (int v = 1; v < n; ++v)
      if (power(v, v) != power(0, 0)) p.walk_regular = false;
    for (std::size_t e = 1; e < g.size(); ++e) {
      auto [u, v] = g.edges()[e];
      auto [u0, v0] = g.edges()[0];
      if (power(u, v) != power(u0, v0)) p.one_walk_regular = false;
    }
    if (!p.walk_regular) break;
    power = power * a;
  }
  p.one_walk_regular = p.one_walk_regular && p.walk_regular;
  p.distance_regular = p.connected && check_distance_regular(g);
  return p;
}

FractionalResult fractional_isomorphic(const Graph& g, const Graph& h) {
  FractionalResult out;
  const int n = g.order();
  auto fail = [&](std::string kind) {
    out.verdict = make_verdict("fractional", false, std::move(kind));
    return out;
  };
  if (n != h.order()) {
    auto r = fail("order-mismatch");
    r.verdict.certificate["orders"] = {n, h.order()};
    return r;
  }
  RatMatrix d(n, n);
  json cells = json::array();
  if (g == h) {
    d = RatMatrix::identity(n);
  } else {
    const Graph* gs[] = {&g, &h};
    auto colors = refine_vertex_colors(gs);
    std::map<int, int> count_g, count_h;
    for (int c : colors[0]) count_g[c]++;
    for (int c : colors[1]) count_h[c]++;
    if (count_g != count_h) {
      out.verdict = make_verdict("fractional", false, "color-histogram");
      json diff = json::array();
      for (const auto& [c, k] : count_g)
        if (count_h[c] != k) diff.push_back({{"color", c}, {"G", k}, {"H", count_h[c]}});
      for (const auto& [c, k] : count_h)
        if (!count_g.count(c)) diff.push_back({{"color", c}, {"G", 0}, {"H", k}});
      out.verdict.certificate["differences"] = diff;
      return out;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (colors[0][i] == colors[1][j]) d(i, j) = Rational(1, count_g[colors[0][i]]);
    for (const auto& [c, k] : count_g) cells.push_back(k);
  }
  RatMatrix ag = to_rational(g.adjacency()), ah = to_rational(h.adjacency());
  if (!(ag * d == d * ah)) throw std::logic_error("fractional witness fails A_G D = D A_H");
  out.verdict = make_verdict("fractional", true, "doubly-stochastic");
  out.verdict.certificate["cell_sizes"] = cells;
  out.verdict.certificate["verified"] = "A_G D = D A_H exactly";
  out.witness = std::move(d);
  return out;
}

}  // namespace coniso
