#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "coniso/algebra.hpp"
#include "coniso/isomaps.hpp"
#include "oracles.hpp"

using namespace coniso;

namespace {

Permutation identity(int n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

IsoMatrix from_maps(const Graph& g, const Graph& h, std::vector<Permutation> fs) {
  std::vector<Rational> w(fs.size(), Rational(1, static_cast<long>(fs.size())));
  return build_cp_from_isomorphisms(g, h, fs, w);
}

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = normal(rng);
  return a;
}

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = random_matrix(n, n, rng);
  return (a + a.transpose()) / 2;
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd kraus_sum(const KrausSet& ks, bool left) {
  Eigen::MatrixXd s = left ? Eigen::MatrixXd::Zero(ks[0].cols(), ks[0].cols())
                           : Eigen::MatrixXd::Zero(ks[0].rows(), ks[0].rows());
  for (const auto& k : ks) s += left ? (k.transpose() * k).eval() : (k * k.transpose()).eval();
  return s;
}

// Kraus reconstruction, trace preservation and unitality of one iso matrix.
void check_kraus(const IsoMatrix& m, std::mt19937_64& rng) {
  const KrausSet ks = kraus_decompose(m);
  for (const auto& k : ks) {
    CHECK(k.rows() == m.nh);
    CHECK(k.cols() == m.ng);
  }
  for (int t = 0; t < 3; ++t) {
    const Eigen::MatrixXd x = random_symmetric(m.ng, rng);
    CHECK(max_abs(apply_kraus(ks, x) - apply_map(m, x)) <= 1e-8);
    const Eigen::MatrixXd y = random_symmetric(m.nh, rng);
    CHECK(max_abs(apply_kraus(ks, y, MapDirection::adjoint) -
                  apply_map(m, y, MapDirection::adjoint)) <= 1e-8);
  }
  CHECK(max_abs(kraus_sum(ks, true) - Eigen::MatrixXd::Identity(m.ng, m.ng)) <= 1e-8);
  CHECK(max_abs(kraus_sum(ks, false) - Eigen::MatrixXd::Identity(m.nh, m.nh)) <= 1e-8);
}

// Schur conditions: Phi(I o W) = I o Phi(W) and Phi(A_G o W) = A_H o Phi(W).
bool schur_conditions_hold(const IsoMatrix& m, const Graph& g, const Graph& h, std::mt19937_64& rng) {
  const Eigen::MatrixXd ag = g.adjacency_real(), ah = h.adjacency_real();
  const Eigen::MatrixXd ig = Eigen::MatrixXd::Identity(g.order(), g.order());
  const Eigen::MatrixXd ih = Eigen::MatrixXd::Identity(h.order(), h.order());
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd w = random_matrix(g.order(), g.order(), rng);
    const Eigen::MatrixXd pw = apply_map(m, w);
    if (max_abs(apply_map(m, ig.cwiseProduct(w)) - ih.cwiseProduct(pw)) > 1e-9) return false;
    if (max_abs(apply_map(m, ag.cwiseProduct(w)) - ah.cwiseProduct(pw)) > 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("isomaps") {

TEST_CASE("identity map") {
  const Graph c5 = cycle_graph(5);
  const IsoMatrix m = from_maps(c5, c5, {identity(5)});
  std::mt19937_64 rng(51);
  const Eigen::MatrixXd x = random_symmetric(5, rng);
  CHECK(apply_map(m, x) == x);
  CHECK(apply_map(m, x, MapDirection::adjoint) == x);

  const Report r = verify_iso_matrix(m, c5, c5, Cone::dnn);
  CHECK(r.passed());
  for (const char* name : {"block_sums_g", "block_sums_h", "zero_pattern", "symmetry", "phi_identity",
                           "phi_adjacency", "phi_ones"}) {
    CHECK(r.at(name).exact);
    CHECK(r.at(name).residual == 0);
  }

  const KrausSet ks = kraus_decompose(m);
  REQUIRE(ks.size() == 1);
  CHECK(max_abs(ks[0] - Eigen::MatrixXd::Identity(5, 5)) <= 1e-12);

  const Report mp = verify_map_properties(m, c5, c5);
  CHECK(mp.passed());
  for (const auto& c : mp.checks) CHECK_MESSAGE(c.residual <= 1e-12, c.name);
}

TEST_CASE("map of a single isomorphism is conjugation by its permutation matrix") {
  std::mt19937_64 rng(52);
  const Graph g = cycle_graph(6);
  const auto perm = oracle::random_permutation(6, rng);
  const Graph h = g.relabeled(perm);
  const IsoMatrix m = from_maps(g, h, {perm});
  const Eigen::MatrixXd p = oracle::permutation_matrix(perm, 6);
  CHECK(apply_map(m, g.adjacency_real()) == h.adjacency_real());
  const Eigen::MatrixXd x = random_symmetric(6, rng);
  CHECK(max_abs(apply_map(m, x) - p * x * p.transpose()) <= 1e-12);

  const KrausSet ks = kraus_decompose(m);
  REQUIRE(ks.size() == 1);
  CHECK(max_abs(ks[0] - p) <= 1e-12);
}

TEST_CASE("adjoint identity") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 50; ++t) {
    const int ng = 1 + t % 5, nh = 1 + (t * 3) % 5;
    const IsoMatrix m = make_iso_matrix(random_symmetric(ng * nh, rng), ng, nh);
    const Eigen::MatrixXd x = random_symmetric(ng, rng), y = random_symmetric(nh, rng);
    const double lhs = (apply_map(m, x).array() * y.array()).sum();
    const double rhs = (x.array() * apply_map(m, y, MapDirection::adjoint).array()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(make_iso_matrix(Eigen::MatrixXd::Zero(5, 5), 2, 3), std::invalid_argument);
  const IsoMatrix m = make_iso_matrix(Eigen::MatrixXd::Zero(6, 6), 2, 3);
  CHECK_THROWS_AS(apply_map(m, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(apply_map(m, Eigen::MatrixXd::Zero(2, 2), MapDirection::adjoint), std::invalid_argument);
  CHECK_THROWS_AS(verify_iso_matrix(m, cycle_graph(3), cycle_graph(3), Cone::psd), std::invalid_argument);
}

TEST_CASE("Choi round trip") {
  std::mt19937_64 rng(54);
  for (int t = 0; t < 20; ++t) {
    const int ng = 1 + t % 4, nh = 1 + (t + 1) % 4;
    const IsoMatrix m = make_iso_matrix(random_symmetric(ng * nh, rng), ng, nh);
    const Eigen::MatrixXd c = choi_matrix([&](const Eigen::MatrixXd& x) { return apply_map(m, x); }, ng, nh);
    CHECK(c == m.values);

    RatMatrix q(ng * nh, ng * nh);
    std::uniform_int_distribution<int> small(-5, 5);
    for (int i = 0; i < ng * nh; ++i)
      for (int j = i; j < ng * nh; ++j) {
        Rational x(small(rng), 1 + std::abs(small(rng)));
        x.canonicalize();
        q(i, j) = q(j, i) = x;
      }
    RatMatrix back(ng * nh, ng * nh);
    for (int g = 0; g < ng; ++g)
      for (int g2 = 0; g2 < ng; ++g2) {
        RatMatrix unit(ng, ng);
        unit(g, g2) = 1;
        const RatMatrix img = apply_map(q, ng, nh, unit);
        for (int h = 0; h < nh; ++h)
          for (int h2 = 0; h2 < nh; ++h2) back(g * nh + h, g2 * nh + h2) = img(h, h2);
      }
    CHECK(back == q);
  }
}

TEST_CASE("transpose roles is the Choi matrix of the adjoint") {
  std::mt19937_64 rng(55);
  const IsoMatrix m = make_iso_matrix(random_symmetric(12, rng), 3, 4);
  const IsoMatrix t = transpose_roles(m);
  CHECK(t.ng == 4);
  CHECK(t.nh == 3);
  const Eigen::MatrixXd y = random_symmetric(4, rng);
  CHECK(max_abs(apply_map(t, y) - apply_map(m, y, MapDirection::adjoint)) <= 1e-12);
  CHECK(transpose_roles(t).values == m.values);
}

TEST_CASE("verification is symmetric under exchanging the graphs") {
  std::mt19937_64 rng(56);
  std::vector<std::tuple<IsoMatrix, Graph, Graph>> cases;
  const Graph c4 = cycle_graph(4);
  cases.emplace_back(from_maps(c4, c4, {identity(4), Permutation{1, 2, 3, 0}}), c4, c4);
  const Graph r = rook4_graph(), s = shrikhande_graph();
  cases.emplace_back(build_dnn_choi_from_wl(r, s, wl_equivalent(r, s)), r, s);
  const Graph c6 = cycle_graph(6), two = named_graph("union(cycle(3),cycle(3))");
  cases.emplace_back(make_iso_matrix(Eigen::MatrixXd::Constant(36, 36, 1.0 / 36), 6, 6), c6, two);
  {
    IsoMatrix bent = from_maps(c4, c4, {identity(4)});
    bent.values(0, 5) = bent.values(5, 0) = 0.25;
    bent.exact.reset();
    cases.emplace_back(bent, c4, c4);
  }
  for (int t = 0; t < 4; ++t) {
    const Graph g = oracle::random_graph(4, 0.5, rng);
    const auto perm = oracle::random_permutation(4, rng);
    cases.emplace_back(from_maps(g, g.relabeled(perm), {perm}), g, g.relabeled(perm));
  }
  for (const auto& [m, g, h] : cases) {
    for (Cone cone : {Cone::psd, Cone::dnn}) {
      const bool forward = verify_iso_matrix(m, g, h, cone).passed();
      const bool backward = verify_iso_matrix(transpose_roles(m), h, g, cone).passed();
      CHECK(forward == backward);
    }
  }
}

TEST_CASE("rejections") {
  const Graph c6 = cycle_graph(6), two = named_graph("union(cycle(3),cycle(3))");
  const IsoMatrix flat = make_iso_matrix(Eigen::MatrixXd::Constant(36, 36, 1.0 / 36), 6, 6);
  const Report r = verify_iso_matrix(flat, c6, two, Cone::dnn);
  CHECK_FALSE(r.passed());
  CHECK_FALSE(r.at("zero_pattern").passed);
  CHECK(r.has("nonnegative"));
  CHECK_FALSE(verify_iso_matrix(flat, c6, two, Cone::psd).has("nonnegative"));

  const Graph c4 = cycle_graph(4), k4 = complete_graph(4);
  const std::vector<Permutation> bad = {identity(4)};
  const std::vector<Rational> one = {Rational(1)};
  CHECK_THROWS_AS(build_cp_from_isomorphisms(c4, k4, bad, one), std::invalid_argument);
  const std::vector<Permutation> two_maps = {identity(4), Permutation{1, 2, 3, 0}};
  const std::vector<Rational> short_weights = {Rational(1, 2), Rational(1, 3)};
  CHECK_THROWS_AS(build_cp_from_isomorphisms(c4, c4, two_maps, short_weights), std::invalid_argument);
  CHECK_THROWS_AS(build_dnn_choi_from_wl(hypercube_q4(), hoffman_graph(),
                                         wl_equivalent(hypercube_q4(), hoffman_graph())),
                  std::invalid_argument);

  IsoMatrix neg = make_iso_matrix(Eigen::MatrixXd::Identity(4, 4), 2, 2);
  neg.values(0, 0) = -1;
  CHECK_THROWS_AS(kraus_decompose(neg), NotPositiveError);
}

TEST_CASE("CP matrices built from isomorphisms") {
  const Graph c4 = cycle_graph(4);
  const IsoMatrix one = from_maps(c4, c4, {identity(4)});
  CHECK(verify_iso_matrix(one, c4, c4, Cone::dnn).passed());
  CHECK(one.cone == "cp");

  const IsoMatrix mix = from_maps(c4, c4, {identity(4), Permutation{1, 2, 3, 0}});
  CHECK(verify_iso_matrix(mix, c4, c4, Cone::dnn).passed());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(mix.values);
  CHECK(lu.rank() <= 2);
  REQUIRE(mix.cp_factors.size() == 2);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(16, 16);
  for (const auto& f : mix.cp_factors) {
    CHECK(f.minCoeff() >= 0);
    sum += f * f.transpose();
  }
  CHECK(max_abs(sum - mix.values) <= 1e-15);

  std::mt19937_64 rng(57);
  check_kraus(one, rng);
  check_kraus(mix, rng);
}

TEST_CASE("DNN matrix from a WL pairing") {
  const Graph r = rook4_graph(), s = shrikhande_graph();
  const IsoMatrix m = build_dnn_choi_from_wl(r, s, wl_equivalent(r, s));
  REQUIRE(m.exact);
  CHECK(m.values.rows() == 256);
  const Report rep = verify_iso_matrix(m, r, s, Cone::dnn);
  CHECK(rep.passed());
  for (const char* name : {"block_sums_g", "block_sums_h", "zero_pattern", "symmetry", "nonnegative"}) {
    CHECK(rep.at(name).exact);
    CHECK(rep.at(name).residual == 0);
  }
  CHECK(rep.at("psd").residual <= 1e-8);

  const Report mp = verify_map_properties(m, r, s);
  CHECK(mp.passed());
  for (const auto& c : mp.checks) CHECK_MESSAGE(c.residual <= 1e-10, c.name);

  std::mt19937_64 rng(58);
  check_kraus(m, rng);
}

TEST_CASE("DNN matrix of a graph with itself projects onto its coherent algebra") {
  const Graph g = named_graph("dist_power(cycle(8),2,3)");
  const WLResult wl = wl_equivalent(g, g);
  const IsoMatrix m = build_dnn_choi_from_wl(g, g, wl);
  std::mt19937_64 rng(59);
  const Eigen::MatrixXd x = random_symmetric(8, rng);
  const Eigen::MatrixXd px = apply_map(m, x);
  CHECK(max_abs(apply_map(m, px) - px) <= 1e-12);
  for (int i = 0; i < wl.basis_g->dimension(); ++i) {
    const Eigen::MatrixXd a = to_double(wl.basis_g->matrix(i));
    CHECK(max_abs(apply_map(m, a) - a) <= 1e-12);
  }
  // Phi(X) is constant on every class.
  bool constant = true;
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v)
      for (int u2 = 0; u2 < 8; ++u2)
        for (int v2 = 0; v2 < 8; ++v2)
          if (wl.basis_g->class_of(u, v) == wl.basis_g->class_of(u2, v2))
            constant = constant && std::abs(px(u, v) - px(u2, v2)) <= 1e-12;
  CHECK(constant);
}

TEST_CASE("quantum certificates") {
  std::mt19937_64 rng(60);
  const Graph g = cycle_graph(5);
  const auto perm = oracle::random_permutation(5, rng);
  const Graph h = g.relabeled(perm);
  const QuantumCertificate cert = classical_certificate(g, h, perm);
  CHECK(cert.dimension() == 1);
  const Report ok = verify_quantum_certificate(cert, g, h);
  CHECK(ok.passed());
  CHECK(ok.has("matrix.zero_pattern"));
  CHECK(iso_matrix_from_certificate(cert).values == from_maps(g, h, {perm}).values);

  QuantumCertificate noisy = cert;
  noisy.projectors[0](0, 0) += 1e-3;
  const Report bad = verify_quantum_certificate(noisy, g, h);
  CHECK_FALSE(bad.passed());
  CHECK_FALSE(bad.at("projectors").passed);
  CHECK_FALSE(bad.has("matrix.zero_pattern"));

  // K2 against two isolated vertices: P00 = P11 = p, P01 = P10 = I - p
  // with p a rank one projector. Rows and columns sum to I, but P00 P11
  // sits on a pair that is adjacent in one graph only.
  QuantumCertificate twisted;
  twisted.ng = twisted.nh = 2;
  Eigen::MatrixXd p(2, 2);
  p << 1, 0, 0, 0;
  const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2) - p;
  twisted.projectors = {p, q, q, p};
  const Report tw = verify_quantum_certificate(twisted, complete_graph(2), empty_graph(2));
  CHECK(tw.at("projectors").passed);
  CHECK(tw.at("row_sums").passed);
  CHECK(tw.at("column_sums").passed);
  CHECK_FALSE(tw.at("orthogonality").passed);
  CHECK(tw.failures() == std::vector<std::string>{"orthogonality"});

  QuantumCertificate mixed = cert;
  mixed.projectors[3] = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(verify_quantum_certificate(mixed, g, h), std::invalid_argument);
}

TEST_CASE("zero pattern holds exactly when the Schur conditions hold") {
  std::mt19937_64 rng(61);
  std::bernoulli_distribution coin(0.5);
  int pattern_true = 0, pattern_false = 0;
  for (int t = 0; t < 60; ++t) {
    const int ng = 2 + t % 3, nh = 2 + (t / 3) % 3;
    const Graph g = oracle::random_graph(ng, 0.5, rng), h = oracle::random_graph(nh, 0.5, rng);
    Eigen::MatrixXd m = random_symmetric(ng * nh, rng);
    // Half of the instances keep only rel-matched entries.
    if (coin(rng)) {
      for (int a = 0; a < ng * nh; ++a)
        for (int b = 0; b < ng * nh; ++b)
          if (rel(g, a / nh, b / nh) != rel(h, a % nh, b % nh)) m(a, b) = 0;
    }
    const IsoMatrix im = make_iso_matrix(m, ng, nh);
    const bool pattern = verify_iso_matrix(im, g, h, Cone::psd).at("zero_pattern").passed;
    (pattern ? pattern_true : pattern_false)++;
    CHECK(pattern == schur_conditions_hold(im, g, h, rng));
  }
  CHECK(pattern_true > 0);
  CHECK(pattern_false > 0);
}

TEST_CASE("block sums of a Gram matrix are one exactly when the row sums share a unit vector") {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 20; ++t) {
    const int nx = 2 + t % 2, ny = 2 + (t / 2) % 2, dim = 4;
    std::vector<Eigen::VectorXd> v(nx * ny);
    for (auto& x : v) x = random_matrix(dim, 1, rng).col(0);
    const bool make_common = t % 2 == 0;
    if (make_common) {
      Eigen::VectorXd u = random_matrix(dim, 1, rng).col(0);
      u.normalize();
      for (int x = 0; x < nx; ++x) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(dim);
        for (int y = 0; y + 1 < ny; ++y) s += v[x * ny + y];
        v[x * ny + ny - 1] = u - s;
      }
    }
    Eigen::MatrixXd gram(nx * ny, nx * ny);
    for (int a = 0; a < nx * ny; ++a)
      for (int b = 0; b < nx * ny; ++b) gram(a, b) = v[a].dot(v[b]);
    double dev = 0;
    for (int x = 0; x < nx; ++x)
      for (int x2 = 0; x2 < nx; ++x2)
        dev = std::max(dev, std::abs(gram.block(x * ny, x2 * ny, ny, ny).sum() - 1));
    CHECK((dev <= 1e-10) == make_common);

    // Recover vectors from the Gram matrix alone and test for a common sum.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::MatrixXd f =
        (es.eigenvectors() * es.eigenvalues().cwiseMax(0).cwiseSqrt().asDiagonal()).transpose();
    std::vector<Eigen::VectorXd> sums;
    for (int x = 0; x < nx; ++x) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(f.rows());
      for (int y = 0; y < ny; ++y) s += f.col(x * ny + y);
      sums.push_back(s);
    }
    // Square roots of rounding-level eigenvalues are near 1e-8, hence 1e-6.
    bool common = std::abs(sums[0].norm() - 1) <= 1e-6;
    for (const auto& s : sums) common = common && (s - sums[0]).norm() <= 1e-6;
    CHECK(common == make_common);
  }
}

TEST_CASE("doubly stochastic matrices keep values apart") {
  // D = P_sigma * sum_k w_k P_k with each P_k fixing u, so v = D u is a
  // rearrangement of u; then D_ij = 0 whenever v_i != u_j.
  std::mt19937_64 rng(63);
  std::uniform_int_distribution<int> value(0, 2), weight(1, 5);
  for (int t = 0; t < 40; ++t) {
    const int d = 2 + t % 5;
    std::vector<int> u(d);
    for (auto& x : u) x = value(rng);
    RatMatrix mix(d, d);
    Rational total = 0;
    std::vector<Rational> ws;
    std::vector<std::vector<int>> perms;
    for (int k = 0; k < 3; ++k) {
      auto p = oracle::random_permutation(d, rng);
      // Keep only moves inside equal-value groups of u.
      std::vector<int> fixed(d);
      for (int i = 0; i < d; ++i) fixed[i] = u[p[i]] == u[i] ? p[i] : -1;
      std::vector<bool> used(d, false);
      for (int i = 0; i < d; ++i)
        if (fixed[i] >= 0) used[fixed[i]] = true;
      for (int i = 0; i < d; ++i)
        if (fixed[i] < 0) {
          int j = 0;
          while (used[j] || u[j] != u[i]) ++j;
          fixed[i] = j;
          used[j] = true;
        }
      perms.push_back(fixed);
      ws.emplace_back(weight(rng));
      total += ws.back();
    }
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < d; ++i) mix(i, perms[k][i]) += ws[k] / total;
    const auto sigma = oracle::random_permutation(d, rng);
    RatMatrix dm(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) dm(sigma[i], j) = mix(i, j);
    std::vector<Rational> v(d, Rational(0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v[i] += dm(i, j) * u[j];
    std::vector<Rational> su(u.begin(), u.end()), sv = v;
    std::sort(su.begin(), su.end());
    std::sort(sv.begin(), sv.end());
    REQUIRE(su == sv);
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      Rational row = 0, col = 0;
      for (int j = 0; j < d; ++j) {
        row += dm(i, j);
        col += dm(j, i);
        if (v[i] != u[j]) ok = ok && dm(i, j) == 0;
      }
      ok = ok && row == 1 && col == 1;
    }
    CHECK(ok);
  }
}

TEST_CASE("report accessors") {
  Report r;
  r.add("a", 0.5, 1.0);
  r.add_exact("b", Rational(0));
  r.add_exact("c", Rational(1, 3));
  CHECK(r.at("a").passed);
  CHECK(r.at("b").passed);
  CHECK_FALSE(r.at("c").passed);
  CHECK(r.failures() == std::vector<std::string>{"c"});
  CHECK_THROWS_AS(r.at("missing"), std::out_of_range);
  CHECK(r.to_json()["checks"].size() == 3);
  CHECK_FALSE(r.to_json()["passed"].get<bool>());
}

}  // TEST_SUITE
