#include <doctest.h>

#include <algorithm>
#include <random>

#include "coniso/graph.hpp"
#include "oracles.hpp"

using namespace coniso;

namespace {

const char* kNamed[] = {"q4", "hoffman", "shrikhande", "rook4", "cycle(5)", "cycle(6)",
                        "union(cycle(3),cycle(3))", "dist_power(cycle(10),1,2)",
                        "dist_power(cycle(8),2,3)", "complete(5)", "empty(4)", "path(4)"};

bool is_regular(const Graph& g, int k) {
  for (int v = 0; v < g.order(); ++v)
    if (g.degree(v) != k) return false;
  return true;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("rel on the 4-cycle") {
  const Graph c4 = cycle_graph(4);
  CHECK(rel(c4, 0, 0) == RelKind::equal);
  CHECK(rel(c4, 0, 1) == RelKind::adjacent);
  CHECK(rel(c4, 0, 2) == RelKind::distinct_non_adjacent);
  CHECK_THROWS_AS(rel(c4, 0, 4), GraphError);
}

TEST_CASE("complement") {
  CHECK(complement(complete_graph(3)) == empty_graph(3));
  CHECK(exact_isomorphism(complement(cycle_graph(5)), cycle_graph(5)).has_value());
  CHECK(oracle::brute_isomorphic(complement(cycle_graph(5)), cycle_graph(5)));

  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    const Graph g = oracle::random_graph(1 + t % 8, 0.5, rng);
    CHECK(complement(complement(g)) == g);
    CHECK(g.size() + complement(g).size() ==
          static_cast<std::size_t>(g.order() * (g.order() - 1) / 2));
  }
}

TEST_CASE("cartesian product") {
  const Graph kk = cartesian_product(complete_graph(4), complete_graph(4));
  CHECK(kk.order() == 16);
  CHECK(is_regular(kk, 6));
  CHECK(exact_isomorphism(kk, rook4_graph()).has_value());

  const Graph k2k2 = cartesian_product(complete_graph(2), complete_graph(2));
  CHECK(k2k2.size() == 4);
  CHECK(oracle::brute_isomorphic(k2k2, cycle_graph(4)));

  std::mt19937_64 rng(5);
  const Graph h = oracle::random_graph(6, 0.4, rng);
  CHECK(cartesian_product(complete_graph(1), h) == h);
}

TEST_CASE("isomorphism product") {
  CHECK(oracle::brute_isomorphic(isomorphism_product(complete_graph(2), complete_graph(2)),
                                 cycle_graph(4)));
  CHECK(isomorphism_product(complete_graph(1), complete_graph(1)) == empty_graph(1));

  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const Graph g = oracle::random_graph(1 + t % 6, 0.5, rng);
    const Graph h = oracle::random_graph(1 + (t * 7) % 6, 0.5, rng);
    const Graph p = isomorphism_product(g, h);
    REQUIRE(p.order() == g.order() * h.order());
    const int nh = h.order();
    bool ok = true;
    for (int a = 0; a < p.order(); ++a)
      for (int b = 0; b < p.order(); ++b) {
        if (a == b) continue;
        const bool mismatch = rel(g, a / nh, b / nh) != rel(h, a % nh, b % nh);
        ok = ok && p.adjacent(a, b) == mismatch;
      }
    CHECK(ok);
  }
}

TEST_CASE("isomorphism product is symmetric under the coordinate swap") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 6; ++t) {
    const Graph g = oracle::random_graph(2 + t % 3, 0.5, rng);
    const Graph h = oracle::random_graph(2 + (t + 1) % 3, 0.5, rng);
    const Graph gh = isomorphism_product(g, h), hg = isomorphism_product(h, g);
    Permutation swap(gh.order());
    for (int a = 0; a < g.order(); ++a)
      for (int b = 0; b < h.order(); ++b) swap[a * h.order() + b] = b * g.order() + a;
    CHECK(is_isomorphism(gh, hg, swap));
    CHECK(exact_isomorphism(gh, hg).has_value());
  }
}

TEST_CASE("rows and columns of V_G x V_H colour the complement of the product") {
  // Each row {(g, h) : h in V_H} and each column is a clique of G <> H, so
  // both partitions are proper colourings of its complement.
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const Graph g = oracle::random_graph(2 + t % 4, 0.5, rng);
    const Graph h = oracle::random_graph(2 + (t + 2) % 4, 0.5, rng);
    const Graph q = complement(isomorphism_product(g, h));
    const int ng = g.order(), nh = h.order();
    bool rows = true, cols = true;
    for (int a = 0; a < ng; ++a)
      for (int b = 0; b < nh; ++b)
        for (int c = b + 1; c < nh; ++c) rows = rows && !q.adjacent(a * nh + b, a * nh + c);
    for (int b = 0; b < nh; ++b)
      for (int a = 0; a < ng; ++a)
        for (int c = a + 1; c < ng; ++c) cols = cols && !q.adjacent(a * nh + b, c * nh + b);
    CHECK(rows);
    CHECK(cols);
  }
}

TEST_CASE("distance matrices") {
  const auto k3 = distance_matrices(complete_graph(3));
  REQUIRE(k3.size() == 2);
  CHECK(k3[0] == IntMatrix::identity(3));
  CHECK(k3[1] == IntMatrix::ones(3, 3) - IntMatrix::identity(3));

  const Graph c5 = cycle_graph(5);
  const auto d5 = distance_matrices(c5);
  REQUIRE(d5.size() == 3);
  CHECK(d5[1] == c5.adjacency());
  CHECK(d5[2] == IntMatrix::ones(5, 5) - IntMatrix::identity(5) - c5.adjacency());

  std::mt19937_64 rng(3);
  for (int t = 0; t < 40; ++t) {
    const Graph g = oracle::random_graph(2 + t % 7, 0.45, rng);
    const int n = g.order();
    CHECK(distance_table(g) == oracle::floyd_distances(g));
    const auto xs = distance_matrices(g);
    REQUIRE(!xs.empty());
    CHECK(xs[0] == IntMatrix::identity(n));
    if (xs.size() > 1) CHECK(xs[1] == g.adjacency());
    IntMatrix total(n, n);
    for (std::size_t l = 0; l < xs.size(); ++l) {
      total += xs[l];
      for (std::size_t k = 0; k < xs.size(); ++k)
        CHECK(schur(xs[l], xs[k]) == (l == k ? xs[l] : IntMatrix(n, n)));
    }
    const auto far = oracle::floyd_distances(g)[0];
    const bool connected = std::ranges::none_of(far, [](int d) { return d < 0; });
    if (connected) CHECK(total == IntMatrix::ones(n, n));
  }
}

TEST_CASE("named graphs") {
  const Graph q4 = named_graph("q4");
  CHECK(q4.order() == 16);
  CHECK(q4.size() == 32);
  CHECK(is_regular(q4, 4));

  const Graph sh = named_graph("shrikhande");
  CHECK(sh.order() == 16);
  CHECK(sh.size() == 48);
  CHECK(is_regular(sh, 6));

  const Graph hf = named_graph("hoffman");
  CHECK(hf.order() == 16);
  CHECK(hf.size() == 32);
  CHECK(is_regular(hf, 4));

  const Graph c10 = named_graph("dist_power(cycle(10),1,2)");
  CHECK(c10.order() == 10);
  CHECK(is_regular(c10, 4));
  for (int v = 0; v < 10; ++v) {
    CHECK(c10.adjacent(v, (v + 1) % 10));
    CHECK(c10.adjacent(v, (v + 2) % 10));
    CHECK_FALSE(c10.adjacent(v, (v + 3) % 10));
  }

  CHECK(named_graph("union(cycle(3),cycle(3))").size() == 6);
  CHECK_THROWS_AS(named_graph("bogus"), GraphError);
  CHECK_THROWS_AS(named_graph("cycle(2)"), GraphError);
  CHECK_THROWS_AS(named_graph("cycle(4"), GraphError);
}

TEST_CASE("shrikhande and rook4 are strongly regular with parameters (16,6,2,2)") {
  for (const Graph& g : {shrikhande_graph(), rook4_graph()}) {
    bool ok = true;
    for (int u = 0; u < 16; ++u)
      for (int v = u + 1; v < 16; ++v) {
        int common = 0;
        for (int w = 0; w < 16; ++w) common += g.adjacent(u, w) && g.adjacent(v, w);
        ok = ok && common == 2;
      }
    CHECK(ok);
  }
}

TEST_CASE("exact isomorphism") {
  std::mt19937_64 rng(99);
  for (const char* name : kNamed) {
    const Graph g = named_graph(name);
    const auto f = exact_isomorphism(g, g);
    REQUIRE(f);
    Permutation id(g.order());
    for (int i = 0; i < g.order(); ++i) id[i] = i;
    CHECK(*f == id);
  }
  CHECK_FALSE(exact_isomorphism(hypercube_q4(), hoffman_graph()).has_value());
  CHECK_FALSE(exact_isomorphism(rook4_graph(), shrikhande_graph()).has_value());

  const Graph c6 = cycle_graph(6);
  const auto perm = oracle::random_permutation(6, rng);
  const Graph r = c6.relabeled(perm);
  const auto f = exact_isomorphism(c6, r);
  REQUIRE(f);
  CHECK(is_isomorphism(c6, r, *f));

  for (int t = 0; t < 60; ++t) {
    const Graph g = oracle::random_graph(2 + t % 6, 0.5, rng);
    const Graph h = t % 2 ? g.relabeled(oracle::random_permutation(g.order(), rng))
                          : oracle::random_graph(g.order(), 0.5, rng);
    const auto found = exact_isomorphism(g, h);
    CHECK(found.has_value() == oracle::brute_isomorphic(g, h));
    if (found) CHECK(is_isomorphism(g, h, *found));
  }
}

TEST_CASE("exact isomorphism returns the least bijection") {
  // Automorphisms of C5 listed in lexicographic order by the oracle.
  const Graph c5 = cycle_graph(5);
  const auto autos = oracle::brute_automorphisms(c5);
  REQUIRE(autos.size() == 10);
  const auto f = exact_isomorphism(c5, c5);
  REQUIRE(f);
  CHECK(*f == autos.front());
}

TEST_CASE("cliques and independence") {
  CHECK(contains_clique(rook4_graph(), 4));
  CHECK_FALSE(contains_clique(shrikhande_graph(), 4));
  CHECK(contains_clique(complete_graph(5), 5));
  CHECK_FALSE(contains_clique(complete_graph(5), 6));

  std::mt19937_64 rng(4);
  for (int t = 0; t < 40; ++t) {
    const Graph g = oracle::random_graph(3 + t % 6, 0.5, rng);
    for (int k = 1; k <= 4; ++k) CHECK(contains_clique(g, k) == oracle::brute_has_clique(g, k));
    CHECK(independence_number(g) == oracle::brute_independence_number(g));
  }
}

TEST_CASE("parse and serialize") {
  const Graph p3 = parse_graph("3 2\n0 1\n1 2");
  CHECK(p3 == path_graph(3));
  CHECK_THROWS_AS(parse_graph("2 1\n0 0"), GraphError);
  CHECK_THROWS_AS(parse_graph("2 1\n0 1\n0 1"), GraphError);
  CHECK_THROWS_AS(parse_graph("2 1\n0 2"), GraphError);
  CHECK_THROWS_AS(parse_graph("3 2\n0 1"), GraphError);
  CHECK(parse_graph("3 1\n2 0") == Graph(3, std::vector<Edge>{{0, 2}}));

  for (const char* name : kNamed) {
    const Graph g = named_graph(name);
    const std::string text = serialize_graph(g);
    CHECK(parse_graph(text) == g);
    CHECK(serialize_graph(parse_graph(text)) == text);
  }
}

TEST_CASE("adjacency matrix validation") {
  IntMatrix a(2, 2);
  a(0, 1) = 1;
  CHECK_THROWS_AS(Graph::from_adjacency(a), GraphError);
  a(1, 0) = 1;
  CHECK(Graph::from_adjacency(a) == complete_graph(2));
  a(0, 0) = 1;
  CHECK_THROWS_AS(Graph::from_adjacency(a), GraphError);
}

TEST_CASE("colour refinement is invariant under relabelling") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const Graph g = oracle::random_graph(3 + t % 6, 0.4, rng);
    const auto perm = oracle::random_permutation(g.order(), rng);
    const Graph h = g.relabeled(perm);
    const Graph* both[] = {&g, &h};
    const auto colors = refine_vertex_colors(both);
    bool ok = true;
    for (int v = 0; v < g.order(); ++v) ok = ok && colors[0][v] == colors[1][perm[v]];
    CHECK(ok);
  }
}

}  // TEST_SUITE
