#include "coniso/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <variant>

namespace coniso {

// ---------------------------------------------------------------------------
// Graph

Graph::Graph(int n) : n_(n) {
  if (n < 0) throw GraphError("negative vertex count");
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
}

Graph::Graph(int n, std::span<const Edge> edges) : Graph(n) {
  edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
    auto& cell = adj_[static_cast<std::size_t>(u) * n_ + v];
    if (cell) {
      throw GraphError("duplicate edge " + std::to_string(u) + " " + std::to_string(v));
    }
    cell = 1;
    adj_[static_cast<std::size_t>(v) * n_ + u] = 1;
    edges_.emplace_back(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
}

Graph Graph::from_adjacency(const IntMatrix& a) {
  if (!a.square()) throw GraphError("adjacency matrix must be square");
  const int n = static_cast<int>(a.rows());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    if (a(i, i) != 0) throw GraphError("adjacency matrix has a nonzero diagonal");
    for (int j = i + 1; j < n; ++j) {
      if (a(i, j) != a(j, i)) throw GraphError("adjacency matrix is not symmetric");
      if (a(i, j) == 1) {
        edges.emplace_back(i, j);
      } else if (a(i, j) != 0) {
        throw GraphError("adjacency matrix is not 01");
      }
    }
  }
  return Graph(n, edges);
}

void Graph::check_vertex(int v) const {
  if (v < 0 || v >= n_) {
    throw GraphError("vertex index " + std::to_string(v) + " out of range [0, " +
                     std::to_string(n_) + ")");
  }
}

int Graph::degree(int v) const {
  check_vertex(v);
  int d = 0;
  for (int u = 0; u < n_; ++u) d += adjacent(v, u);
  return d;
}

std::vector<int> Graph::neighbors(int v) const {
  check_vertex(v);
  std::vector<int> out;
  for (int u = 0; u < n_; ++u)
    if (adjacent(v, u)) out.push_back(u);
  return out;
}

IntMatrix Graph::adjacency() const {
  IntMatrix a(n_, n_);
  for (auto [u, v] : edges_) a(u, v) = a(v, u) = 1;
  return a;
}

Eigen::MatrixXd Graph::adjacency_real() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (auto [u, v] : edges_) a(u, v) = a(v, u) = 1.0;
  return a;
}

Graph Graph::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw GraphError("relabel: wrong permutation size");
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (auto [u, v] : edges_) edges.emplace_back(perm[u], perm[v]);
  return Graph(n_, edges);
}

// ---------------------------------------------------------------------------
// Relations and products

RelKind rel(const Graph& g, int u, int v) {
  if (u < 0 || v < 0 || u >= g.order() || v >= g.order())
    throw GraphError("rel: vertex index out of range");
  if (u == v) return RelKind::equal;
  return g.adjacent(u, v) ? RelKind::adjacent : RelKind::distinct_non_adjacent;
}

std::string_view to_string(RelKind kind) {
  switch (kind) {
    case RelKind::equal: return "equal";
    case RelKind::adjacent: return "adjacent";
    case RelKind::distinct_non_adjacent: return "distinct-non-adjacent";
  }
  return "?";
}

Graph complement(const Graph& g) {
  std::vector<Edge> edges;
  for (int u = 0; u < g.order(); ++u)
    for (int v = u + 1; v < g.order(); ++v)
      if (!g.adjacent(u, v)) edges.emplace_back(u, v);
  return Graph(g.order(), edges);
}

Graph disjoint_union(const Graph& g, const Graph& h) {
  std::vector<Edge> edges = g.edges();
  for (auto [u, v] : h.edges()) edges.emplace_back(u + g.order(), v + g.order());
  return Graph(g.order() + h.order(), edges);
}

namespace {

template <typename Adjacent>
Graph product_graph(const Graph& g, const Graph& h, Adjacent&& adjacent) {
  const int m = h.order();
  const int total = g.order() * m;
  std::vector<Edge> edges;
  for (int a = 0; a < total; ++a)
    for (int b = a + 1; b < total; ++b)
      if (adjacent(a / m, a % m, b / m, b % m)) edges.emplace_back(a, b);
  return Graph(total, edges);
}

}  // namespace

Graph cartesian_product(const Graph& g, const Graph& h) {
  return product_graph(g, h, [&](int g1, int h1, int g2, int h2) {
    return (g1 == g2 && h.adjacent(h1, h2)) || (g.adjacent(g1, g2) && h1 == h2);
  });
}

Graph isomorphism_product(const Graph& g, const Graph& h) {
  return product_graph(g, h, [&](int g1, int h1, int g2, int h2) {
    return rel(g, g1, g2) != rel(h, h1, h2);
  });
}

std::vector<std::vector<int>> distance_table(const Graph& g) {
  const int n = g.order();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  std::vector<std::vector<int>> nbrs(n);
  for (int v = 0; v < n; ++v) nbrs[v] = g.neighbors(v);
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    dist[s][s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : nbrs[u]) {
        if (dist[s][w] < 0) {
          dist[s][w] = dist[s][u] + 1;
          q.push(w);
        }
      }
    }
  }
  return dist;
}

std::vector<IntMatrix> distance_matrices(const Graph& g) {
  const int n = g.order();
  auto dist = distance_table(g);
  int diam = 0;
  for (const auto& row : dist)
    for (int d : row) diam = std::max(diam, d);
  std::vector<IntMatrix> out;
  for (int l = 0; l <= diam && n > 0; ++l) out.emplace_back(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (dist[u][v] >= 0) out[dist[u][v]](u, v) = 1;
  return out;
}

Graph distance_power(const Graph& base, std::span<const int> distances) {
  for (int d : distances)
    if (d < 1) throw GraphError("dist_power: distances must be positive");
  auto dist = distance_table(base);
  std::vector<Edge> edges;
  for (int u = 0; u < base.order(); ++u)
    for (int v = u + 1; v < base.order(); ++v)
      if (std::find(distances.begin(), distances.end(), dist[u][v]) != distances.end())
        edges.emplace_back(u, v);
  return Graph(base.order(), edges);
}

// ---------------------------------------------------------------------------
// Named graphs

Graph cycle_graph(int n) {
  if (n < 3) throw GraphError("cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

Graph complete_graph(int n) {
  if (n < 1) throw GraphError("complete graph needs at least 1 vertex");
  return complement(Graph(n));
}

Graph empty_graph(int n) {
  if (n < 0) throw GraphError("negative vertex count");
  return Graph(n);
}

Graph path_graph(int n) {
  if (n < 1) throw GraphError("path needs at least 1 vertex");
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, edges);
}

Graph hypercube_q4() {
  std::vector<Edge> edges;
  for (int u = 0; u < 16; ++u)
    for (int b = 0; b < 4; ++b)
      if (int v = u ^ (1 << b); u < v) edges.emplace_back(u, v);
  return Graph(16, edges);
}

Graph hoffman_graph() {
  // Godsil-McKay switch of the 4-cube; properties are asserted in the tests.
  static constexpr Edge kEdges[] = {
      {0, 1},  {0, 7},   {0, 11},  {0, 13},  {1, 3},   {1, 5},   {1, 9},   {2, 5},
      {2, 6},  {2, 9},   {2, 10},  {3, 13},  {3, 4},   {4, 6},   {4, 9},   {4, 12},
      {5, 11}, {6, 7},   {6, 14},  {7, 15},  {3, 8},   {5, 8},   {8, 10},  {8, 12},
      {7, 9},  {10, 11}, {10, 14}, {11, 15}, {12, 13}, {12, 14}, {13, 15}, {14, 15}};
  return Graph(16, kEdges);
}

Graph shrikhande_graph() {
  static constexpr std::pair<int, int> kSteps[] = {{1, 0}, {3, 0}, {0, 1},
                                                   {0, 3}, {1, 1}, {3, 3}};
  std::vector<Edge> edges;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (auto [da, db] : kSteps) {
        int u = 4 * a + b;
        int v = 4 * ((a + da) % 4) + (b + db) % 4;
        if (u < v) edges.emplace_back(u, v);
      }
  return Graph(16, edges);
}

Graph rook4_graph() { return cartesian_product(complete_graph(4), complete_graph(4)); }

namespace {

struct SpecNode {
  std::string name;
  std::vector<std::variant<long, SpecNode>> args;
};

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  SpecNode parse() {
    SpecNode node = parse_node();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  SpecNode parse_node() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a graph name");
    SpecNode node{std::string(text_.substr(start, pos_ - start)), {}};
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      while (true) {
        skip_space();
        if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                    text_[pos_] == '-')) {
          long value = 0;
          auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
          if (ec != std::errc()) fail("bad integer");
          pos_ = static_cast<std::size_t>(ptr - text_.data());
          node.args.emplace_back(value);
        } else {
          node.args.emplace_back(parse_node());
        }
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < text_.size() && text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return node;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw GraphError("graph spec '" + std::string(text_) + "': " + what + " at offset " +
                     std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Graph build(const SpecNode& node);

int int_arg(const SpecNode& node, std::size_t i) {
  if (i >= node.args.size() || !std::holds_alternative<long>(node.args[i]))
    throw GraphError(node.name + ": expected integer argument " + std::to_string(i + 1));
  long v = std::get<long>(node.args[i]);
  if (v < 0 || v > 4096) throw GraphError(node.name + ": parameter out of range");
  return static_cast<int>(v);
}

Graph graph_arg(const SpecNode& node, std::size_t i) {
  if (i >= node.args.size()) throw GraphError(node.name + ": missing graph argument");
  if (const auto* sub = std::get_if<SpecNode>(&node.args[i])) return build(*sub);
  throw GraphError(node.name + ": expected graph argument " + std::to_string(i + 1));
}

void expect_arity(const SpecNode& node, std::size_t n) {
  if (node.args.size() != n)
    throw GraphError(node.name + ": expected " + std::to_string(n) + " argument(s)");
}

Graph build(const SpecNode& node) {
  const std::string& name = node.name;
  if (name == "q4") return expect_arity(node, 0), hypercube_q4();
  if (name == "hoffman") return expect_arity(node, 0), hoffman_graph();
  if (name == "shrikhande") return expect_arity(node, 0), shrikhande_graph();
  if (name == "rook4") return expect_arity(node, 0), rook4_graph();
  if (name == "cycle") return expect_arity(node, 1), cycle_graph(int_arg(node, 0));
  if (name == "complete") return expect_arity(node, 1), complete_graph(int_arg(node, 0));
  if (name == "empty") return expect_arity(node, 1), empty_graph(int_arg(node, 0));
  if (name == "path") return expect_arity(node, 1), path_graph(int_arg(node, 0));
  if (name == "complement") return expect_arity(node, 1), complement(graph_arg(node, 0));
  if (name == "union") {
    expect_arity(node, 2);
    return disjoint_union(graph_arg(node, 0), graph_arg(node, 1));
  }
  if (name == "cartesian") {
    expect_arity(node, 2);
    return cartesian_product(graph_arg(node, 0), graph_arg(node, 1));
  }
  if (name == "isoproduct") {
    expect_arity(node, 2);
    return isomorphism_product(graph_arg(node, 0), graph_arg(node, 1));
  }
  if (name == "dist_power") {
    if (node.args.size() < 2) throw GraphError("dist_power: needs a base graph and distances");
    Graph base = graph_arg(node, 0);
    std::vector<int> ds;
    for (std::size_t i = 1; i < node.args.size(); ++i) ds.push_back(int_arg(node, i));
    return distance_power(base, ds);
  }
  throw GraphError("unknown graph name '" + name + "'");
}

}  // namespace

Graph named_graph(std::string_view spec) { return build(SpecParser(spec).parse()); }

std::string named_graph_help() {
  return "q4, hoffman, shrikhande, rook4, cycle(n), complete(n), empty(n), path(n), "
         "complement(G), union(G,H), cartesian(G,H), isoproduct(G,H), "
         "dist_power(G,d1,d2,...)";
}

// ---------------------------------------------------------------------------
// Colour refinement and exact isomorphism

std::vector<std::vector<int>> refine_vertex_colors(std::span<const Graph* const> graphs,
                                                   std::span<const std::vector<int>> initial) {
  std::vector<std::vector<int>> colors(graphs.size());
  std::vector<std::vector<std::vector<int>>> nbrs(graphs.size());
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const int n = graphs[k]->order();
    colors[k] = initial.empty() ? std::vector<int>(n, 0) : initial[k];
    if (static_cast<int>(colors[k].size()) != n)
      throw GraphError("refine_vertex_colors: initial colouring has wrong size");
    nbrs[k].resize(n);
    for (int v = 0; v < n; ++v) nbrs[k][v] = graphs[k]->neighbors(v);
  }

  auto count_colors = [&] {
    std::vector<int> all;
    for (const auto& c : colors) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
  };

  std::size_t current = count_colors();
  while (true) {
    std::vector<std::vector<std::vector<int>>> sigs(graphs.size());
    std::map<std::vector<int>, int> palette;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
      const int n = graphs[k]->order();
      sigs[k].resize(n);
      for (int v = 0; v < n; ++v) {
        auto& s = sigs[k][v];
        s.reserve(nbrs[k][v].size() + 1);
        for (int u : nbrs[k][v]) s.push_back(colors[k][u]);
        std::sort(s.begin(), s.end());
        s.insert(s.begin(), colors[k][v]);
        palette.emplace(s, 0);
      }
    }
    int rank = 0;
    for (auto& [sig, id] : palette) id = rank++;
    for (std::size_t k = 0; k < graphs.size(); ++k)
      for (std::size_t v = 0; v < sigs[k].size(); ++v) colors[k][v] = palette.at(sigs[k][v]);
    std::size_t next = palette.size();
    if (next == current) break;
    current = next;
  }
  return colors;
}

bool is_isomorphism(const Graph& g, const Graph& h, std::span<const int> perm) {
  const int n = g.order();
  if (h.order() != n || static_cast<int>(perm.size()) != n || g.size() != h.size()) return false;
  std::vector<char> seen(n, 0);
  for (int x : perm) {
    if (x < 0 || x >= n || seen[x]) return false;
    seen[x] = 1;
  }
  for (auto [u, v] : g.edges())
    if (!h.adjacent(perm[u], perm[v])) return false;
  return true;
}

namespace {

bool same_histogram(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

class IsomorphismSearch {
 public:
  IsomorphismSearch(const Graph& g, const Graph& h)
      : g_(g), h_(h), n_(g.order()), map_(n_, -1), used_(n_, 0) {}

  std::optional<Permutation> run() {
    const Graph* gs[] = {&g_, &h_};
    auto colors = refine_vertex_colors(gs);
    if (!same_histogram(colors[0], colors[1])) return std::nullopt;
    if (search(0, colors[0], colors[1])) return map_;
    return std::nullopt;
  }

 private:
  bool consistent(int g, int h) const {
    for (int x = 0; x < g; ++x)
      if (g_.adjacent(g, x) != h_.adjacent(h, map_[x])) return false;
    return true;
  }

  bool search(int g, const std::vector<int>& cg, const std::vector<int>& ch) {
    if (g == n_) return true;
    for (int h = 0; h < n_; ++h) {
      if (used_[h] || cg[g] != ch[h] || !consistent(g, h)) continue;
      // Individualise g and h with a fresh common colour, then refine.
      const int fresh = *std::max_element(cg.begin(), cg.end()) + 1;
      std::vector<int> init[2] = {cg, ch};
      init[0][g] = fresh;
      init[1][h] = fresh;
      const Graph* gs[] = {&g_, &h_};
      auto refined = refine_vertex_colors(gs, init);
      if (!same_histogram(refined[0], refined[1])) continue;
      map_[g] = h;
      used_[h] = 1;
      if (search(g + 1, refined[0], refined[1])) return true;
      map_[g] = -1;
      used_[h] = 0;
    }
    return false;
  }

  const Graph& g_;
  const Graph& h_;
  int n_;
  Permutation map_;
  std::vector<char> used_;
};

}  // namespace

std::optional<Permutation> exact_isomorphism(const Graph& g, const Graph& h) {
  if (g.order() != h.order() || g.size() != h.size()) return std::nullopt;
  auto result = IsomorphismSearch(g, h).run();
  if (result && !is_isomorphism(g, h, *result))
    throw std::logic_error("exact_isomorphism produced an invalid map");
  return result;
}

namespace {

bool extend_clique(const Graph& g, std::vector<int>& candidates, int need) {
  if (need == 0) return true;
  if (static_cast<int>(candidates.size()) < need) return false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const int v = candidates[i];
    std::vector<int> next;
    for (std::size_t j = i + 1; j < candidates.size(); ++j)
      if (g.adjacent(v, candidates[j])) next.push_back(candidates[j]);
    if (extend_clique(g, next, need - 1)) return true;
    if (static_cast<int>(candidates.size() - i - 1) < need) break;
  }
  return false;
}

}  // namespace

bool contains_clique(const Graph& g, int k) {
  if (k < 1) throw GraphError("contains_clique: k must be positive");
  std::vector<int> candidates;
  for (int v = 0; v < g.order(); ++v)
    if (g.degree(v) >= k - 1) candidates.push_back(v);
  return extend_clique(g, candidates, k);
}

int independence_number(const Graph& g) {
  Graph c = complement(g);
  int best = 0;
  for (int k = 1; k <= g.order(); ++k) {
    if (!contains_clique(c, k)) break;
    best = k;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Edge-list text format

Graph parse_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  int n = -1;
  long m = -1;
  std::vector<Edge> edges;
  auto fail = [&](const std::string& what) -> GraphError {
    return GraphError("line " + std::to_string(lineno) + ": " + what);
  };
  auto read_ints = [&](const std::string& body, long& a, long& b) {
    std::istringstream ls(body);
    std::string extra;
    if (!(ls >> a >> b)) throw fail("expected two integers");
    if (ls >> extra) throw fail("unexpected token '" + extra + "'");
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    long a = 0, b = 0;
    read_ints(line, a, b);
    if (n < 0) {
      if (a < 0 || b < 0) throw fail("malformed header: counts must be nonnegative");
      if (a > 1'000'000) throw fail("malformed header: vertex count too large");
      n = static_cast<int>(a);
      m = b;
      continue;
    }
    if (a < 0 || a >= n || b < 0 || b >= n) throw fail("vertex index out of range");
    if (a == b) throw fail("self-loop at vertex " + std::to_string(a));
    edges.emplace_back(static_cast<int>(std::min(a, b)), static_cast<int>(std::max(a, b)));
    if (static_cast<long>(edges.size()) > m) throw fail("more edges than declared in header");
    auto it = std::find(edges.begin(), edges.end() - 1, edges.back());
    if (it != edges.end() - 1) throw fail("duplicate edge");
  }
  if (n < 0) throw GraphError("line " + std::to_string(lineno) + ": missing header 'n m'");
  if (static_cast<long>(edges.size()) != m)
    throw GraphError("line " + std::to_string(lineno) + ": header declares " + std::to_string(m) +
                     " edges but " + std::to_string(edges.size()) + " were given");
  return Graph(n, edges);
}

std::string serialize_graph(const Graph& g) {
  std::string out = std::to_string(g.order()) + " " + std::to_string(g.size()) + "\n";
  for (auto [u, v] : g.edges()) out += std::to_string(u) + " " + std::to_string(v) + "\n";
  return out;
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_graph(buf.str());
  } catch (const GraphError& e) {
    throw GraphError(path + ": " + e.what());
  }
}

void write_graph_file(const std::string& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphError("cannot write graph file '" + path + "'");
  out << serialize_graph(g);
}

}  // namespace coniso
