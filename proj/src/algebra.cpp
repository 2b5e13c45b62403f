#include "coniso/algebra.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

#include "coniso/spectral.hpp"

namespace coniso {

// ---------------------------------------------------------------------------
// Coherent bases

CoherentBasis::CoherentBasis(int n, std::vector<int> classes) : n_(n), cls_(std::move(classes)) {
  const std::size_t pairs = static_cast<std::size_t>(n) * n;
  if (cls_.size() != pairs) throw std::invalid_argument("CoherentBasis: wrong class table size");
  for (int c : cls_) {
    if (c < 0) throw std::invalid_argument("CoherentBasis: negative class id");
    d_ = std::max(d_, c + 1);
  }
  sizes_.assign(d_, 0);
  for (int c : cls_) sizes_[c]++;
  for (int i = 0; i < d_; ++i)
    if (sizes_[i] == 0) throw std::logic_error("CoherentBasis: class ids are not contiguous");

  // (iii) the diagonal is a union of classes.
  std::vector<char> on_diag(d_, 0);
  for (int x = 0; x < n; ++x) on_diag[class_of(x, x)] = 1;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y && on_diag[class_of(x, y)])
        throw std::logic_error("coherence violated: a diagonal class contains an off-diagonal pair");
  for (int i = 0; i < d_; ++i)
    if (on_diag[i]) diagonal_.push_back(i);

  // (iv) transposes of classes are classes.
  transpose_.assign(d_, -1);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int& t = transpose_[class_of(x, y)];
      if (t < 0) {
        t = class_of(y, x);
      } else if (t != class_of(y, x)) {
        throw std::logic_error("coherence violated: transpose of a class is not a class");
      }
    }

  // (v) the count of z with (x,z) in i and (z,y) in j is constant on each class.
  structure_.resize(d_);
  std::vector<char> seen(d_, 0);
  std::vector<std::int64_t> codes(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      for (int z = 0; z < n; ++z)
        codes[z] = static_cast<std::int64_t>(class_of(x, z)) * d_ + class_of(z, y);
      std::sort(codes.begin(), codes.end());
      std::vector<std::tuple<int, int, long>> row;
      for (int z = 0; z < n;) {
        int w = z;
        while (w < n && codes[w] == codes[z]) ++w;
        row.emplace_back(static_cast<int>(codes[z] / d_), static_cast<int>(codes[z] % d_), w - z);
        z = w;
      }
      const int k = class_of(x, y);
      if (!seen[k]) {
        structure_[k] = std::move(row);
        seen[k] = 1;
      } else if (structure_[k] != row) {
        throw std::logic_error("coherence violated: intersection numbers are not constant");
      }
    }
}

long CoherentBasis::intersection(int i, int j, int k) const {
  const auto& row = structure_.at(k);
  auto it = std::lower_bound(row.begin(), row.end(), std::make_tuple(i, j, 0L),
                             [](const auto& a, const auto& b) {
                               return std::tie(std::get<0>(a), std::get<1>(a)) <
                                      std::tie(std::get<0>(b), std::get<1>(b));
                             });
  if (it != row.end() && std::get<0>(*it) == i && std::get<1>(*it) == j) return std::get<2>(*it);
  return 0;
}

IntMatrix CoherentBasis::matrix(int i) const {
  IntMatrix m(n_, n_);
  for (int x = 0; x < n_; ++x)
    for (int y = 0; y < n_; ++y)
      if (class_of(x, y) == i) m(x, y) = 1;
  return m;
}

// ---------------------------------------------------------------------------
// 2-dimensional Weisfeiler-Leman

std::vector<PairColoring> refine_pair_colors(std::span<const Graph* const> graphs) {
  std::vector<PairColoring> out(graphs.size());
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = *graphs[k];
    const int n = g.order();
    out[k].n = n;
    out[k].colors.resize(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        out[k].colors[static_cast<std::size_t>(x) * n + y] = static_cast<int>(rel(g, x, y));
  }

  auto distinct = [&] {
    std::vector<int> all;
    for (const auto& pc : out) all.insert(all.end(), pc.colors.begin(), pc.colors.end());
    std::sort(all.begin(), all.end());
    return static_cast<int>(std::unique(all.begin(), all.end()) - all.begin());
  };
  int count = distinct();
  std::vector<int> history{count};

  while (true) {
    int palette = 0;
    for (const auto& pc : out)
      for (int c : pc.colors) palette = std::max(palette, c + 1);

    std::vector<std::vector<std::vector<std::int64_t>>> sigs(out.size());
    std::map<std::vector<std::int64_t>, int> ranks;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const int n = out[k].n;
      sigs[k].resize(static_cast<std::size_t>(n) * n);
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
          auto& s = sigs[k][static_cast<std::size_t>(x) * n + y];
          s.resize(n + 1);
          for (int z = 0; z < n; ++z)
            s[z + 1] = static_cast<std::int64_t>(out[k].at(x, z)) * palette + out[k].at(z, y);
          std::sort(s.begin() + 1, s.end());
          s[0] = out[k].at(x, y);
          ranks.emplace(s, 0);
        }
    }
    int r = 0;
    for (auto& [sig, id] : ranks) id = r++;
    for (std::size_t k = 0; k < out.size(); ++k)
      for (std::size_t p = 0; p < sigs[k].size(); ++p) out[k].colors[p] = ranks.at(sigs[k][p]);

    const int next = static_cast<int>(ranks.size());
    history.push_back(next);
    if (next == count) break;
    count = next;
  }
  for (auto& pc : out) pc.history = history;
  return out;
}

namespace {

// Renumbers colours by first occurrence in the pair enumeration.
std::vector<int> first_occurrence_classes(const PairColoring& pc, std::map<int, int>* color_to_class) {
  std::map<int, int> local;
  auto& table = color_to_class ? *color_to_class : local;
  std::vector<int> cls(pc.colors.size());
  for (std::size_t p = 0; p < pc.colors.size(); ++p) {
    auto [it, inserted] = table.emplace(pc.colors[p], static_cast<int>(table.size()));
    cls[p] = it->second;
  }
  return cls;
}

}  // namespace

std::pair<PairColoring, CoherentBasis> wl2_stabilize(const Graph& g) {
  const Graph* gs[] = {&g};
  auto colorings = refine_pair_colors(gs);
  CoherentBasis basis(g.order(), first_occurrence_classes(colorings[0], nullptr));
  return {std::move(colorings[0]), std::move(basis)};
}

WLResult wl_equivalent(const Graph& g, const Graph& h) {
  WLResult out;
  if (g.order() != h.order()) {
    out.verdict = make_verdict("dnn", false, "order-mismatch");
    out.verdict.certificate["orders"] = {g.order(), h.order()};
    return out;
  }
  const Graph* gs[] = {&g, &h};
  auto colorings = refine_pair_colors(gs);

  std::map<int, long> count_g, count_h;
  for (int c : colorings[0].colors) count_g[c]++;
  for (int c : colorings[1].colors) count_h[c]++;
  if (count_g != count_h) {
    out.verdict = make_verdict("dnn", false, "color-histogram");
    json diff = json::array();
    std::map<int, std::pair<long, long>> merged;
    for (auto [c, k] : count_g) merged[c].first = k;
    for (auto [c, k] : count_h) merged[c].second = k;
    for (auto [c, counts] : merged)
      if (counts.first != counts.second)
        diff.push_back({{"color", c}, {"G", counts.first}, {"H", counts.second}});
    out.verdict.certificate["differences"] = diff;
    out.verdict.certificate["rounds"] = colorings[0].history.size() - 1;
    return out;
  }

  std::map<int, int> color_g, color_h;
  CoherentBasis bg(g.order(), first_occurrence_classes(colorings[0], &color_g));
  CoherentBasis bh(h.order(), first_occurrence_classes(colorings[1], &color_h));
  const int d = bg.dimension();
  std::vector<int> f(d, -1);
  for (auto [color, i] : color_g) f[i] = color_h.at(color);

  // The pairing must send I and A_G to I and A_H.
  std::vector<int> rel_g(d, -1), rel_h(d, -1);
  for (int x = 0; x < g.order(); ++x)
    for (int y = 0; y < g.order(); ++y) {
      rel_g[bg.class_of(x, y)] = static_cast<int>(rel(g, x, y));
      rel_h[bh.class_of(x, y)] = static_cast<int>(rel(h, x, y));
    }
  for (int i = 0; i < d; ++i)
    if (rel_g[i] != rel_h[f[i]])
      throw std::logic_error("wl_equivalent: class pairing does not respect rel");

  for (int k = 0; k < d; ++k) {
    std::vector<std::tuple<int, int, long>> mapped;
    for (auto [i, j, p] : bg.structure(k)) mapped.emplace_back(f[i], f[j], p);
    std::sort(mapped.begin(), mapped.end());
    if (mapped != bh.structure(f[k]))
      throw std::logic_error("wl_equivalent: intersection numbers differ under the pairing");
  }

  out.verdict = make_verdict("dnn", true, "class-pairing");
  out.verdict.certificate["pairing"] = f;
  json sizes = json::array();
  for (int i = 0; i < d; ++i) sizes.push_back(bg.size(i));
  out.verdict.certificate["class_sizes"] = sizes;
  out.verdict.certificate["intersection_numbers_verified"] = true;
  out.verdict.dims = {{"G", d}, {"H", bh.dimension()}};
  out.basis_g = std::move(bg);
  out.basis_h = std::move(bh);
  out.pairing = std::move(f);
  return out;
}

// ---------------------------------------------------------------------------
// Partially coherent closure

std::string WordRecipe::describe() const {
  const auto w = [](int i) { return "W" + std::to_string(i); };
  switch (op) {
    case Op::identity: return "I";
    case Op::adjacency: return "A";
    case Op::ones: return "J";
    case Op::product: return w(lhs) + "*" + w(rhs);
    case Op::transpose: return w(lhs) + "^T";
    case Op::schur_identity: return "I.(" + w(lhs) + ")";
    case Op::schur_adjacency: return "A.(" + w(lhs) + ")";
  }
  return "?";
}

namespace {

struct ClosureSide {
  IntMatrix a;
  std::vector<IntMatrix> words;
  ExactSpan span;

  explicit ClosureSide(const Graph& g)
      : a(g.adjacency()), span(static_cast<std::size_t>(g.order()) * g.order()) {}

  IntMatrix build(const WordRecipe& r) const {
    using Op = WordRecipe::Op;
    const std::size_t n = a.rows();
    switch (r.op) {
      case Op::identity: return IntMatrix::identity(n);
      case Op::adjacency: return a;
      case Op::ones: return IntMatrix::ones(n, n);
      case Op::product: return words[r.lhs] * words[r.rhs];
      case Op::transpose: return words[r.lhs].transpose();
      case Op::schur_identity: return schur(IntMatrix::identity(n), words[r.lhs]);
      case Op::schur_adjacency: return schur(a, words[r.lhs]);
    }
    throw std::logic_error("unknown word operation");
  }
};

// Runs the closure on one graph, or on two graphs in lockstep. In lockstep
// mode every candidate's inner products with all stored words are compared
// across the two sides before it is accepted or discarded.
class ClosureEngine {
 public:
  ClosureEngine(const Graph& g, const Graph* h, ClosureOptions options) : options_(options) {
    sides_.emplace_back(g);
    if (h) sides_.emplace_back(*h);
  }

  bool run() {
    using Op = WordRecipe::Op;
    for (Op seed : {Op::identity, Op::adjacency, Op::ones})
      if (!offer({seed, -1, -1}, true)) return false;

    std::size_t frontier = 0;
    while (true) {
      ++passes_;
      const std::size_t snapshot = recipes_.size();
      for (std::size_t i = frontier; i < snapshot; ++i)
        for (Op op : {Op::transpose, Op::schur_identity, Op::schur_adjacency})
          if (!offer({op, static_cast<int>(i), -1}, false)) return false;
      for (std::size_t i = 0; i < snapshot; ++i)
        for (std::size_t j = 0; j < snapshot; ++j)
          if (std::max(i, j) >= frontier &&
              !offer({Op::product, static_cast<int>(i), static_cast<int>(j)}, false))
            return false;
      if (recipes_.size() == snapshot) break;
      frontier = snapshot;
    }
    closed_ = true;
    return true;
  }

  WordBasis basis(std::size_t side) const {
    const auto& s = sides_[side];
    WordBasis b;
    b.recipes = recipes_;
    b.words = s.words;
    b.independent = independent_;
    b.dimension = s.span.rank();
    b.passes = passes_;
    b.closed = closed_;
    b.gram = IntMatrix(s.words.size(), s.words.size());
    for (std::size_t i = 0; i < s.words.size(); ++i)
      for (std::size_t j = i; j < s.words.size(); ++j)
        b.gram(i, j) = b.gram(j, i) = frobenius_inner(s.words[i], s.words[j]);
    return b;
  }

  const std::optional<WordRecipe>& mismatch() const { return mismatch_; }
  std::size_t candidates() const { return candidates_; }

 private:
  bool offer(const WordRecipe& recipe, bool seed) {
    ++candidates_;
    std::vector<IntMatrix> cand;
    for (const auto& s : sides_) {
      cand.push_back(s.build(recipe));
      if (max_bits(cand.back()) > options_.max_entry_bits)
        throw ClosureBudgetError("partially coherent closure: word entries exceed " +
                                 std::to_string(options_.max_entry_bits) + " bits");
    }
    if (sides_.size() == 2) {
      const auto& wg = sides_[0].words;
      const auto& wh = sides_[1].words;
      bool same = frobenius_inner(cand[0], cand[0]) == frobenius_inner(cand[1], cand[1]);
      for (std::size_t j = 0; same && j < wg.size(); ++j)
        same = frobenius_inner(cand[0], wg[j]) == frobenius_inner(cand[1], wh[j]);
      if (!same) {
        mismatch_ = recipe;
        return false;
      }
    }
    const bool fresh = sides_[0].span.insert(vectorize(cand[0]));
    if (sides_.size() == 2 && sides_[1].span.insert(vectorize(cand[1])) != fresh)
      throw std::logic_error("lockstep closure: equal Gram data but different independence");
    if (fresh || seed) {
      for (std::size_t k = 0; k < sides_.size(); ++k) sides_[k].words.push_back(std::move(cand[k]));
      recipes_.push_back(recipe);
      independent_.push_back(fresh);
    }
    return true;
  }

  ClosureOptions options_;
  std::vector<ClosureSide> sides_;
  std::vector<WordRecipe> recipes_;
  std::vector<bool> independent_;
  std::optional<WordRecipe> mismatch_;
  std::size_t candidates_ = 0;
  int passes_ = 0;
  bool closed_ = false;
};

std::string poly_string(const std::vector<Integer>& c) {
  std::string out;
  for (std::size_t k = c.size(); k-- > 0;) {
    if (c[k] == 0) continue;
    if (!out.empty()) out += c[k] < 0 ? " - " : " + ";
    else if (c[k] < 0) out += "-";
    Integer mag = abs(c[k]);
    if (mag != 1 || k == 0) out += mag.get_str();
    if (k >= 1) out += "x";
    if (k >= 2) out += "^" + std::to_string(k);
  }
  return out.empty() ? "0" : out;
}

}  // namespace

WordBasis partially_coherent_closure(const Graph& g, ClosureOptions options) {
  ClosureEngine engine(g, nullptr, options);
  engine.run();
  return engine.basis(0);
}

bool in_span(const WordBasis& basis, const IntMatrix& x) {
  if (basis.words.empty()) return x.is_zero();
  ExactSpan span(basis.words.front().data().size());
  for (std::size_t i = 0; i < basis.words.size(); ++i)
    if (basis.independent[i]) span.insert(vectorize(basis.words[i]));
  return span.contains(vectorize(x));
}

Verdict partial_equivalence(const Graph& g, const Graph& h, ClosureOptions options) {
  if (g.order() != h.order()) {
    Verdict v = make_verdict("psd", false, "order-mismatch");
    v.certificate["orders"] = {g.order(), h.order()};
    return v;
  }
  auto pg = char_poly_exact(g.adjacency());
  auto ph = char_poly_exact(h.adjacency());
  if (pg != ph) {
    Verdict v = make_verdict("psd", false, "spectrum");
    v.certificate["char_poly_G"] = poly_string(pg);
    v.certificate["char_poly_H"] = poly_string(ph);
    return v;
  }
  ClosureEngine engine(g, &h, options);
  if (!engine.run()) {
    Verdict v = make_verdict("psd", false, "gram-mismatch");
    v.certificate["word"] = engine.mismatch()->describe();
    v.certificate["candidates_checked"] = engine.candidates();
    return v;
  }
  WordBasis bg = engine.basis(0);
  Verdict v = make_verdict("psd", true, "partial-equivalence");
  json recipes = json::array();
  for (const auto& r : bg.recipes) recipes.push_back(r.describe());
  v.certificate["words"] = recipes;
  v.certificate["candidates_checked"] = engine.candidates();
  v.certificate["gram_equal"] = true;
  v.dims = {{"G", bg.dimension}, {"H", engine.basis(1).dimension}};
  return v;
}

std::optional<Verdict> psd_iso_fastpath(const Graph& g, const Graph& h) {
  const auto pg = regularity_profile(g);
  if (!(pg.connected && pg.one_walk_regular)) return std::nullopt;
  const bool same_order = g.order() == h.order();
  const auto ph = regularity_profile(h);
  const bool cospectral =
      same_order && char_poly_exact(g.adjacency()) == char_poly_exact(h.adjacency());
  const bool holds = same_order && ph.connected && ph.one_walk_regular && cospectral;
  Verdict v = make_verdict("psd", holds, "1-walk-regular-cospectral");
  v.certificate["H_connected"] = ph.connected;
  v.certificate["H_1_walk_regular"] = ph.one_walk_regular;
  v.certificate["cospectral"] = cospectral;
  return v;
}

std::optional<Verdict> dnn_iso_fastpath(const Graph& g, const Graph& h) {
  const auto pg = regularity_profile(g);
  if (!pg.distance_regular) return std::nullopt;
  const auto ph = regularity_profile(h);
  const bool cospectral = g.order() == h.order() &&
                          char_poly_exact(g.adjacency()) == char_poly_exact(h.adjacency());
  Verdict v = make_verdict("dnn", ph.distance_regular && cospectral, "distance-regular-cospectral");
  v.certificate["H_distance_regular"] = ph.distance_regular;
  v.certificate["cospectral"] = cospectral;
  return v;
}

int adjacency_algebra_dim(const Graph& g) {
  const std::size_t n = g.order();
  if (n == 0) return 0;
  ExactSpan span(n * n);
  const IntMatrix a = g.adjacency();
  IntMatrix power = IntMatrix::identity(n);
  while (span.insert(vectorize(power))) power = power * a;
  return static_cast<int>(span.rank());
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::exact: return "exact";
    case Relation::dnn: return "dnn";
    case Relation::psd: return "psd";
    case Relation::fractional: return "fractional";
  }
  return "?";
}

Relation parse_relation(std::string_view name) {
  for (Relation r : {Relation::exact, Relation::dnn, Relation::psd, Relation::fractional})
    if (to_string(r) == name) return r;
  throw std::invalid_argument("unknown relation '" + std::string(name) + "'");
}

namespace {

constexpr int kCrossCheckOrder = 16;

Verdict combine(std::optional<Verdict> fast, std::optional<Verdict> general, const char* general_name) {
  if (fast && general) {
    if (fast->holds() != general->holds())
      throw std::logic_error(std::string("fast path and ") + general_name + " disagree");
    fast->certificate["cross_checked_by"] = general_name;
    fast->dims = general->dims;
    fast->certificate["route"] = "fastpath";
    return *fast;
  }
  if (fast) {
    fast->certificate["route"] = "fastpath";
    return *fast;
  }
  general->certificate["route"] = general_name;
  return *general;
}

}  // namespace

Verdict decide_relation(const Graph& g, const Graph& h, Relation relation) {
  const bool small = std::max(g.order(), h.order()) <= kCrossCheckOrder;
  switch (relation) {
    case Relation::exact: {
      auto f = exact_isomorphism(g, h);
      Verdict v = make_verdict("exact", f.has_value(), f ? "isomorphism" : "exhaustive-search");
      if (f) v.certificate["map"] = *f;
      return v;
    }
    case Relation::fractional:
      return fractional_isomorphic(g, h).verdict;
    case Relation::dnn: {
      auto fast = dnn_iso_fastpath(g, h);
      std::optional<Verdict> general;
      if (!fast || small) general = wl_equivalent(g, h).verdict;
      return combine(std::move(fast), std::move(general), "wl_equivalent");
    }
    case Relation::psd: {
      auto fast = psd_iso_fastpath(g, h);
      std::optional<Verdict> general;
      if (!fast || small) general = partial_equivalence(g, h);
      return combine(std::move(fast), std::move(general), "partial_equivalence");
    }
  }
  throw std::invalid_argument("unknown relation");
}

}  // namespace coniso
