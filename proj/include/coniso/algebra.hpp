#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "coniso/exact.hpp"
#include "coniso/graph.hpp"
#include "coniso/verdict.hpp"

namespace coniso {

/// Colouring of ordered vertex pairs, stored row-major.
struct PairColoring {
  int n = 0;
  std::vector<int> colors;
  std::vector<int> history;  // number of colours after each round, round 0 first

  int at(int x, int y) const { return colors[static_cast<std::size_t>(x) * n + y]; }
  int palette_size() const { return history.empty() ? 0 : history.back(); }
};

/// 01 basis of a coherent algebra with its structure constants.
///
/// Classes are numbered by first occurrence when pairs are enumerated
/// (0,0), (0,1), ..., so the numbering depends only on the colouring.
class CoherentBasis {
 public:
  /// Validates properties (i)-(v) exactly; throws std::logic_error otherwise.
  CoherentBasis(int n, std::vector<int> classes);

  int order() const { return n_; }
  int dimension() const { return d_; }
  int class_of(int x, int y) const { return cls_[static_cast<std::size_t>(x) * n_ + y]; }
  const std::vector<int>& classes() const { return cls_; }
  const std::vector<int>& diagonal() const { return diagonal_; }
  int transpose(int i) const { return transpose_[i]; }
  long size(int i) const { return sizes_[i]; }

  /// p_ij^k: for (x,y) in class k, the number of z with (x,z) in i and (z,y) in j.
  long intersection(int i, int j, int k) const;

  /// Nonzero structure constants of class k as (i, j, p_ij^k), sorted.
  const std::vector<std::tuple<int, int, long>>& structure(int k) const { return structure_[k]; }

  IntMatrix matrix(int i) const;

 private:
  int n_;
  int d_ = 0;
  std::vector<int> cls_;
  std::vector<int> diagonal_;
  std::vector<int> transpose_;
  std::vector<long> sizes_;
  std::vector<std::vector<std::tuple<int, int, long>>> structure_;
};

/// Joint 2-dimensional Weisfeiler-Leman refinement with one shared palette.
/// Round 0 colours pairs by rel; colour ids are ranks of sorted signatures.
std::vector<PairColoring> refine_pair_colors(std::span<const Graph* const> graphs);

std::pair<PairColoring, CoherentBasis> wl2_stabilize(const Graph& g);

struct WLResult {
  Verdict verdict;
  std::optional<CoherentBasis> basis_g;
  std::optional<CoherentBasis> basis_h;
  std::vector<int> pairing;  // class i of G corresponds to class pairing[i] of H
};

WLResult wl_equivalent(const Graph& g, const Graph& h);

struct WordRecipe {
  enum class Op { identity, adjacency, ones, product, transpose, schur_identity, schur_adjacency };
  Op op = Op::identity;
  int lhs = -1;
  int rhs = -1;

  std::string describe() const;
};

/// Words generated from I, A and J during the partially coherent closure.
struct WordBasis {
  std::vector<WordRecipe> recipes;
  std::vector<IntMatrix> words;
  std::vector<bool> independent;
  IntMatrix gram;  // trace inner products of all stored words
  std::size_t dimension = 0;
  int passes = 0;
  bool closed = false;
};

class ClosureBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClosureOptions {
  std::size_t max_entry_bits = 4096;
};

WordBasis partially_coherent_closure(const Graph& g, ClosureOptions options = {});

/// Exact membership of x in the span of the independent words.
bool in_span(const WordBasis& basis, const IntMatrix& x);

Verdict partial_equivalence(const Graph& g, const Graph& h, ClosureOptions options = {});

/// Returns nullopt when the fast path does not apply to g.
std::optional<Verdict> psd_iso_fastpath(const Graph& g, const Graph& h);
std::optional<Verdict> dnn_iso_fastpath(const Graph& g, const Graph& h);

/// Dimension of span{I, A, A^2, ...}, the degree of the minimal polynomial.
int adjacency_algebra_dim(const Graph& g);

enum class Relation { exact, dnn, psd, fractional };

std::string_view to_string(Relation r);
Relation parse_relation(std::string_view name);

/// Decides the relation with exact arithmetic. Fast paths are preferred;
/// for graphs with at most 16 vertices the general procedure also runs and
/// any disagreement throws std::logic_error.
Verdict decide_relation(const Graph& g, const Graph& h, Relation relation);

}  // namespace coniso
