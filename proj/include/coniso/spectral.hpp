#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coniso/exact.hpp"
#include "coniso/graph.hpp"
#include "coniso/verdict.hpp"

namespace coniso {

/// Coefficients of det(xI - A) in ascending powers of x; the last entry is 1.
std::vector<Integer> char_poly_exact(const IntMatrix& a);

struct Eigensystem {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, matched to values
};

/// Symmetric eigendecomposition. Throws std::runtime_error on failure.
Eigensystem eigendecompose(const Eigen::MatrixXd& a);

/// Distinct eigenvalues with multiplicities, descending.
struct Spectrum {
  std::vector<std::pair<double, int>> eigenvalues;
  bool exact = false;                // every eigenvalue is an integer root
  std::vector<Integer> char_poly;    // always filled
};

Spectrum spectrum(const IntMatrix& a);

struct Eigenprojector {
  double value = 0;
  Eigen::MatrixXd projector;
  std::optional<Integer> exact_value;  // set on the exact path
  std::optional<RatMatrix> exact_projector;
};

struct EigenprojectorSet {
  std::vector<Eigenprojector> items;  // descending eigenvalue
  bool exact = false;
};

/// One projector per distinct eigenvalue. When the characteristic polynomial
/// splits over the integers the projectors are exact Lagrange products;
/// otherwise eigenvalues are grouped with gap 1e-6 * max|lambda|.
EigenprojectorSet eigenprojectors(const IntMatrix& a);

/// L = D - A.
IntMatrix laplacian(const Graph& g);

struct CospectralityReport {
  bool adjacency = false;
  bool complement_adjacency = false;
  bool laplacian = false;
  bool complement_laplacian = false;

  bool all() const { return adjacency && complement_adjacency && laplacian && complement_laplacian; }
};

CospectralityReport cospectrality_suite(const Graph& g, const Graph& h);

struct RegularityProfile {
  bool connected = false;
  bool regular = false;
  bool walk_regular = false;
  bool one_walk_regular = false;
  bool distance_regular = false;
  int components = 0;
  int laplacian_zero_multiplicity = 0;
};

RegularityProfile regularity_profile(const Graph& g);

/// Number of connected components by union-find.
int component_count(const Graph& g);

struct FractionalResult {
  Verdict verdict;
  std::optional<RatMatrix> witness;  // doubly stochastic D with A_G D = D A_H
};

FractionalResult fractional_isomorphic(const Graph& g, const Graph& h);

}  // namespace coniso
