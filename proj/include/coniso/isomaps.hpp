#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coniso/algebra.hpp"
#include "coniso/conic.hpp"
#include "coniso/exact.hpp"
#include "coniso/graph.hpp"
#include "coniso/verdict.hpp"

namespace coniso {

/// Matrix over (V_G x V_H)^2. Row and column (g, h) sit at index g * |V_H| + h,
/// which is the row-stacking vect convention: vect(e_g e_h^T) = e_g (x) e_h.
/// It is the Choi matrix of the map Phi(X)_{hh'} = sum_{g,g'} M_{gh,g'h'} X_{gg'}.
struct IsoMatrix {
  int ng = 0;
  int nh = 0;
  Eigen::MatrixXd values;
  std::optional<RatMatrix> exact;           // present when the entries are rational
  std::string cone;                         // free-form tag: "cp", "dnn", "psd", ...
  std::string g_label, h_label;             // where the graphs came from, for file headers
  std::vector<Eigen::VectorXd> cp_factors;  // nonnegative f with M = sum f f^T, when known

  int index(int g, int h) const { return g * nh + h; }
};

/// Shape checks only; everything else is for verify_iso_matrix to report.
IsoMatrix make_iso_matrix(Eigen::MatrixXd values, int ng, int nh, std::string cone = {});
IsoMatrix make_iso_matrix(RatMatrix values, int ng, int nh, std::string cone = {});

enum class MapDirection { forward, adjoint };

/// forward: X is |V_G| x |V_G|, returns Phi(X). adjoint: Y is |V_H| x |V_H|,
/// returns Phi^dagger(Y)_{gg'} = sum_{h,h'} M_{gh,g'h'} Y_{hh'}.
Eigen::MatrixXd apply_map(const IsoMatrix& m, const Eigen::MatrixXd& x,
                          MapDirection direction = MapDirection::forward);
RatMatrix apply_map(const RatMatrix& m, int ng, int nh, const RatMatrix& x,
                    MapDirection direction = MapDirection::forward);

/// Choi matrix of a map given as a callback on |V_G| x |V_G| matrices, built
/// from the images of the matrix units E_{gg'}.
template <class Map>
Eigen::MatrixXd choi_matrix(Map&& phi, int ng, int nh) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ng * nh, ng * nh);
  for (int g = 0; g < ng; ++g)
    for (int g2 = 0; g2 < ng; ++g2) {
      Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(ng, ng);
      unit(g, g2) = 1.0;
      const Eigen::MatrixXd image = phi(unit);
      for (int h = 0; h < nh; ++h)
        for (int h2 = 0; h2 < nh; ++h2) c(g * nh + h, g2 * nh + h2) = image(h, h2);
    }
  return c;
}

/// Swaps the roles of G and H: the Choi matrix of Phi^dagger.
IsoMatrix transpose_roles(const IsoMatrix& m);

/// Kraus operators, each |V_H| x |V_G|, with Phi(X) = sum K X K^T.
using KrausSet = std::vector<Eigen::MatrixXd>;

class NotPositiveError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Eigendecomposition of M; each eigenpair (lambda > 0, v) gives
/// K_{hg} = sqrt(lambda) v_{gh}. Signs are fixed so the largest entry of
/// each K is positive. Throws NotPositiveError below -1e-9 * |M|.
KrausSet kraus_decompose(const IsoMatrix& m);

Eigen::MatrixXd apply_kraus(const KrausSet& ks, const Eigen::MatrixXd& x,
                            MapDirection direction = MapDirection::forward);

struct Check {
  std::string name;
  bool passed = false;
  double residual = 0;
  double threshold = 0;
  bool exact = false;  // residual computed in rational arithmetic
};

struct Report {
  std::vector<Check> checks;

  bool passed() const;
  const Check& at(std::string_view name) const;  // throws std::out_of_range
  bool has(std::string_view name) const;
  std::vector<std::string> failures() const;
  json to_json() const;
  void add(std::string name, double residual, double threshold, bool exact = false);
  void add_exact(std::string name, const Rational& residual);
};

struct VerifyOptions {
  double tol = 1e-8;            // relative to max(1, largest |entry|)
  double psd_tol = 1e-8;        // min eigenvalue >= -psd_tol
  double nonneg_tol = 1e-10;    // min entry >= -nonneg_tol (DNN)
};

/// Checks, each with its residual: block_sums_g, block_sums_h, zero_pattern,
/// symmetry, psd, nonnegative (DNN only), phi_identity, phi_adjacency,
/// phi_ones. Linear conditions are exact when M carries rational entries.
/// Throws std::invalid_argument on a dimension mismatch.
Report verify_iso_matrix(const IsoMatrix& m, const Graph& g, const Graph& h, Cone cone,
                         VerifyOptions options = {});

/// M = sum_i w_i v^i v^iT with v^i_{gh} = [h = f_i(g)]. Every f_i must be an
/// isomorphism and the weights positive with sum exactly 1.
IsoMatrix build_cp_from_isomorphisms(const Graph& g, const Graph& h,
                                     std::span<const Permutation> fs,
                                     std::span<const Rational> weights);

/// Choi matrix of X -> sum_i tr(A_i^T X) / m_i B_{f(i)}, where the A_i, B_j
/// are the coherent bases and f the class pairing of a successful
/// wl_equivalent. Entries are exact rationals.
IsoMatrix build_dnn_choi_from_wl(const Graph& g, const Graph& h, const WLResult& wl);

/// Projectors P_{gh} of a common size d, stored at index g * |V_H| + h.
struct QuantumCertificate {
  int ng = 0;
  int nh = 0;
  std::vector<Eigen::MatrixXd> projectors;

  int dimension() const { return projectors.empty() ? 0 : static_cast<int>(projectors[0].rows()); }
  const Eigen::MatrixXd& at(int g, int h) const { return projectors[g * nh + h]; }
};

/// d = 1 certificate of a classical isomorphism f: P_{gh} = [h = f(g)].
QuantumCertificate classical_certificate(const Graph& g, const Graph& h, const Permutation& f);

/// M_{gh,g'h'} = tr(P_{gh} P_{g'h'}) / d.
IsoMatrix iso_matrix_from_certificate(const QuantumCertificate& cert);

/// Checks projectors, row_sums, column_sums and orthogonality within 1e-8.
/// When all pass, the assembled matrix is verified at the DNN cone and those
/// checks are appended with the prefix "matrix.".
Report verify_quantum_certificate(const QuantumCertificate& cert, const Graph& g, const Graph& h);

/// Empirical checks of the map induced by an iso matrix: cospectral (exact),
/// left_multiplicative and right_multiplicative on random probes,
/// kraus_trace_preserving and kraus_unital, and for every eigenvalue the
/// eigenprojector checks projector_forward and projector_adjoint. Probes
/// come from a fixed seed.
Report verify_map_properties(const IsoMatrix& m, const Graph& g, const Graph& h,
                             double tol = 1e-6, std::uint64_t seed = 1);

}  // namespace coniso
