#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "coniso/graph.hpp"
#include "coniso/verdict.hpp"

namespace coniso {

enum class Cone { psd, dnn };

std::string_view to_string(Cone c);
Cone parse_cone(std::string_view name);

struct SolverOptions {
  double tol = 1e-6;
  int max_iters = 100000;
  double rho = 1.0;       // initial penalty; adapted by residual balancing
  int check_every = 50;   // iterations between penalty updates and gap checks
  bool symmetry_reduction = true;  // solve inside the coherent closure when it is small
};

struct SDPSolution {
  Eigen::MatrixXd x;
  double value = 0;            // sum of entries of x
  double primal_residual = 0;  // distance of x to the cone, recomputed from x
  double dual_residual = 0;    // rho * |Z_k - Z_{k-1}| at the last iterate
  double dual_bound = 0;       // certified upper bound on the optimum
  double min_eigenvalue = 0;
  double min_entry = 0;
  int iterations = 0;
  int reduced_dimension = 0;  // dimension of the coherent closure used, 0 if none
  bool converged = false;
};

/// Nearest positive semidefinite matrix in Frobenius norm.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a);

/// max sum(M) s.t. M_gg' = 0 for edges gg', tr(M) = 1, M in the cone.
///
/// Two-block ADMM: the affine block (intersected with the nonnegative
/// orthant for DNN, which stays a closed-form projection) against the PSD
/// cone. Starts from I/n. The returned matrix is the affine iterate, so the
/// zero pattern and unit trace hold exactly. For larger graphs whose coherent
/// closure is small the iteration runs on closure coefficients instead.
SDPSolution solve_theta(const Graph& g, Cone cone, SolverOptions options = {});

/// Upper bound lambda_max(B) from edge weights w (any symmetric w is valid).
double theta_dual_bound(const Graph& g, Cone cone, const Eigen::MatrixXd& w);

struct KIsoResult {
  Verdict verdict;
  SDPSolution solution;
  std::optional<Eigen::MatrixXd> iso_matrix;  // n * x when the verdict holds
  double block_sum_deviation = 0;
};

/// Solves the theta problem on the isomorphism product G <> H and compares
/// the value with |V_G|.
KIsoResult k_isomorphic_sdp(const Graph& g, const Graph& h, Cone cone, SolverOptions options = {});

/// Largest |sum_{h,h'} M_{gh,g'h'} - 1| and |sum_{g,g'} M_{gh,g'h'} - 1|.
double block_sum_deviation(const Eigen::MatrixXd& m, int ng, int nh);

struct LasserreResult {
  Verdict verdict;
  Eigen::MatrixXd moment;  // last affine iterate
  double residual = 0;
  int iterations = 0;
  std::optional<Verdict> algebraic;  // the cross-check verdict
};

/// First-level Lasserre feasibility for graph isomorphism; with nonneg all
/// moment entries are also required to be nonnegative. The outcome is
/// compared with the exact algebraic decision and a disagreement throws
/// std::logic_error.
LasserreResult lasserre1_feasible(const Graph& g, const Graph& h, bool nonneg,
                                  SolverOptions options = {});

}  // namespace coniso
