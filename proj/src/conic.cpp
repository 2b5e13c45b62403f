#include "coniso/conic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "coniso/algebra.hpp"
#include "coniso/spectral.hpp"

namespace coniso {

std::string_view to_string(Cone c) { return c == Cone::psd ? "psd" : "dnn"; }

Cone parse_cone(std::string_view name) {
  if (name == "psd") return Cone::psd;
  if (name == "dnn") return Cone::dnn;
  throw std::invalid_argument("unknown cone '" + std::string(name) + "' (expected psd or dnn)");
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigensystem es = eigendecompose(sym);
  Eigen::Index positive = 0;
  while (positive < n && es.values[positive] > 0) ++positive;
  Eigen::MatrixXd out;
  // Rebuild from whichever side of the spectrum is smaller.
  if (positive <= n - positive) {
    const auto v = es.vectors.leftCols(positive);
    out = v * es.values.head(positive).asDiagonal() * v.transpose();
  } else {
    const Eigen::Index neg = n - positive;
    const auto v = es.vectors.rightCols(neg);
    out = sym - v * es.values.tail(neg).asDiagonal() * v.transpose();
  }
  return 0.5 * (out + out.transpose());
}

namespace {

// Below this order the closure costs more than it saves.
constexpr int kReductionMinOrder = 64;

// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0, theta = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

// ADMM for the theta problem is written once against a "space": either full
// symmetric matrices, or coefficient vectors in the coherent closure of the
// graph. Every projection is equivariant and the PSD projection is a matrix
// function, so iterates that start in the closure stay there and both spaces
// produce the same sequence up to rounding.

class FullSpace {
 public:
  using Vec = Eigen::MatrixXd;

  FullSpace(const Graph& g, Cone cone) : g_(g), cone_(cone) {}

  Vec start() const { return Eigen::MatrixXd::Identity(order(), order()) / order(); }
  Vec zero() const { return Eigen::MatrixXd::Zero(order(), order()); }
  int order() const { return g_.order(); }

  Vec affine(const Vec& v) const {
    const int n = order();
    Eigen::MatrixXd x = 0.5 * (v + v.transpose());
    for (auto [a, b] : g_.edges()) x(a, b) = x(b, a) = 0.0;
    if (cone_ == Cone::dnn) {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          if (i != j && x(i, j) < 0) x(i, j) = 0.0;
      x.diagonal() = project_simplex(x.diagonal());
    } else {
      x.diagonal().array() += (1.0 - x.trace()) / n;
    }
    return x;
  }

  Vec psd(const Vec& v) const { return project_psd(v); }
  double norm(const Vec& v) const { return v.norm(); }
  double sum(const Vec& v) const { return v.sum(); }
  double bound(const Vec& w) const { return theta_dual_bound(g_, cone_, w); }
  Eigen::MatrixXd expand(const Vec& v) const { return v; }

 private:
  const Graph& g_;
  Cone cone_;
};

class ReducedSpace {
 public:
  using Vec = Eigen::VectorXd;

  ReducedSpace(const Graph& g, Cone cone, CoherentBasis basis)
      : g_(g), cone_(cone), basis_(std::move(basis)) {
    const int d = basis_.dimension();
    const int n = g.order();
    weight_.resize(d);
    root_.resize(d);
    for (int i = 0; i < d; ++i) {
      weight_[i] = static_cast<double>(basis_.size(i));
      root_[i] = std::sqrt(weight_[i]);
    }
    edge_.assign(d, false);
    for (auto [a, b] : g.edges()) edge_[basis_.class_of(a, b)] = true;
    diagonal_.assign(d, false);
    for (int i : basis_.diagonal()) diagonal_[i] = true;
    diagonal_class_.resize(n);
    for (int v = 0; v < n; ++v) diagonal_class_[v] = basis_.class_of(v, v);
    // Left regular representation in the orthonormal basis A_j / sqrt(|A_j|):
    // A_i A_j = sum_k p_ij^k A_k. It is a faithful *-representation, so
    // eigenvalues and matrix functions can be read off from it.
    regular_.assign(d, Eigen::MatrixXd::Zero(d, d));
    for (int k = 0; k < d; ++k)
      for (const auto& [i, j, p] : basis_.structure(k))
        regular_[i](k, j) = static_cast<double>(p) * root_[k] / root_[j];
    identity_ = Eigen::VectorXd::Zero(d);
    for (int i : basis_.diagonal()) identity_[i] = root_[i];
  }

  int dimension() const { return basis_.dimension(); }

  Vec start() const {
    Vec x = Vec::Zero(dimension());
    for (int i : basis_.diagonal()) x[i] = 1.0 / g_.order();
    return x;
  }
  Vec zero() const { return Vec::Zero(dimension()); }

  Vec affine(const Vec& v) const {
    const int d = dimension();
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = 0.5 * (v[i] + v[basis_.transpose(i)]);
    for (int i = 0; i < d; ++i) {
      if (edge_[i]) x[i] = 0.0;
      else if (cone_ == Cone::dnn && !diagonal_[i] && x[i] < 0) x[i] = 0.0;
    }
    const int n = g_.order();
    if (cone_ == Cone::dnn) {
      Eigen::VectorXd diag(n);
      for (int v2 = 0; v2 < n; ++v2) diag[v2] = x[diagonal_class_[v2]];
      diag = project_simplex(diag);
      for (int v2 = 0; v2 < n; ++v2) x[diagonal_class_[v2]] = diag[v2];
    } else {
      double trace = 0;
      for (int i : basis_.diagonal()) trace += weight_[i] * x[i];
      for (int i : basis_.diagonal()) x[i] += (1.0 - trace) / n;
    }
    return x;
  }

  Vec psd(const Vec& v) const {
    Eigensystem es = eigendecompose(represent(v));
    const Eigen::VectorXd pos = es.values.cwiseMax(0.0);
    const Eigen::VectorXd y = es.vectors * (pos.asDiagonal() * (es.vectors.transpose() * identity_));
    return y.cwiseQuotient(root_);
  }

  double norm(const Vec& v) const { return std::sqrt(v.cwiseAbs2().dot(weight_)); }
  double sum(const Vec& v) const { return v.dot(weight_); }

  double bound(const Vec& w) const {
    const int d = dimension();
    Vec b(d);
    for (int i = 0; i < d; ++i) {
      const double sym = 0.5 * (w[i] + w[basis_.transpose(i)]);
      if (diagonal_[i]) b[i] = 1.0;
      else if (edge_[i]) b[i] = sym;
      else b[i] = cone_ == Cone::dnn ? std::max(1.0, sym) : 1.0;
    }
    return eigendecompose(represent(b)).values[0];
  }

  Eigen::MatrixXd expand(const Vec& v) const {
    const int n = g_.order();
    Eigen::MatrixXd x(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) x(i, j) = v[basis_.class_of(i, j)];
    return x;
  }

 private:
  Eigen::MatrixXd represent(const Vec& v) const {
    const int d = dimension();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
      if (v[i] != 0.0) r += v[i] * regular_[i];
    return 0.5 * (r + r.transpose());
  }

  const Graph& g_;
  Cone cone_;
  CoherentBasis basis_;
  Eigen::VectorXd weight_, root_, identity_;
  std::vector<bool> edge_, diagonal_;
  std::vector<int> diagonal_class_;
  std::vector<Eigen::MatrixXd> regular_;
};

double cone_distance(const Eigen::MatrixXd& x, Cone cone, double* min_eig) {
  Eigensystem es = eigendecompose(0.5 * (x + x.transpose()));
  if (min_eig) *min_eig = es.values.size() ? es.values.minCoeff() : 0.0;
  double neg = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] < 0) neg += es.values[i] * es.values[i];
  double dist = std::sqrt(neg);
  if (cone == Cone::dnn) dist = std::max(dist, x.cwiseMin(0.0).norm());
  return dist;
}

template <class Space>
SDPSolution run_theta_admm(const Space& space, Cone cone, const SolverOptions& opt) {
  using Vec = typename Space::Vec;
  SDPSolution sol;
  Vec z = space.start();
  Vec u = space.zero();
  Vec x = z;
  double rho = opt.rho;
  double r = 0, s = 0;
  int k = 0;
  for (k = 1; k <= opt.max_iters; ++k) {
    x = space.affine((z - u).array() + 1.0 / rho);
    Vec z_old = std::move(z);
    z = space.psd(x + u);
    u += x - z;
    r = space.norm(x - z);
    s = rho * space.norm(z - z_old);
    if (r < opt.tol && s < opt.tol) {
      // Small residuals alone leave the value off by up to n * r; also ask
      // the certified upper bound to agree with it.
      const double value = space.sum(x);
      const double bound = space.bound(rho * u);
      if (std::abs(bound - value) <= opt.tol * std::max(1.0, std::abs(value))) {
        sol.converged = true;
        break;
      }
    }
    if (k % opt.check_every == 0) {
      // Residual balancing; u is the scaled multiplier, so it rescales with rho.
      if (r > 10 * s) {
        rho *= 2;
        u /= 2;
      } else if (s > 10 * r) {
        rho /= 2;
        u *= 2;
      }
    }
  }
  sol.iterations = std::min(k, opt.max_iters);
  sol.x = space.expand(x);
  sol.value = space.sum(x);
  sol.dual_residual = s;
  sol.primal_residual = cone_distance(sol.x, cone, &sol.min_eigenvalue);
  sol.min_entry = sol.x.minCoeff();
  sol.dual_bound = space.bound(rho * u);
  return sol;
}

}  // namespace

double theta_dual_bound(const Graph& g, Cone cone, const Eigen::MatrixXd& w) {
  const int n = g.order();
  if (n == 0) return 0.0;
  Eigen::MatrixXd b = Eigen::MatrixXd::Ones(n, n);
  if (cone == Cone::dnn) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (i != j) b(i, j) = std::max(1.0, 0.5 * (w(i, j) + w(j, i)));
  }
  for (auto [u, v] : g.edges()) b(u, v) = b(v, u) = 0.5 * (w(u, v) + w(v, u));
  return eigendecompose(b).values[0];
}

SDPSolution solve_theta(const Graph& g, Cone cone, SolverOptions opt) {
  if (!(opt.tol > 0)) throw std::invalid_argument("solve_theta: tolerance must be positive");
  if (opt.max_iters < 1) throw std::invalid_argument("solve_theta: iteration cap must be positive");
  const int n = g.order();
  if (n == 0) {
    SDPSolution sol;
    sol.converged = true;
    return sol;
  }
  if (opt.symmetry_reduction && n >= kReductionMinOrder) {
    auto [coloring, basis] = wl2_stabilize(g);
    if (2 * basis.dimension() <= n) {
      const int d = basis.dimension();
      SDPSolution sol = run_theta_admm(ReducedSpace(g, cone, std::move(basis)), cone, opt);
      sol.reduced_dimension = d;
      return sol;
    }
  }
  return run_theta_admm(FullSpace(g, cone), cone, opt);
}

double block_sum_deviation(const Eigen::MatrixXd& m, int ng, int nh) {
  Eigen::MatrixXd sg = Eigen::MatrixXd::Zero(ng, ng);
  Eigen::MatrixXd sh = Eigen::MatrixXd::Zero(nh, nh);
  for (int g = 0; g < ng; ++g)
    for (int h = 0; h < nh; ++h)
      for (int g2 = 0; g2 < ng; ++g2)
        for (int h2 = 0; h2 < nh; ++h2) {
          const double v = m(g * nh + h, g2 * nh + h2);
          sg(g, g2) += v;
          sh(h, h2) += v;
        }
  return std::max((sg.array() - 1.0).abs().maxCoeff(), (sh.array() - 1.0).abs().maxCoeff());
}

KIsoResult k_isomorphic_sdp(const Graph& g, const Graph& h, Cone cone, SolverOptions opt) {
  KIsoResult out;
  const std::string relation(to_string(cone));
  const int n = g.order();
  if (n != h.order()) {
    out.verdict = make_verdict(relation, false, "order-mismatch");
    out.verdict.certificate["orders"] = {n, h.order()};
    return out;
  }
  const Graph product = isomorphism_product(g, h);
  const double margin = 1e-3 * n;
  const double accept = n - margin;
  const double band_low = std::min(n - 1e-2, accept);

  out.solution = solve_theta(product, cone, opt);
  double tol_used = opt.tol;
  if (out.solution.converged && out.solution.value >= band_low && out.solution.value < accept) {
    SolverOptions tight = opt;
    tight.tol = 1e-8;
    out.solution = solve_theta(product, cone, tight);
    tol_used = tight.tol;
  }
  const SDPSolution& s = out.solution;

  Verdict v;
  v.relation = relation;
  // The dual bound is valid at every iterate, so it can settle a failure
  // even when the iteration cap is hit first.
  const bool bound_settles = s.dual_bound < band_low;
  if (s.converged && !(s.value >= band_low && s.value < accept)) {
    v.status = s.value >= accept ? Status::holds : Status::fails;
  } else {
    v.status = bound_settles ? Status::fails : Status::undecided;
  }
  v.certificate["kind"] = "theta-value";
  v.certificate["decided_by"] = v.undecided()   ? "none"
                                : s.converged   ? "converged value"
                                                : "dual bound";
  v.certificate["value"] = s.value;
  v.certificate["target"] = n;
  v.certificate["gap"] = n - s.value;
  v.certificate["margin"] = margin;
  v.certificate["dual_bound"] = s.dual_bound;
  v.certificate["primal_residual"] = s.primal_residual;
  v.certificate["dual_residual"] = s.dual_residual;
  v.certificate["min_eigenvalue"] = s.min_eigenvalue;
  v.certificate["min_entry"] = s.min_entry;
  v.certificate["iterations"] = s.iterations;
  v.certificate["converged"] = s.converged;
  v.certificate["reduced_dimension"] = s.reduced_dimension;
  v.certificate["tol"] = tol_used;
  if (v.holds()) {
    Eigen::MatrixXd m = s.x * (n / s.x.trace());
    out.block_sum_deviation = block_sum_deviation(m, n, n);
    v.certificate["block_sum_deviation"] = out.block_sum_deviation;
    v.certificate["block_sums_ok"] = out.block_sum_deviation <= 1e-4;
    out.iso_matrix = std::move(m);
  }
  v.dims = {{"product_order", product.order()}};
  out.verdict = std::move(v);
  return out;
}

// ---------------------------------------------------------------------------
// Lasserre level one

namespace {

class LasserreAffine {
 public:
  LasserreAffine(const Graph& g, const Graph& h) : ng_(g.order()), nh_(h.order()) {
    const int m = ng_ * nh_;
    zero_.assign(static_cast<std::size_t>(m) * m, 0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        zero_[static_cast<std::size_t>(a) * m + b] =
            rel(g, a / nh_, b / nh_) != rel(h, a % nh_, b % nh_);
  }

  int order() const { return 1 + ng_ * nh_; }

  Eigen::MatrixXd project(const Eigen::MatrixXd& v) const {
    const int m = ng_ * nh_;
    Eigen::MatrixXd y = 0.5 * (v + v.transpose());
    y(0, 0) = 1.0;
    // y_(g,h) appears at (0,k), (k,0) and (k,k); its weighted least squares
    // value is then projected onto {row sums = 1, column sums = 1}.
    Eigen::MatrixXd a(ng_, nh_);
    for (int k = 0; k < m; ++k) a(k / nh_, k % nh_) = (2.0 * y(0, k + 1) + y(k + 1, k + 1)) / 3.0;
    const double n = ng_;
    const Eigen::VectorXd r = a.rowwise().sum().array() - 1.0;
    const Eigen::VectorXd c = a.colwise().sum().transpose().array() - 1.0;
    const double total = a.sum() - n;
    a -= r * Eigen::RowVectorXd::Ones(nh_) / n;
    a -= Eigen::VectorXd::Ones(ng_) * c.transpose() / n;
    a.array() += total / (n * n);
    for (int k = 0; k < m; ++k) {
      const double t = a(k / nh_, k % nh_);
      y(0, k + 1) = y(k + 1, 0) = y(k + 1, k + 1) = t;
    }
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        if (zero_[static_cast<std::size_t>(p) * m + q]) y(p + 1, q + 1) = 0.0;
    return y;
  }

 private:
  int ng_, nh_;
  std::vector<char> zero_;
};

enum class Feasibility { feasible, infeasible, undecided };

bool stagnated(const std::vector<double>& history, double tol) {
  const std::size_t k = history.size();
  if (k < 2000) return false;
  const double now = history[k - 1];
  const double then = history[k / 2 - 1];
  return now > 1e3 * tol && now >= 0.99 * then;
}

}  // namespace

LasserreResult lasserre1_feasible(const Graph& g, const Graph& h, bool nonneg, SolverOptions opt) {
  if (!(opt.tol > 0)) throw std::invalid_argument("lasserre1_feasible: tolerance must be positive");
  LasserreResult out;
  const std::string relation = nonneg ? "lasserre1-dnn" : "lasserre1-psd";
  Feasibility result = Feasibility::undecided;

  if (g.order() != h.order()) {
    // Summing the row constraints gives |V_G| and the column constraints |V_H|.
    result = Feasibility::infeasible;
    out.verdict = make_verdict(relation, false, "order-mismatch");
    out.verdict.certificate["orders"] = {g.order(), h.order()};
  } else {
    const LasserreAffine affine(g, h);
    const int order = affine.order();
    std::vector<double> history;
    Eigen::MatrixXd x;
    if (!nonneg) {
      Eigen::MatrixXd z = Eigen::MatrixXd::Zero(order, order);
      Eigen::MatrixXd u = Eigen::MatrixXd::Zero(order, order);
      for (int k = 1; k <= opt.max_iters; ++k) {
        x = affine.project(z - u);
        z = project_psd(x + u);
        u += x - z;
        history.push_back((x - z).norm());
        if (history.back() < opt.tol) {
          result = Feasibility::feasible;
          break;
        }
        if (k % 100 == 0 && stagnated(history, opt.tol)) {
          result = Feasibility::infeasible;
          break;
        }
      }
    } else {
      // Consensus splitting over the affine set, the PSD cone and the orthant.
      Eigen::MatrixXd z = Eigen::MatrixXd::Zero(order, order);
      Eigen::MatrixXd u1 = z, u2 = z, u3 = z;
      for (int k = 1; k <= opt.max_iters; ++k) {
        x = affine.project(z - u1);
        Eigen::MatrixXd x2 = project_psd(z - u2);
        Eigen::MatrixXd x3 = (z - u3).cwiseMax(0.0);
        z = (x + u1 + x2 + u2 + x3 + u3) / 3.0;
        u1 += x - z;
        u2 += x2 - z;
        u3 += x3 - z;
        history.push_back(std::max((x - x2).norm(), (x - x3).norm()));
        if (history.back() < opt.tol) {
          result = Feasibility::feasible;
          break;
        }
        if (k % 100 == 0 && stagnated(history, opt.tol)) {
          result = Feasibility::infeasible;
          break;
        }
      }
    }
    out.moment = std::move(x);
    out.residual = history.empty() ? 0.0 : history.back();
    out.iterations = static_cast<int>(history.size());

    Verdict v;
    v.relation = relation;
    v.status = result == Feasibility::feasible     ? Status::holds
               : result == Feasibility::infeasible ? Status::fails
                                                   : Status::undecided;
    v.certificate["kind"] = "residual-report";
    v.certificate["residual"] = out.residual;
    v.certificate["iterations"] = out.iterations;
    v.certificate["tol"] = opt.tol;
    v.certificate["rule"] = result == Feasibility::feasible ? "residual below tolerance"
                            : result == Feasibility::infeasible
                                ? "residual stagnated away from zero"
                                : "iteration cap reached";
    v.dims = {{"moment_order", order}};
    out.verdict = std::move(v);
  }

  Verdict algebraic = nonneg ? wl_equivalent(g, h).verdict : partial_equivalence(g, h);
  out.verdict.certificate["algebraic_route"] = nonneg ? "wl_equivalent" : "partial_equivalence";
  out.verdict.certificate["algebraic_holds"] = algebraic.holds();
  if (!out.verdict.undecided() && out.verdict.holds() != algebraic.holds())
    throw std::logic_error("Lasserre feasibility (" + std::string(to_string(out.verdict.status)) +
                           ") disagrees with the algebraic decision (" +
                           std::string(to_string(algebraic.status)) + ")");
  out.algebraic = std::move(algebraic);
  return out;
}

}  // namespace coniso
