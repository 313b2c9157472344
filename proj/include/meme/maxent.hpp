#ifndef MEME_MAXENT_HPP
#define MEME_MAXENT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "meme/basis.hpp"
#include "meme/error.hpp"

namespace meme {

struct SolverConfig {
  double tolerance = 1e-6;       ///< stop when max_j |g_j| < tolerance
  double hessian_jitter = 1e-8;  ///< added to the Hessian diagonal
  double grid_spacing = 1e-4;    ///< trapezoid spacing on [0,1]
  int max_newton_iters = 200;
  double exponent_clip = 500.0;  ///< |1 + sum alpha_i f_i| is clipped to this

  // Inexact-Newton globalisation.
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  /// Inner CG iterations are capped at cg_iteration_factor * (m + 1).
  int cg_iteration_factor = 20;

  void validate() const {
    if (!(tolerance > 0.0)) throw Error("solver tolerance must be positive");
    if (!(hessian_jitter >= 0.0)) throw Error("hessian jitter must be nonnegative");
    if (!(grid_spacing > 0.0 && grid_spacing <= 1e-2))
      throw Error("grid spacing must lie in (0, 1e-2]");
    if (max_newton_iters < 1) throw Error("max_newton_iters must be >= 1");
    if (!(exponent_clip > 0.0)) throw Error("exponent clip must be positive");
    if (cg_iteration_factor < 1) throw Error("cg_iteration_factor must be >= 1");
  }
};

/// q(x) = exp(-[1 + sum_i alpha_i f_i(x)]) on [0,1].
struct MaxEntSolution {
  BasisKind basis = BasisKind::legendre;
  std::vector<double> coefficients;
  bool converged = false;
  double final_gradient_inf_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double exponent_clip = 500.0;

  std::size_t order() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
};

/// Uniform trapezoid grid on [0,1] with the basis tabulated at every node.
class QuadratureGrid {
 public:
  QuadratureGrid(BasisKind basis, std::size_t order, double spacing) : basis_(basis) {
    if (!(spacing > 0.0 && spacing <= 1e-2)) throw Error("grid spacing must lie in (0, 1e-2]");
    const auto cells = static_cast<Eigen::Index>(std::llround(1.0 / spacing));
    const Eigen::Index n = cells + 1;
    spacing_ = 1.0 / static_cast<double>(cells);
    nodes_.resize(n);
    weights_.setConstant(n, spacing_);
    weights_(0) = weights_(n - 1) = 0.5 * spacing_;
    table_.resize(n, static_cast<Eigen::Index>(order + 1));
    std::vector<double> row(order + 1);
    for (Eigen::Index k = 0; k < n; ++k) {
      nodes_(k) = (k == n - 1) ? 1.0 : static_cast<double>(k) * spacing_;
      basis_eval_all(basis, nodes_(k), row);
      for (std::size_t i = 0; i <= order; ++i) table_(k, static_cast<Eigen::Index>(i)) = row[i];
    }
  }

  BasisKind basis() const { return basis_; }
  std::size_t order() const { return static_cast<std::size_t>(table_.cols() - 1); }
  double spacing() const { return spacing_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// nodes x (order+1); column i is f_i at the nodes.
  const Eigen::MatrixXd& table() const { return table_; }

  /// q_alpha at every node.
  Eigen::VectorXd density(std::span<const double> alpha, double clip) const {
    check_length(alpha.size());
    const Eigen::Map<const Eigen::VectorXd> a(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    Eigen::VectorXd e = table_ * a;
    return (-(e.array() + 1.0)).max(-clip).min(clip).exp().matrix();
  }

  void check_length(std::size_t n) const {
    if (n != static_cast<std::size_t>(table_.cols()))
      throw Error("coefficient vector length does not match the grid order");
  }

 private:
  BasisKind basis_;
  double spacing_ = 0.0;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd table_;
};

namespace detail {

inline double objective_on_grid(const QuadratureGrid& grid, const Eigen::VectorXd& q,
                                std::span<const double> alpha, std::span<const double> mu) {
  double value = grid.weights().dot(q);
  for (std::size_t i = 0; i < alpha.size(); ++i) value += alpha[i] * mu[i];
  return value;
}

inline Eigen::VectorXd gradient_on_grid(const QuadratureGrid& grid, const Eigen::VectorXd& q,
                                        std::span<const double> mu) {
  const Eigen::VectorXd wq = grid.weights().cwiseProduct(q);
  Eigen::VectorXd g = -(grid.table().transpose() * wq);
  for (std::size_t i = 0; i < mu.size(); ++i) g(static_cast<Eigen::Index>(i)) += mu[i];
  return g;
}

inline Eigen::MatrixXd hessian_on_grid(const QuadratureGrid& grid, const Eigen::VectorXd& q,
                                       double jitter) {
  const Eigen::VectorXd wq = grid.weights().cwiseProduct(q);
  const Eigen::MatrixXd weighted = grid.table().array().colwise() * wq.array();
  Eigen::MatrixXd h = grid.table().transpose() * weighted;
  h = 0.5 * (h + h.transpose()).eval();
  h.diagonal().array() += jitter;
  return h;
}

inline void check_inputs(std::span<const double> alpha, const MomentVector& moments) {
  if (alpha.size() != moments.values.size())
    throw Error("coefficient and moment vectors differ in length");
}

/// Conjugate gradients on H d = rhs, starting from d = 0.
inline Eigen::VectorXd conjugate_gradient(const Eigen::MatrixXd& h, const Eigen::VectorXd& rhs,
                                          double tolerance, int max_iters) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_iters && std::sqrt(rr) > tolerance; ++it) {
    const Eigen::VectorXd hp = h * p;
    const double curvature = p.dot(hp);
    if (!(curvature > 0.0)) {
      if (it == 0) d = rhs;
      break;
    }
    const double step = rr / curvature;
    d += step * p;
    r -= step * hp;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return d;
}

}  // namespace detail

/// Dual objective  int_0^1 q_alpha + sum_i alpha_i mu_i  (trapezoid on spacing h).
inline double dual_objective(std::span<const double> alpha, const MomentVector& moments,
                             const SolverConfig& cfg) {
  detail::check_inputs(alpha, moments);
  const QuadratureGrid grid(moments.basis, moments.order(), cfg.grid_spacing);
  const double v = detail::objective_on_grid(grid, grid.density(alpha, cfg.exponent_clip), alpha,
                                             moments.values);
  if (!std::isfinite(v)) throw Error("objective overflow");
  return v;
}

/// g_j = mu_j - int f_j q_alpha.
inline std::vector<double> dual_gradient(std::span<const double> alpha,
                                         const MomentVector& moments, const SolverConfig& cfg) {
  detail::check_inputs(alpha, moments);
  const QuadratureGrid grid(moments.basis, moments.order(), cfg.grid_spacing);
  const Eigen::VectorXd g =
      detail::gradient_on_grid(grid, grid.density(alpha, cfg.exponent_clip), moments.values);
  if (!g.allFinite()) throw Error("objective overflow");
  return {g.data(), g.data() + g.size()};
}

/// H_jk = int f_j f_k q_alpha, symmetrised, plus jitter on the diagonal.
inline Eigen::MatrixXd dual_hessian(std::span<const double> alpha, const SolverConfig& cfg,
                                    BasisKind basis, std::size_t order) {
  const QuadratureGrid grid(basis, order, cfg.grid_spacing);
  const Eigen::MatrixXd h =
      detail::hessian_on_grid(grid, grid.density(alpha, cfg.exponent_clip), cfg.hessian_jitter);
  if (!h.allFinite()) throw Error("objective overflow");
  return h;
}

/// Damped Newton with conjugate-gradient inner solves, started from `initial`.
/// Returns converged=false with the last (lowest-objective) iterate when the
/// iteration budget runs out or the line search stalls.
inline MaxEntSolution solve_maxent(const MomentVector& moments, const QuadratureGrid& grid,
                                   const SolverConfig& cfg, std::span<const double> initial) {
  moments.validate();
  cfg.validate();
  if (grid.basis() != moments.basis || grid.order() != moments.order())
    throw Error("quadrature grid does not match the moment vector");
  detail::check_inputs(initial, moments);

  const std::size_t dim = moments.values.size();
  const std::span<const double> mu(moments.values);
  MaxEntSolution sol;
  sol.basis = moments.basis;
  sol.exponent_clip = cfg.exponent_clip;
  sol.coefficients.assign(initial.begin(), initial.end());

  Eigen::VectorXd q = grid.density(sol.coefficients, cfg.exponent_clip);
  double f = detail::objective_on_grid(grid, q, sol.coefficients, mu);
  if (!std::isfinite(f)) throw Error("solver diverged");

  std::vector<double> trial(dim);
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd g = detail::gradient_on_grid(grid, q, mu);
    sol.final_gradient_inf_norm = g.cwiseAbs().maxCoeff();
    sol.iterations = iter;
    if (sol.final_gradient_inf_norm < cfg.tolerance) {
      sol.converged = true;
      return sol;
    }
    if (iter >= cfg.max_newton_iters) return sol;

    const Eigen::MatrixXd h = detail::hessian_on_grid(grid, q, cfg.hessian_jitter);
    const double gnorm = g.norm();
    Eigen::VectorXd d = detail::conjugate_gradient(h, -g, std::min(0.1, gnorm) * gnorm,
                                                   cfg.cg_iteration_factor * static_cast<int>(dim));
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd q_trial;
    double f_trial = f;
    for (int k = 0; k <= cfg.max_backtracks; ++k) {
      for (std::size_t i = 0; i < dim; ++i)
        trial[i] = sol.coefficients[i] + step * d(static_cast<Eigen::Index>(i));
      q_trial = grid.density(trial, cfg.exponent_clip);
      f_trial = detail::objective_on_grid(grid, q_trial, trial, mu);
      if (std::isfinite(f_trial) && f_trial <= f + cfg.armijo_slope * step * slope) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      if (!std::isfinite(f_trial) && !std::isfinite(f)) throw Error("solver diverged");
      return sol;
    }
    sol.coefficients = trial;
    q = std::move(q_trial);
    f = f_trial;
  }
}

/// Cold start from alpha = 0.
inline MaxEntSolution solve_maxent(const MomentVector& moments, const QuadratureGrid& grid,
                                   const SolverConfig& cfg) {
  const std::vector<double> zero(moments.values.size(), 0.0);
  return solve_maxent(moments, grid, cfg, zero);
}

inline MaxEntSolution solve_maxent(const MomentVector& moments, const SolverConfig& cfg = {}) {
  moments.validate();
  cfg.validate();
  const QuadratureGrid grid(moments.basis, moments.order(), cfg.grid_spacing);
  return solve_maxent(moments, grid, cfg);
}

/// q_alpha(x) with the exponent clipped to +-exponent_clip.
inline double density_eval(const MaxEntSolution& sol, double x) {
  std::vector<double> f(sol.coefficients.size());
  basis_eval_all(sol.basis, x, f);
  double e = 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) e += sol.coefficients[i] * f[i];
  return std::exp(std::clamp(-e, -sol.exponent_clip, sol.exponent_clip));
}

/// Entropy of the MaxEnt density, 1 + sum_i alpha_i mu_i.
inline double analytic_entropy(const MaxEntSolution& sol, const MomentVector& moments) {
  if (sol.basis != moments.basis) throw Error("analytic_entropy: basis mismatch");
  if (sol.coefficients.size() != moments.values.size())
    throw Error("analytic_entropy: order mismatch");
  double h = 1.0;
  for (std::size_t i = 0; i < moments.values.size(); ++i)
    h += sol.coefficients[i] * moments.values[i];
  return h;
}

struct EntropyPathPoint {
  std::size_t order = 0;
  double entropy = 0.0;
  MaxEntSolution solution;
};

/// Entropy of the MaxEnt density for every order min_order..moments.order(),
/// using the prefixes of `moments`. Each solve starts from the previous
/// solution padded with a zero multiplier, so the dual value can only go
/// down as constraints are added; the first solve starts from alpha = 0.
inline std::vector<EntropyPathPoint> maxent_entropy_path(const MomentVector& moments,
                                                         std::size_t min_order,
                                                         const SolverConfig& cfg = {}) {
  moments.validate();
  if (min_order < 1 || min_order > moments.order()) throw Error("entropy path: bad minimum order");
  std::vector<EntropyPathPoint> path;
  std::vector<double> start(min_order + 1, 0.0);
  for (std::size_t m = min_order; m <= moments.order(); ++m) {
    const MomentVector prefix{moments.basis,
                              {moments.values.begin(), moments.values.begin() + static_cast<std::ptrdiff_t>(m + 1)}};
    const QuadratureGrid grid(moments.basis, m, cfg.grid_spacing);
    start.resize(m + 1, 0.0);
    EntropyPathPoint point{m, 0.0, solve_maxent(prefix, grid, cfg, start)};
    point.entropy = analytic_entropy(point.solution, prefix);
    start = point.solution.coefficients;
    path.push_back(std::move(point));
  }
  return path;
}

}  // namespace meme

#endif  // MEME_MAXENT_HPP
