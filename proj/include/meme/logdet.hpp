#ifndef MEME_LOGDET_HPP
#define MEME_LOGDET_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "meme/basis.hpp"
#include "meme/error.hpp"
#include "meme/maxent.hpp"
#include "meme/random.hpp"
#include "meme/spectral_moments.hpp"
#include "meme/symmetric_operator.hpp"

namespace meme {

struct LogDetEstimate {
  double value = 0.0;  // natural log
  double lambda_u = 1.0;
  MomentEstimate moments;
  MaxEntSolution solution;
};

/// Settings shared by the MaxEnt pipeline and the polynomial baselines.
struct LogDetConfig {
  ProbeConfig probes;  // m = probes.num_moments, d = probes.num_probes
  BasisKind basis = BasisKind::legendre;
  SolverConfig solver;

  void validate() const {
    probes.validate();
    solver.validate();
  }
};

/// Squared-exponential kernel on random Gaussian inputs.
struct KernelSpec {
  Eigen::Index n = 1000;
  int input_dim = 6;
  double lengthscale = 0.05;
  double noise = 1e-8;
  std::uint64_t seed = 0;
  /// Inputs are drawn from N(0, input_scale^2 I).
  double input_scale = 0.1;

  void validate() const {
    if (n < 2) throw Error("kernel spec: n must be >= 2");
    if (input_dim < 1) throw Error("kernel spec: input_dim must be >= 1");
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
      throw Error("kernel spec: lengthscale must be positive");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error("kernel spec: noise must be >= 0");
    if (!(input_scale > 0.0) || !std::isfinite(input_scale))
      throw Error("kernel spec: input_scale must be positive");
  }
};

/// K_ij = exp(-|x_i - x_j|^2 / (2 l^2)) + noise [i == j].
inline SymmetricOperator make_se_kernel(const KernelSpec& spec) {
  spec.validate();
  Engine rng = make_engine(spec.seed, 0x4b45'524eULL);
  std::normal_distribution<double> normal(0.0, spec.input_scale);
  Eigen::MatrixXd x(spec.input_dim, spec.n);
  for (Eigen::Index j = 0; j < spec.n; ++j)
    for (Eigen::Index i = 0; i < spec.input_dim; ++i) x(i, j) = normal(rng);
  const Eigen::VectorXd sq = x.colwise().squaredNorm().transpose();
  Eigen::MatrixXd k = x.transpose() * x;
  const double inv = 1.0 / (2.0 * spec.lengthscale * spec.lengthscale);
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    for (Eigen::Index i = j + 1; i < spec.n; ++i) {
      const double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * k(i, j));
      k(i, j) = k(j, i) = std::exp(-d2 * inv);
    }
    k(j, j) = 1.0 + spec.noise;
  }
  return SymmetricOperator::from_dense(std::move(k));
}

/// lambda_max / lambda_min from a dense eigendecomposition.
inline double condition_number(const SymmetricOperator& op) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op.to_dense(), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const Eigen::VectorXd ev = eig.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

/// log det K = 2 sum log L_ii. Sparse operators use a sparse factorization.
inline double cholesky_logdet(const SymmetricOperator& op) {
  if (const auto* s = op.sparse()) {
    const Eigen::SparseMatrix<double> k(*s);
    const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(k);
    if (llt.info() != Eigen::Success) throw Error("matrix not positive definite");
    const Eigen::SparseMatrix<double> l = llt.matrixL();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < l.outerSize(); ++j) sum += std::log(l.coeff(j, j));
    return 2.0 * sum;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(*op.dense());
  if (llt.info() != Eigen::Success) throw Error("matrix not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// int_0^1 log(x) q(x) dx with q linear between grid nodes. The log factor is
/// integrated exactly on each cell, so the x = 0 singularity needs no cutoff.
inline double log_expectation(const QuadratureGrid& grid, const Eigen::VectorXd& q) {
  if (q.size() != grid.nodes().size()) throw Error("density length does not match the grid");
  // F0(t) = t log t - t, F1(t) = t^2/2 log t - t^2/4
  const auto tlogt = [](double t) { return t > 0.0 ? t * std::log(t) : 0.0; };
  const Eigen::VectorXd& x = grid.nodes();
  double sum = 0.0;
  double f0a = 0.0, f1a = 0.0;
  for (Eigen::Index k = 0; k + 1 < x.size(); ++k) {
    const double a = x(k), b = x(k + 1);
    const double f0b = tlogt(b) - b;
    const double f1b = 0.5 * b * tlogt(b) - 0.25 * b * b;
    const double i0 = f0b - f0a, i1 = f1b - f1a;
    sum += (q(k) * (b * i0 - i1) + q(k + 1) * (i1 - a * i0)) / (b - a);
    f0a = f0b;
    f1a = f1b;
  }
  return sum;
}

/// MaxEnt log-determinant from moments of the normalized spectrum
/// lambda / lambda_u. The returned estimate has no moment diagnostics.
inline LogDetEstimate meme_logdet_from_moments(const MomentVector& moments, Eigen::Index n,
                                               double lambda_u, const SolverConfig& cfg = {}) {
  if (!(lambda_u > 0.0)) throw Error("degenerate operator");
  const QuadratureGrid grid(moments.basis, moments.order(), cfg.grid_spacing);
  LogDetEstimate est;
  est.lambda_u = lambda_u;
  est.moments.values = moments.values;
  est.moments.basis = moments.basis;
  est.solution = solve_maxent(moments, grid, cfg);
  const Eigen::VectorXd q = grid.density(est.solution.coefficients, cfg.exponent_clip);
  const double dn = static_cast<double>(n);
  est.value = dn * log_expectation(grid, q) + dn * std::log(lambda_u);
  if (!est.solution.converged)
    throw NotConverged<LogDetEstimate>(
        "maxent solver did not converge (|g|_inf = " +
            std::to_string(est.solution.final_gradient_inf_norm) + " after " +
            std::to_string(est.solution.iterations) + " iterations)",
        est);
  return est;
}

/// Gershgorin normalization, stochastic moments of K / lambda_u in cfg.basis,
/// MaxEnt solve, then n E[log lambda'] + n log lambda_u. Throws
/// NotConverged<LogDetEstimate> (carrying the estimate) if the solve stalls.
inline LogDetEstimate meme_logdet(const SymmetricOperator& op, const LogDetConfig& cfg = {}) {
  cfg.validate();
  const double lambda_u = gershgorin_upper_bound(op);
  const MomentEstimate moments =
      estimate_basis_moments(op, cfg.probes, cfg.basis, SpectralWindow{0.0, lambda_u});
  try {
    auto est = meme_logdet_from_moments(moments.as_moments(), op.size(), lambda_u, cfg.solver);
    est.moments = moments;
    return est;
  } catch (const NotConverged<LogDetEstimate>& e) {
    auto est = e.result();
    est.moments = moments;
    throw NotConverged<LogDetEstimate>(e.what(), est);
  }
}

/// Truncated series log(lambda') = -sum_{i=1}^m (1 - lambda')^i / i evaluated
/// from power moments of lambda' via the binomial transform.
inline double taylor_logdet_from_moments(const MomentVector& power_moments, Eigen::Index n,
                                         double lambda_u) {
  if (power_moments.basis != BasisKind::power)
    throw Error("taylor_logdet: moments must be in the power basis");
  if (!(lambda_u > 0.0)) throw Error("degenerate operator");
  const std::size_t m = power_moments.order();
  long double series = 0.0L;
  for (std::size_t i = 1; i <= m; ++i) {
    // E[(1 - lambda')^i] = sum_k C(i,k) (-1)^k mu_k
    long double central = 0.0L, binom = 1.0L;
    for (std::size_t k = 0; k <= i; ++k) {
      if (k > 0) binom = binom * static_cast<long double>(i - k + 1) / static_cast<long double>(k);
      const long double term = binom * static_cast<long double>(power_moments.values[k]);
      central += (k % 2 == 0) ? term : -term;
    }
    series += central / static_cast<long double>(i);
  }
  const double dn = static_cast<double>(n);
  return -dn * static_cast<double>(series) + dn * std::log(lambda_u);
}

inline double taylor_logdet(const SymmetricOperator& op, const ProbeConfig& probes) {
  const double lambda_u = gershgorin_upper_bound(op);
  const MomentEstimate mu =
      estimate_basis_moments(op, probes, BasisKind::power, SpectralWindow{0.0, lambda_u});
  return taylor_logdet_from_moments(mu.as_moments(), op.size(), lambda_u);
}

/// Coefficients c_0..c_m of the Chebyshev interpolant of log(lambda) on
/// [delta, 1] at the m+1 Chebyshev points, in the variable
/// t = (2 lambda - 1 - delta) / (1 - delta).
inline std::vector<double> chebyshev_log_coefficients(int m, double delta) {
  if (m < 1) throw Error("chebyshev_log_coefficients: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("chebyshev_log_coefficients: delta outside (0,1)");
  const int nodes = m + 1;
  std::vector<double> fv(nodes), c(nodes, 0.0);
  for (int k = 0; k < nodes; ++k) {
    const double t = std::cos(std::numbers::pi * (k + 0.5) / nodes);
    fv[k] = std::log(((1.0 - delta) * t + 1.0 + delta) / 2.0);
  }
  for (int j = 0; j < nodes; ++j) {
    double s = 0.0;
    for (int k = 0; k < nodes; ++k) s += fv[k] * std::cos(std::numbers::pi * j * (k + 0.5) / nodes);
    c[j] = 2.0 * s / nodes;
  }
  c[0] *= 0.5;
  return c;
}

/// n sum_j c_j E[T_j(t)] + n log lambda_u with Chebyshev moments taken in
/// the window t = (2 lambda' - 1 - delta) / (1 - delta).
inline double chebyshev_logdet_from_moments(const MomentVector& chebyshev_moments, double delta,
                                            Eigen::Index n, double lambda_u) {
  if (chebyshev_moments.basis != BasisKind::chebyshev)
    throw Error("chebyshev_logdet: moments must be in the chebyshev basis");
  if (!(lambda_u > 0.0)) throw Error("degenerate operator");
  const auto c = chebyshev_log_coefficients(static_cast<int>(chebyshev_moments.order()), delta);
  double sum = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) sum += c[j] * chebyshev_moments.values[j];
  const double dn = static_cast<double>(n);
  return dn * sum + dn * std::log(lambda_u);
}

/// Polynomial baseline; delta defaults to half the MaxEnt grid spacing.
inline double chebyshev_logdet(const SymmetricOperator& op, const ProbeConfig& probes,
                               double delta = 0.5e-4) {
  const double lambda_u = gershgorin_upper_bound(op);
  const SpectralWindow window{delta * lambda_u, (1.0 - delta) * lambda_u};
  const MomentEstimate mu = estimate_basis_moments(op, probes, BasisKind::chebyshev, window);
  return chebyshev_logdet_from_moments(mu.as_moments(), delta, op.size(), lambda_u);
}

/// |estimate - truth| / |truth|
inline double relative_error(double estimate, double truth) {
  return std::abs(estimate - truth) / std::abs(truth);
}

}  // namespace meme

#endif  // MEME_LOGDET_HPP
