#ifndef MEME_GMM_HPP
#define MEME_GMM_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "meme/basis.hpp"
#include "meme/error.hpp"
#include "meme/maxent.hpp"
#include "meme/random.hpp"

namespace meme {

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
  double stddev = 1.0;
};

/// Univariate mixture sum_k w_k N(mean_k, stddev_k^2).
struct GaussianMixture1D {
  std::vector<GaussianComponent> components;

  std::size_t size() const { return components.size(); }

  void validate() const {
    if (components.empty()) throw Error("mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
      if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw Error("mixture weights must be > 0");
      if (!(c.stddev > 0.0) || !std::isfinite(c.stddev)) throw Error("mixture stddev must be > 0");
      if (!std::isfinite(c.mean)) throw Error("mixture mean must be finite");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error("mixture weights must sum to 1");
  }

  /// Equal-weight mixture.
  static GaussianMixture1D uniform(const std::vector<double>& means, const std::vector<double>& stddevs) {
    if (means.size() != stddevs.size()) throw Error("means and stddevs differ in length");
    GaussianMixture1D g;
    const double w = 1.0 / static_cast<double>(means.size());
    for (std::size_t k = 0; k < means.size(); ++k) g.components.push_back({w, means[k], stddevs[k]});
    return g;
  }
};

/// Random test mixture: weights U(0.1, 1) normalized, means U(-5, 5),
/// stddevs U(0.1, 2).
inline GaussianMixture1D random_mixture(Engine& rng, int components) {
  if (components < 1) throw Error("mixture needs at least one component");
  std::uniform_real_distribution<double> mean(-5.0, 5.0), sd(0.1, 2.0), w(0.1, 1.0);
  GaussianMixture1D g;
  double total = 0.0;
  for (int k = 0; k < components; ++k) {
    g.components.push_back({w(rng), mean(rng), sd(rng)});
    total += g.components.back().weight;
  }
  double head = 0.0;
  for (int k = 0; k + 1 < components; ++k) head += (g.components[k].weight /= total);
  g.components.back().weight = 1.0 - head;
  return g;
}

/// x -> y = (x - offset) / scale.
struct DomainMap {
  double offset = 0.0;
  double scale = 1.0;

  double to_unit(double x) const { return (x - offset) / scale; }
};

/// E[x^i] via M_k = mu M_{k-1} + (k-1) sigma^2 M_{k-2} per component.
inline double gmm_raw_moment(const GaussianMixture1D& gmm, int i) {
  if (i < 0) throw Error("moment order must be >= 0");
  double total = 0.0;
  for (const auto& c : gmm.components) {
    double prev = 1.0, cur = c.mean;
    if (i == 0) cur = 1.0;
    for (int k = 2; k <= i; ++k) {
      const double next = c.mean * cur + (k - 1) * c.stddev * c.stddev * prev;
      prev = cur;
      cur = next;
    }
    total += c.weight * cur;
  }
  return total;
}

/// a = min(mean - k sigma), s = max(mean + k sigma) - a.
inline DomainMap support_map(const GaussianMixture1D& gmm, double k_sigma = 8.0) {
  gmm.validate();
  if (!(k_sigma > 0.0)) throw Error("k_sigma must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : gmm.components) {
    lo = std::min(lo, c.mean - k_sigma * c.stddev);
    hi = std::max(hi, c.mean + k_sigma * c.stddev);
  }
  return {lo, hi - lo};
}

/// The mixture of y = (x - a) / s.
inline GaussianMixture1D mapped_mixture(const GaussianMixture1D& gmm, const DomainMap& map) {
  GaussianMixture1D out = gmm;
  for (auto& c : out.components) {
    c.mean = map.to_unit(c.mean);
    c.stddev /= map.scale;
  }
  return out;
}

struct MappedMoments {
  DomainMap map;
  MomentVector moments;  // power moments E[y^i], i = 0..m
};

/// Maps the support into [0,1] and returns the power moments of the mapped
/// variable (raw moments of the shifted and scaled mixture).
inline MappedMoments map_support(const GaussianMixture1D& gmm, int m, double k_sigma = 8.0) {
  if (m < 2) throw Error("map_support: m must be >= 2");
  MappedMoments out;
  out.map = support_map(gmm, k_sigma);
  const auto y = mapped_mixture(gmm, out.map);
  out.moments.basis = BasisKind::power;
  out.moments.values.resize(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) out.moments.values[i] = gmm_raw_moment(y, i);
  out.moments.values[0] = 1.0;
  return out;
}

namespace detail {

struct GaussHermiteRule {
  std::vector<double> nodes;    // scaled so that E[f(Z)] = sum w_j f(nodes_j), Z ~ N(0,1)
  std::vector<double> weights;
};

/// Golub-Welsch rule with n points; exact for polynomials of degree <= 2n-1.
inline GaussHermiteRule gauss_hermite(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  for (int j = 0; j < n; ++j) {
    rule.nodes.push_back(std::numbers::sqrt2 * eig.eigenvalues()(j));
    rule.weights.push_back(eig.eigenvectors()(0, j) * eig.eigenvectors()(0, j));
  }
  return rule;
}

inline const GaussHermiteRule& gauss_hermite_for_degree(std::size_t degree) {
  static const std::vector<GaussHermiteRule> rules = [] {
    std::vector<GaussHermiteRule> r;
    for (std::size_t n = 1; n <= kMaxBasisTransformOrder / 2 + 1; ++n)
      r.push_back(gauss_hermite(static_cast<int>(n)));
    return r;
  }();
  if (degree > kMaxBasisTransformOrder) throw Error("moment order too large");
  return rules[degree / 2];  // n = degree/2 + 1 points
}

}  // namespace detail

/// Moments E[f_i(y)] of the mapped mixture in any basis, by Gauss-Hermite
/// quadrature per component (exact for polynomials of this degree). Avoids
/// the ill-conditioned power-to-basis transform at high order.
inline MomentVector mapped_basis_moments(const GaussianMixture1D& gmm, const DomainMap& map, int m,
                                         BasisKind basis) {
  if (m < 1) throw Error("moment order must be >= 1");
  const auto& rule = detail::gauss_hermite_for_degree(static_cast<std::size_t>(m));
  MomentVector out{basis, std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0)};
  std::vector<double> f(out.values.size());
  for (const auto& c : gmm.components) {
    const double mean = map.to_unit(c.mean), sd = c.stddev / map.scale;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      basis_eval_all(basis, mean + sd * rule.nodes[j], f);
      const double w = c.weight * rule.weights[j];
      for (std::size_t i = 0; i < f.size(); ++i) out.values[i] += w * f[i];
    }
  }
  out.values[0] = 1.0;
  return out;
}

struct MemeEntropy {
  double value = 0.0;  // nats, in the original (unmapped) variable
  DomainMap map;
  MaxEntSolution solution;
};

/// MaxEnt upper bound on the mixture entropy from m moments; never throws
/// on non-convergence (check solution.converged).
inline MemeEntropy entropy_meme_detailed(const GaussianMixture1D& gmm, int m = 10,
                                         BasisKind basis = BasisKind::legendre,
                                         const SolverConfig& cfg = {}, double k_sigma = 8.0) {
  if (m < 2) throw Error("entropy_meme: m must be >= 2");
  MemeEntropy out;
  out.map = support_map(gmm, k_sigma);
  const MomentVector mu = mapped_basis_moments(gmm, out.map, m, basis);
  out.solution = solve_maxent(mu, cfg);
  out.value = analytic_entropy(out.solution, mu) + std::log(out.map.scale);
  return out;
}

/// As entropy_meme_detailed, but throws NotConverged<MemeEntropy> when the
/// solve stalls.
inline double entropy_meme(const GaussianMixture1D& gmm, int m = 10,
                           BasisKind basis = BasisKind::legendre, const SolverConfig& cfg = {}) {
  auto e = entropy_meme_detailed(gmm, m, basis, cfg);
  if (!e.solution.converged)
    throw NotConverged<MemeEntropy>("maxent solver did not converge for the mixture entropy",
                                    std::move(e));
  return e.value;
}

inline double gmm_log_pdf(const GaussianMixture1D& gmm, double x) {
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(gmm.size());
  for (const auto& c : gmm.components) {
    const double z = (x - c.mean) / c.stddev;
    const double t = std::log(c.weight) - 0.5 * z * z - std::log(c.stddev) -
                     0.5 * std::log(2.0 * std::numbers::pi);
    terms.push_back(t);
    peak = std::max(peak, t);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

inline double gmm_pdf(const GaussianMixture1D& gmm, double x) { return std::exp(gmm_log_pdf(gmm, x)); }

/// Ancestral sampling: component by weight, then the Gaussian.
inline std::vector<double> gmm_sample(const GaussianMixture1D& gmm, std::uint64_t seed, std::size_t n) {
  gmm.validate();
  std::vector<double> w;
  for (const auto& c : gmm.components) w.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  Engine rng = make_engine(seed, 0x474d'4d53ULL);
  std::vector<double> x(n);
  for (auto& v : x) {
    const auto& c = gmm.components[pick(rng)];
    v = c.mean + c.stddev * normal(rng);
  }
  return x;
}

/// -int p log p by the trapezoid rule on the k_sigma = 10 support.
inline double entropy_quad(const GaussianMixture1D& gmm, int grid_points = 20001) {
  if (grid_points < 101) throw Error("entropy_quad: grid_points must be >= 101");
  const DomainMap map = support_map(gmm, 10.0);
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(grid_points, map.offset, map.offset + map.scale);
  Eigen::ArrayXd p = Eigen::ArrayXd::Zero(grid_points);
  for (const auto& c : gmm.components) {
    const double norm = c.weight / (c.stddev * std::sqrt(2.0 * std::numbers::pi));
    p += norm * (-0.5 * ((x - c.mean) / c.stddev).square()).exp();
  }
  const Eigen::ArrayXd f = (p > 0.0).select(-p * p.log(), 0.0);
  const double h = map.scale / (grid_points - 1);
  return h * (f.sum() - 0.5 * (f(0) + f(grid_points - 1)));
}

/// Entropy of the moment-matched Gaussian, 0.5 log(2 pi e Var[x]).
inline double entropy_mm(const GaussianMixture1D& gmm) {
  gmm.validate();
  double mean = 0.0;
  for (const auto& c : gmm.components) mean += c.weight * c.mean;
  double var = 0.0;
  for (const auto& c : gmm.components)
    var += c.weight * (c.stddev * c.stddev + (c.mean - mean) * (c.mean - mean));
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var);
}

/// -(1/N) sum log p(x_i) over N mixture samples.
inline double entropy_mc(const GaussianMixture1D& gmm, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error("entropy_mc: n_samples must be >= 1");
  double sum = 0.0;
  for (double x : gmm_sample(gmm, seed, n_samples)) sum -= gmm_log_pdf(gmm, x);
  return sum / static_cast<double>(n_samples);
}

inline double fractional_error(double estimate, double truth) {
  return std::abs(estimate - truth) / std::abs(truth);
}

}  // namespace meme

#endif  // MEME_GMM_HPP
