#ifndef MEME_SPECTRAL_MOMENTS_HPP
#define MEME_SPECTRAL_MOMENTS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "meme/basis.hpp"
#include "meme/error.hpp"
#include "meme/random.hpp"
#include "meme/symmetric_operator.hpp"

namespace meme {

enum class ProbeDistribution { gaussian, rademacher };

struct ProbeConfig {
  int num_probes = 50;   ///< d
  int num_moments = 30;  ///< m
  ProbeDistribution distribution = ProbeDistribution::gaussian;
  std::uint64_t master_seed = 0;
  int threads = 0;  ///< 0: MEME_THREADS or hardware concurrency

  void validate() const {
    if (num_probes < 1) throw Error("number of probes must be >= 1");
    if (num_moments < 1) throw Error("number of moments must be >= 1");
  }
};

/// Normalised spectral moments: values[i] estimates (1/n) sum_s f_i(lambda_s)
/// of the operator the estimator was run on.
struct MomentEstimate {
  std::vector<double> values;
  double normalized_by = 1.0;  ///< lambda_u the operator was divided by
  BasisKind basis = BasisKind::power;

  MomentVector as_moments() const { return {basis, values}; }
};

/// Affine window mapping a spectrum onto the basis domain:
/// moments are taken of f_i((lambda - shift) / scale).
struct SpectralWindow {
  double shift = 0.0;
  double scale = 1.0;
};

/// lambda_u = max_i sum_j |K_ij|, an upper bound on every eigenvalue.
inline double gershgorin_upper_bound(const SymmetricOperator& op) {
  const double bound = op.row_abs_sums().maxCoeff();
  if (!(bound > 0.0)) throw Error("degenerate operator");
  return bound;
}

/// Zero-mean unit-variance probe j of the stream selected by cfg.master_seed.
inline Eigen::VectorXd make_probe(const ProbeConfig& cfg, Eigen::Index n, std::uint64_t j) {
  Engine rng = make_engine(cfg.master_seed, 0x5052'4f42ULL, j);
  Eigen::VectorXd z(n);
  if (cfg.distribution == ProbeDistribution::gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  } else {
    for (Eigen::Index i = 0; i < n; i += 64) {
      std::uint64_t bits = rng();
      for (Eigen::Index b = i; b < std::min<Eigen::Index>(n, i + 64); ++b, bits >>= 1)
        z(b) = (bits & 1U) ? 1.0 : -1.0;
    }
  }
  return z;
}

/// Quadratic forms z^T f_i(A) z, i = 0..m, for a single probe, where
/// A = (K - shift I) / scale and f_i follows the basis recurrence. Uses m
/// matrix-vector products and never forms a matrix power.
inline std::vector<double> probe_quadratic_forms(const SymmetricOperator& op,
                                                 const Eigen::VectorXd& z, int m, BasisKind basis,
                                                 SpectralWindow window = {}) {
  if (z.size() != op.size()) throw Error("probe length does not match operator dimension");
  if (!(window.scale > 0.0)) throw Error("spectral window scale must be positive");
  std::vector<double> forms(static_cast<std::size_t>(m) + 1);
  forms[0] = z.squaredNorm();
  if (m == 0) return forms;

  const double inv_scale = 1.0 / window.scale;
  Eigen::VectorXd kv(z.size());
  // A v = (K v - shift v) / scale; T v = 2 A v - v maps the spectrum to [-1,1].
  auto apply_a = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    op.apply(v, kv);
    if (window.shift == 0.0 && window.scale == 1.0)
      out = kv;
    else
      out = (kv - window.shift * v) * inv_scale;
  };

  Eigen::VectorXd prev = z;
  Eigen::VectorXd cur(z.size());
  Eigen::VectorXd next(z.size());
  Eigen::VectorXd av(z.size());
  apply_a(z, av);
  cur = basis == BasisKind::power ? av : Eigen::VectorXd(2.0 * av - z);
  forms[1] = z.dot(cur);
  for (int i = 1; i < m; ++i) {
    apply_a(cur, av);
    const double k = i;
    switch (basis) {
      case BasisKind::power:
        next = av;
        break;
      case BasisKind::chebyshev:
        next = 2.0 * (2.0 * av - cur) - prev;
        break;
      case BasisKind::legendre:
        next = ((2.0 * k + 1.0) * (2.0 * av - cur) - k * prev) / (k + 1.0);
        break;
    }
    prev.swap(cur);
    cur.swap(next);
    forms[static_cast<std::size_t>(i) + 1] = z.dot(cur);
  }
  return forms;
}

/// Hutchinson estimate of the normalised moments (1/n) sum_s f_i(lambda_s)
/// of the window-mapped spectrum. Each probe's quadratic forms are divided by
/// the pooled probe norm sum_j z_j^T z_j, so values[0] == 1 and the result is
/// the moment sequence of a probability measure on the spectrum.
///
/// Probes use independent seed substreams and are reduced in index order, so
/// the result is bitwise identical for any thread count.
inline MomentEstimate estimate_basis_moments(const SymmetricOperator& op, const ProbeConfig& cfg,
                                             BasisKind basis, SpectralWindow window = {}) {
  cfg.validate();
  const auto d = static_cast<std::size_t>(cfg.num_probes);
  const auto width = static_cast<std::size_t>(cfg.num_moments) + 1;
  std::vector<double> partial(d * width);

  const unsigned workers = std::min<unsigned>(resolve_threads(cfg.threads), static_cast<unsigned>(d));
  std::vector<std::exception_ptr> failures(workers);
  auto run = [&](unsigned worker) {
    try {
      for (std::size_t j = worker; j < d; j += workers) {
        const auto z = make_probe(cfg, op.size(), j);
        const auto forms = probe_quadratic_forms(op, z, cfg.num_moments, basis, window);
        std::copy(forms.begin(), forms.end(), partial.begin() + static_cast<std::ptrdiff_t>(j * width));
      }
    } catch (...) {
      failures[worker] = std::current_exception();
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<double> sums(width, 0.0);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < width; ++i) sums[i] += partial[j * width + i];

  MomentEstimate est;
  est.basis = basis;
  est.values.resize(width);
  est.values[0] = 1.0;
  for (std::size_t i = 1; i < width; ++i) est.values[i] = sums[i] / sums[0];
  return est;
}

/// Normalised power moments (1/n) Tr(B^i), i = 0..m, of an operator whose
/// spectrum has already been scaled into [0,1].
inline MomentEstimate estimate_spectral_moments(const SymmetricOperator& op, const ProbeConfig& cfg) {
  return estimate_basis_moments(op, cfg, BasisKind::power);
}

}  // namespace meme

#endif  // MEME_SPECTRAL_MOMENTS_HPP
