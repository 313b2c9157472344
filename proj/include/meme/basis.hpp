#ifndef MEME_BASIS_HPP
#define MEME_BASIS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meme/error.hpp"

namespace meme {

/// Polynomial families on [0,1]. Every family has f_0 == 1.
enum class BasisKind { power, chebyshev, legendre };

inline std::string_view to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::power:
      return "power";
    case BasisKind::chebyshev:
      return "chebyshev";
    case BasisKind::legendre:
      return "legendre";
  }
  return "unknown";
}

inline BasisKind parse_basis(std::string_view name) {
  if (name == "power") return BasisKind::power;
  if (name == "chebyshev" || name == "chebyshev-shifted") return BasisKind::chebyshev;
  if (name == "legendre" || name == "legendre-shifted") return BasisKind::legendre;
  throw Error("unknown basis '" + std::string(name) + "'");
}

/// Moment values mu_0..mu_m of a measure on [0,1], mu_i = E[f_i(x)].
struct MomentVector {
  BasisKind basis = BasisKind::legendre;
  std::vector<double> values;

  std::size_t order() const { return values.empty() ? 0 : values.size() - 1; }

  void validate() const {
    if (values.size() < 2) throw Error("moment vector needs at least mu_0 and mu_1");
    if (values[0] != 1.0) throw Error("moment vector must have mu_0 = 1");
    for (double v : values)
      if (!std::isfinite(v)) throw Error("moment vector has a non-finite entry");
  }
};

/// Writes f_0(x)..f_{out.size()-1}(x) using the three-term recurrence of the
/// family. No domain check: the recurrences are also used slightly outside
/// [0,1] (e.g. for spectra shifted by a baseline).
inline void basis_eval_all(BasisKind kind, double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  switch (kind) {
    case BasisKind::power:
      for (std::size_t i = 1; i < out.size(); ++i) out[i] = out[i - 1] * x;
      return;
    case BasisKind::chebyshev: {
      const double t = 2.0 * x - 1.0;
      out[1] = t;
      for (std::size_t i = 1; i + 1 < out.size(); ++i)
        out[i + 1] = 2.0 * t * out[i] - out[i - 1];
      return;
    }
    case BasisKind::legendre: {
      const double t = 2.0 * x - 1.0;
      out[1] = t;
      for (std::size_t i = 1; i + 1 < out.size(); ++i) {
        const double k = static_cast<double>(i);
        out[i + 1] = ((2.0 * k + 1.0) * t * out[i] - k * out[i - 1]) / (k + 1.0);
      }
      return;
    }
  }
}

/// f_i(x) for x in [0,1].
inline double basis_eval(BasisKind kind, std::size_t i, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error("basis_eval: x outside [0,1]");
  std::vector<double> buf(i + 1);
  basis_eval_all(kind, x, buf);
  return buf[i];
}

inline constexpr std::size_t kMaxBasisTransformOrder = 60;

/// Row i holds the monomial coefficients of f_i: f_i(x) = sum_k C[i][k] x^k.
inline std::vector<std::vector<long double>> monomial_coefficients(BasisKind kind,
                                                                   std::size_t m) {
  if (m > kMaxBasisTransformOrder) throw Error("basis transform overflow");
  std::vector<std::vector<long double>> c(m + 1, std::vector<long double>(m + 1, 0.0L));
  c[0][0] = 1.0L;
  if (m == 0) return c;
  switch (kind) {
    case BasisKind::power:
      for (std::size_t i = 0; i <= m; ++i) c[i][i] = 1.0L;
      break;
    case BasisKind::chebyshev:
      // T*_1 = 2x - 1, T*_{i+1} = 2(2x-1) T*_i - T*_{i-1}
      c[1][0] = -1.0L;
      c[1][1] = 2.0L;
      for (std::size_t i = 1; i < m; ++i)
        for (std::size_t k = 0; k <= i + 1; ++k) {
          long double v = -c[i - 1][k];
          if (k <= i) v -= 2.0L * c[i][k];
          if (k >= 1) v += 4.0L * c[i][k - 1];
          c[i + 1][k] = v;
        }
      break;
    case BasisKind::legendre:
      // P*_i(x) = sum_k (-1)^{i+k} C(i,k) C(i+k,k) x^k
      for (std::size_t i = 1; i <= m; ++i) {
        long double binom_ik = 1.0L;   // C(i,k)
        long double binom_ikk = 1.0L;  // C(i+k,k)
        for (std::size_t k = 0; k <= i; ++k) {
          if (k > 0) {
            binom_ik = binom_ik * static_cast<long double>(i - k + 1) / static_cast<long double>(k);
            binom_ikk = binom_ikk * static_cast<long double>(i + k) / static_cast<long double>(k);
          }
          const long double sign = ((i + k) % 2 == 0) ? 1.0L : -1.0L;
          c[i][k] = sign * binom_ik * binom_ikk;
        }
      }
      break;
  }
  return c;
}

/// Exact linear map from power moments to moments in another basis.
/// Coefficients grow combinatorially with the order, so moments carrying
/// noise lose accuracy quickly beyond order ~15; estimate high orders
/// directly in the target basis instead.
inline MomentVector power_to_basis(const MomentVector& power_moments, BasisKind target) {
  if (power_moments.basis != BasisKind::power)
    throw Error("power_to_basis: input moments are not power moments");
  const std::size_t m = power_moments.order();
  if (power_moments.values.empty()) throw Error("power_to_basis: empty moment vector");
  const auto coeffs = monomial_coefficients(target, m);
  MomentVector out{target, std::vector<double>(m + 1)};
  for (std::size_t i = 0; i <= m; ++i) {
    // Neumaier summation
    long double sum = 0.0L;
    long double comp = 0.0L;
    for (std::size_t k = 0; k <= i; ++k) {
      const long double term = coeffs[i][k] * static_cast<long double>(power_moments.values[k]);
      const long double t = sum + term;
      if (std::fabs(sum) >= std::fabs(term))
        comp += (sum - t) + term;
      else
        comp += (term - t) + sum;
      sum = t;
    }
    out.values[i] = static_cast<double>(sum + comp);
  }
  return out;
}

}  // namespace meme

#endif  // MEME_BASIS_HPP
