#ifndef MEME_BO_HPP
#define MEME_BO_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <ostream>
#include <string>
#include <vector>

#include "meme/basis.hpp"
#include "meme/error.hpp"
#include "meme/gmm.hpp"
#include "meme/maxent.hpp"
#include "meme/random.hpp"

namespace meme {

struct GPHyper {
  double lengthscale = 0.2;
  double signal_var = 1.0;
  double noise_var = 1e-6;

  void validate() const {
    if (!(lengthscale > 0.0) || !(signal_var > 0.0) || !(noise_var > 0.0))
      throw Error("GP hyperparameters must be positive");
  }
};

/// Observations: row i of x is an input, y(i) its value.
struct GPData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Eigen::Index size() const { return y.size(); }
};

/// Latent predictive mean and variance.
struct GPPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean GP with SE kernel, factorized once for a fixed hyperparameter.
class GPPosterior {
 public:
  GPPosterior(GPData data, GPHyper hyper) : data_(std::move(data)), hyper_(hyper) {
    hyper_.validate();
    if (data_.x.rows() != data_.y.size()) throw Error("GP data: x rows and y length differ");
    const Eigen::Index n = data_.size();
    if (n == 0) return;
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(data_.x.row(i), data_.x.row(j));
    k.diagonal().array() += hyper_.noise_var;
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) throw Error("ill-conditioned GP");
    alpha_ = llt_.solve(data_.y);
  }

  const GPHyper& hyper() const { return hyper_; }

  GPPrediction predict(const Eigen::RowVectorXd& x) const {
    if (data_.size() == 0) return {0.0, hyper_.signal_var};
    if (x.size() != data_.x.cols()) throw Error("GP input dimension mismatch");
    Eigen::VectorXd ks(data_.size());
    for (Eigen::Index i = 0; i < data_.size(); ++i) ks(i) = kernel(data_.x.row(i), x);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    return {ks.dot(alpha_), std::max(0.0, hyper_.signal_var - v.squaredNorm())};
  }

 private:
  double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const {
    const double d2 = (a - b).squaredNorm();
    return hyper_.signal_var * std::exp(-0.5 * d2 / (hyper_.lengthscale * hyper_.lengthscale));
  }

  GPData data_;
  GPHyper hyper_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

inline GPPrediction gp_posterior(const GPData& data, const GPHyper& hyper, const Eigen::RowVectorXd& x) {
  return GPPosterior(data, hyper).predict(x);
}

/// Geometric grid of lengthscales in [0.1, 0.2] and signal variances in
/// [1, 1.5] (inputs in the unit cube, standardized outputs), mimicking a
/// concentrated hyperparameter posterior. Default 4 x 2.
inline std::vector<GPHyper> hyper_grid(int lengthscales = 4, int signal_vars = 2, double noise_var = 1e-6) {
  if (lengthscales < 1 || signal_vars < 1) throw Error("hyperparameter grid must be nonempty");
  const auto geometric = [](double lo, double hi, int k, int count) {
    return count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
  };
  std::vector<GPHyper> grid;
  for (int i = 0; i < lengthscales; ++i)
    for (int j = 0; j < signal_vars; ++j)
      grid.push_back({geometric(0.1, 0.2, i, lengthscales), geometric(1.0, 1.5, j, signal_vars), noise_var});
  return grid;
}

inline std::vector<GPHyper> default_hyper_grid() { return hyper_grid(); }

/// Equal-weight mixture of the per-hyperparameter predictive distributions
/// of y (latent variance plus noise).
inline GaussianMixture1D predictive_mixture(const std::vector<GPPosterior>& posteriors,
                                            const Eigen::RowVectorXd& x) {
  if (posteriors.empty()) throw Error("predictive mixture needs at least one hyperparameter");
  GaussianMixture1D mix;
  const double w = 1.0 / static_cast<double>(posteriors.size());
  for (const auto& p : posteriors) {
    const auto pred = p.predict(x);
    mix.components.push_back({w, pred.mean, std::sqrt(pred.variance + p.hyper().noise_var)});
  }
  return mix;
}

inline GaussianMixture1D predictive_mixture(const GPData& data, const std::vector<GPHyper>& hypers,
                                            const Eigen::RowVectorXd& x) {
  std::vector<GPPosterior> posteriors;
  for (const auto& h : hypers) posteriors.emplace_back(data, h);
  return predictive_mixture(posteriors, x);
}

enum class EntropyMethod { quad, mm, meme };

struct AcquisitionSpec {
  EntropyMethod method = EntropyMethod::quad;
  int moments = 10;  // meme only
  BasisKind basis = BasisKind::legendre;
  SolverConfig solver;
};

/// "quad", "mm", "meme-legendre-10", "meme-chebyshev-8", "meme-power-6".
inline AcquisitionSpec parse_acquisition(const std::string& name) {
  AcquisitionSpec spec;
  if (name == "quad") return spec;
  if (name == "mm") {
    spec.method = EntropyMethod::mm;
    return spec;
  }
  if (name.rfind("meme-", 0) == 0) {
    const auto dash = name.rfind('-');
    spec.method = EntropyMethod::meme;
    spec.basis = parse_basis(name.substr(5, dash - 5));
    try {
      std::size_t used = 0;
      spec.moments = std::stoi(name.substr(dash + 1), &used);
      if (used != name.size() - dash - 1) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad acquisition method '" + name + "'");
    }
    if (spec.moments < 2) throw Error("acquisition needs at least 2 moments");
    return spec;
  }
  throw Error("unknown acquisition method '" + name + "'");
}

inline std::string to_string(const AcquisitionSpec& spec) {
  switch (spec.method) {
    case EntropyMethod::quad:
      return "quad";
    case EntropyMethod::mm:
      return "mm";
    case EntropyMethod::meme:
      return "meme-" + std::string(to_string(spec.basis)) + "-" + std::to_string(spec.moments);
  }
  return "unknown";
}

struct AcquisitionValue {
  double value = 0.0;
  /// Set when the MaxEnt solve failed and the quadrature value was used.
  bool fallback = false;
  std::string error;
};

/// H[mixture] - mean_j H[component_j].
inline AcquisitionValue acquisition(const GaussianMixture1D& mix, const AcquisitionSpec& spec) {
  double mean_component = 0.0;
  for (const auto& c : mix.components)
    mean_component += c.weight * 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * c.stddev * c.stddev);
  AcquisitionValue out;
  switch (spec.method) {
    case EntropyMethod::quad:
      out.value = entropy_quad(mix);
      break;
    case EntropyMethod::mm:
      out.value = entropy_mm(mix);
      break;
    case EntropyMethod::meme: {
      const auto e = entropy_meme_detailed(mix, spec.moments, spec.basis, spec.solver);
      if (e.solution.converged) {
        out.value = e.value;
      } else {
        out.value = entropy_quad(mix);
        out.fallback = true;
        out.error = "maxent solver did not converge (|g|_inf = " +
                    std::to_string(e.solution.final_gradient_inf_norm) + ")";
      }
      break;
    }
  }
  out.value -= mean_component;
  return out;
}

/// Black-box objective on a box, minimized; f_star is the known minimum.
struct Objective {
  std::string name;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::function<double(const Eigen::VectorXd&)> f;
  double f_star = 0.0;

  Eigen::Index dim() const { return lower.size(); }
};

/// "sinusoid" (1D, sin x + sin(10x/3) on [2.7, 7.5]), "branin" (2D),
/// "constant" (1D, f = 1).
inline Objective objective_by_name(const std::string& name) {
  if (name == "sinusoid")
    return {name, Eigen::VectorXd::Constant(1, 2.7), Eigen::VectorXd::Constant(1, 7.5),
            [](const Eigen::VectorXd& x) { return std::sin(x(0)) + std::sin(10.0 * x(0) / 3.0); },
            -1.8995993491521133};
  if (name == "branin")
    return {name, Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(10.0, 15.0),
            [](const Eigen::VectorXd& x) {
              const double pi = std::numbers::pi;
              const double b = 5.1 / (4 * pi * pi), c = 5 / pi, t = 1 / (8 * pi);
              const double u = x(1) - b * x(0) * x(0) + c * x(0) - 6;
              return u * u + 10 * (1 - t) * std::cos(x(0)) + 10;
            },
            0.397887357729738};
  if (name == "constant")
    return {name, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1),
            [](const Eigen::VectorXd&) { return 1.0; }, 1.0};
  throw Error("unknown objective '" + name + "'");
}

/// Tensor grid with points_per_dim points per axis, in unit-cube coordinates
/// (row per candidate, first axis fastest).
inline Eigen::MatrixXd unit_grid(Eigen::Index dim, int points_per_dim) {
  if (points_per_dim < 2) throw Error("grid needs at least 2 points per dimension");
  Eigen::Index total = 1;
  for (Eigen::Index d = 0; d < dim; ++d) total *= points_per_dim;
  Eigen::MatrixXd grid(total, dim);
  for (Eigen::Index r = 0; r < total; ++r) {
    Eigen::Index rest = r;
    for (Eigen::Index d = 0; d < dim; ++d) {
      grid(r, d) = static_cast<double>(rest % points_per_dim) / (points_per_dim - 1);
      rest /= points_per_dim;
    }
  }
  return grid;
}

inline Eigen::VectorXd from_unit(const Objective& obj, const Eigen::RowVectorXd& u) {
  return obj.lower + (obj.upper - obj.lower).cwiseProduct(u.transpose());
}

struct BOConfig {
  int points_per_dim = 100;
  AcquisitionSpec acquisition;
  int iterations = 10;
  int initial_points = 3;
  std::uint64_t seed = 0;
  /// Fit the GP to (y - mean) / sd so the acquisition is invariant to the
  /// scale of the objective.
  bool standardize = true;
  std::vector<GPHyper> hypers = default_hyper_grid();

  void validate() const {
    if (iterations < 1) throw Error("BO needs at least one iteration");
    if (initial_points < 1) throw Error("BO needs at least one initial point");
    if (hypers.empty()) throw Error("BO needs at least one hyperparameter");
    for (const auto& h : hypers) h.validate();
  }
};

/// Distinct seeded grid rows for the initial design.
inline std::vector<Eigen::Index> initial_design(Eigen::Index candidates, int count, std::uint64_t seed) {
  if (count > candidates) throw Error("more initial points than grid candidates");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(candidates));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Engine rng = make_engine(seed, 0x424f'494eULL);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, candidates - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

/// One posterior per hyperparameter, fitted to (optionally standardized) data.
inline std::vector<GPPosterior> fit_posteriors(GPData data, const std::vector<GPHyper>& hypers,
                                               bool standardize) {
  if (standardize && data.size() > 0) {
    const double mean = data.y.mean();
    const double sd = std::sqrt((data.y.array() - mean).square().mean());
    data.y = (data.y.array() - mean) / (sd > 0.0 ? sd : 1.0);
  }
  std::vector<GPPosterior> out;
  for (const auto& h : hypers) out.emplace_back(data, h);
  return out;
}

/// Acquisition at every candidate row.
inline std::vector<AcquisitionValue> acquisition_curve(const std::vector<GPPosterior>& posteriors,
                                                       const Eigen::MatrixXd& candidates,
                                                       const AcquisitionSpec& spec) {
  std::vector<AcquisitionValue> out;
  out.reserve(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index r = 0; r < candidates.rows(); ++r)
    out.push_back(acquisition(predictive_mixture(posteriors, candidates.row(r)), spec));
  return out;
}

/// First index of the maximum.
inline std::size_t argmax(const std::vector<AcquisitionValue>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i].value > values[best].value) best = i;
  return best;
}

struct BOStep {
  int iter = 0;  // 0 for the initial design
  Eigen::VectorXd x;
  double y = 0.0;
  double ir = 0.0;  // |f* - best observed|
  double seconds = 0.0;
  Eigen::Index candidate = 0;
  int fallbacks = 0;
};

struct BOTrace {
  std::string objective;
  std::string acquisition;
  std::vector<BOStep> steps;
};

/// Grid-based BO: seeded initial design, then per iteration the acquisition
/// argmax over the candidate grid is queried and the GP refitted.
inline BOTrace bo_run(const Objective& obj, const BOConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd grid = unit_grid(obj.dim(), cfg.points_per_dim);
  BOTrace trace{obj.name, to_string(cfg.acquisition), {}};
  GPData data{Eigen::MatrixXd(0, obj.dim()), Eigen::VectorXd(0)};
  double best = std::numeric_limits<double>::infinity();

  const auto observe = [&](Eigen::Index cand, int iter, double seconds, int fallbacks) {
    const Eigen::VectorXd x = from_unit(obj, grid.row(cand));
    const double y = obj.f(x);
    data.x.conservativeResize(data.size() + 1, Eigen::NoChange);
    data.x.row(data.size()) = grid.row(cand);
    data.y.conservativeResize(data.size() + 1);
    data.y(data.size() - 1) = y;
    best = std::min(best, y);
    trace.steps.push_back({iter, x, y, std::abs(obj.f_star - best), seconds, cand, fallbacks});
  };

  for (Eigen::Index cand : initial_design(grid.rows(), cfg.initial_points, cfg.seed))
    observe(cand, 0, 0.0, 0);
  for (int it = 1; it <= cfg.iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    const auto posteriors = fit_posteriors(data, cfg.hypers, cfg.standardize);
    const auto curve = acquisition_curve(posteriors, grid, cfg.acquisition);
    const int fallbacks = static_cast<int>(
        std::count_if(curve.begin(), curve.end(), [](const AcquisitionValue& v) { return v.fallback; }));
    const auto pick = static_cast<Eigen::Index>(argmax(curve));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    observe(pick, it, secs, fallbacks);
  }
  return trace;
}

/// CSV with columns iter, x0[, x1 ...], y, ir, seconds.
inline void write_trace_csv(std::ostream& out, const BOTrace& trace) {
  const Eigen::Index dim = trace.steps.empty() ? 1 : trace.steps.front().x.size();
  out << "iter";
  for (Eigen::Index d = 0; d < dim; ++d) out << ",x" << d;
  out << ",y,ir,seconds\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : trace.steps) {
    out << s.iter;
    for (Eigen::Index d = 0; d < s.x.size(); ++d) out << ',' << s.x(d);
    out << ',' << s.y << ',' << s.ir << ',' << s.seconds << '\n';
  }
}

}  // namespace meme

#endif  // MEME_BO_HPP
