#include "meme/bo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using meme::AcquisitionSpec;
using meme::GaussianMixture1D;
using meme::GPData;
using meme::GPHyper;

namespace {

GPData noisy_data(int n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GPData d{Eigen::MatrixXd(n, dim), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) d.x(i, j) = u(rng);
    d.y(i) = std::sin(6 * d.x(i, 0)) + u(rng);
  }
  return d;
}

std::vector<double> values(const std::vector<meme::AcquisitionValue>& v) {
  std::vector<double> out;
  for (const auto& a : v) out.push_back(a.value);
  return out;
}

const double kGaussEntropy = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e);

}  // namespace

TEST(GpPosterior, PriorWithoutData) {
  const GPData empty{Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)};
  const auto p = meme::gp_posterior(empty, {0.3, 1.7, 1e-6}, Eigen::RowVector2d(0.2, 0.4));
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_EQ(p.variance, 1.7);
}

TEST(GpPosterior, InterpolatesObservations) {
  const auto d = noisy_data(6, 1, 3);
  const GPHyper h{0.2, 1.0, 1e-12};
  for (int i = 0; i < 6; ++i) {
    const auto p = meme::gp_posterior(d, h, d.x.row(i));
    EXPECT_NEAR(p.mean, d.y(i), 1e-4);
    EXPECT_LT(p.variance, 1e-6);
  }
}

TEST(GpPosterior, MatchesExplicitInverse) {
  const auto d = noisy_data(5, 2, 8);
  const GPHyper h{0.35, 1.3, 1e-3};
  Eigen::MatrixXd k(5, 5);
  const auto kern = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return h.signal_var * std::exp(-(a - b).squaredNorm() / (2 * h.lengthscale * h.lengthscale));
  };
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) k(i, j) = kern(d.x.row(i), d.x.row(j)) + (i == j ? h.noise_var : 0.0);
  const Eigen::MatrixXd kinv = k.inverse();
  for (const Eigen::RowVector2d x : {Eigen::RowVector2d(0.1, 0.9), Eigen::RowVector2d(0.5, 0.5)}) {
    Eigen::VectorXd ks(5);
    for (int i = 0; i < 5; ++i) ks(i) = kern(d.x.row(i), x);
    const auto p = meme::gp_posterior(d, h, x);
    EXPECT_NEAR(p.mean, ks.dot(kinv * d.y), 1e-8);
    EXPECT_NEAR(p.variance, h.signal_var - ks.dot(kinv * ks), 1e-8);
  }
}

TEST(GpPosterior, Errors) {
  GPData dup{Eigen::MatrixXd(2, 1), Eigen::VectorXd(2)};
  dup.x << 0.5, 0.5;
  dup.y << 1.0, 2.0;
  EXPECT_THROW(meme::GPPosterior(dup, {0.2, 1.0, 1e-20}), meme::Error);
  EXPECT_THROW(meme::GPPosterior(dup, {0.2, 1.0, 0.0}), meme::Error);
  GPData bad{Eigen::MatrixXd(3, 1), Eigen::VectorXd(2)};
  EXPECT_THROW(meme::GPPosterior(bad, {}), meme::Error);
  const meme::GPPosterior ok(noisy_data(3, 2, 1), {});
  EXPECT_THROW(ok.predict(Eigen::RowVectorXd::Zero(3)), meme::Error);
}

TEST(PredictiveMixture, ComponentsMatchTheirPosteriors) {
  const auto d = noisy_data(7, 1, 5);
  const auto hypers = meme::default_hyper_grid();
  ASSERT_EQ(hypers.size(), 8u);
  const Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(1, 0.37);
  const auto mix = meme::predictive_mixture(d, hypers, x);
  ASSERT_EQ(mix.size(), 8u);
  EXPECT_NO_THROW(mix.validate());
  for (std::size_t j = 0; j < hypers.size(); ++j) {
    const auto p = meme::gp_posterior(d, hypers[j], x);
    EXPECT_DOUBLE_EQ(mix.components[j].mean, p.mean);
    EXPECT_DOUBLE_EQ(mix.components[j].stddev, std::sqrt(p.variance + hypers[j].noise_var));
    EXPECT_DOUBLE_EQ(mix.components[j].weight, 1.0 / 8);
  }
}

TEST(PredictiveMixture, SingleAndDuplicatedHypers) {
  const auto d = noisy_data(4, 1, 2);
  const Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(1, 0.6);
  const GPHyper h{0.15, 1.2, 1e-6};
  const auto one = meme::predictive_mixture(d, {h}, x);
  const auto three = meme::predictive_mixture(d, {h, h, h}, x);
  EXPECT_EQ(one.size(), 1u);
  for (double y : {-1.0, 0.0, 0.4, 2.5}) EXPECT_NEAR(meme::gmm_pdf(one, y), meme::gmm_pdf(three, y), 1e-14);
  EXPECT_THROW(meme::predictive_mixture(d, {}, x), meme::Error);
}

TEST(Acquisition, IdenticalComponentsCarryNoInformation) {
  const auto mix = GaussianMixture1D::uniform({0.3, 0.3, 0.3}, {0.8, 0.8, 0.8});
  EXPECT_NEAR(meme::acquisition(mix, meme::parse_acquisition("quad")).value, 0.0, 1e-6);
  EXPECT_NEAR(meme::acquisition(mix, meme::parse_acquisition("meme-legendre-10")).value, 0.0, 2e-2);
  EXPECT_NEAR(meme::acquisition(mix, meme::parse_acquisition("mm")).value, 0.0, 1e-12);
}

TEST(Acquisition, SeparatedPairGivesLogTwo) {
  const auto mix = GaussianMixture1D::uniform({-10.0, 10.0}, {0.5, 0.5});
  EXPECT_NEAR(meme::acquisition(mix, {}).value, std::log(2.0), 1e-6);
}

TEST(Acquisition, QuadNonnegativeAndMemeDominates) {
  const auto d = noisy_data(6, 1, 9);
  const auto post = meme::fit_posteriors(d, meme::default_hyper_grid(), true);
  const auto quad = meme::parse_acquisition("quad");
  const auto memel = meme::parse_acquisition("meme-legendre-10");
  for (int i = 0; i <= 20; ++i) {
    const auto mix = meme::predictive_mixture(post, Eigen::RowVectorXd::Constant(1, i / 20.0));
    const double q = meme::acquisition(mix, quad).value;
    const auto m = meme::acquisition(mix, memel);
    EXPECT_GE(q, -1e-9) << i;
    EXPECT_FALSE(m.fallback);
    EXPECT_GE(m.value, q - 1e-3) << i;
  }
}

TEST(Acquisition, SolverFailureFallsBackWithFlag) {
  auto spec = meme::parse_acquisition("meme-legendre-10");
  spec.solver.max_newton_iters = 1;
  const auto mix = GaussianMixture1D::uniform({-2.0, 2.0}, {0.2, 0.2});
  const auto v = meme::acquisition(mix, spec);
  EXPECT_TRUE(v.fallback);
  EXPECT_FALSE(v.error.empty());
  EXPECT_NEAR(v.value, meme::acquisition(mix, {}).value, 1e-12);
}

TEST(Acquisition, ParseNames) {
  EXPECT_EQ(meme::parse_acquisition("quad").method, meme::EntropyMethod::quad);
  EXPECT_EQ(meme::parse_acquisition("mm").method, meme::EntropyMethod::mm);
  const auto spec = meme::parse_acquisition("meme-chebyshev-8");
  EXPECT_EQ(spec.method, meme::EntropyMethod::meme);
  EXPECT_EQ(spec.basis, meme::BasisKind::chebyshev);
  EXPECT_EQ(spec.moments, 8);
  EXPECT_EQ(meme::to_string(meme::parse_acquisition("meme-legendre-10")), "meme-legendre-10");
  for (const char* bad : {"meme", "meme-legendre-", "meme-legendre-x", "meme-foo-10", "meme-legendre-1", "ucb"})
    EXPECT_THROW(meme::parse_acquisition(bad), meme::Error) << bad;
}

TEST(Objectives, KnownMinima) {
  const auto s = meme::objective_by_name("sinusoid");
  EXPECT_NEAR(s.f(Eigen::VectorXd::Constant(1, 5.145735290768028)), s.f_star, 1e-14);
  EXPECT_GT(s.f(Eigen::VectorXd::Constant(1, 5.1457)), s.f_star);
  const auto b = meme::objective_by_name("branin");
  for (const Eigen::Vector2d x : {Eigen::Vector2d(-std::numbers::pi, 12.275), Eigen::Vector2d(std::numbers::pi, 2.275),
                                  Eigen::Vector2d(9.42478, 2.475)})
    EXPECT_NEAR(b.f(x), b.f_star, 1e-5);
  EXPECT_THROW(meme::objective_by_name("hartmann"), meme::Error);
}

TEST(Grid, TensorLayoutAndInitialDesign) {
  const auto g = meme::unit_grid(2, 3);
  ASSERT_EQ(g.rows(), 9);
  EXPECT_EQ(g.row(1), Eigen::RowVector2d(0.5, 0.0));
  EXPECT_EQ(g.row(3), Eigen::RowVector2d(0.0, 0.5));
  EXPECT_EQ(g.row(8), Eigen::RowVector2d(1.0, 1.0));
  const auto a = meme::initial_design(50, 10, 4);
  EXPECT_EQ(a, meme::initial_design(50, 10, 4));
  EXPECT_NE(a, meme::initial_design(50, 10, 5));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::unique(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_THROW(meme::initial_design(5, 6, 0), meme::Error);
}

TEST(BoRun, ConstantObjectiveHasZeroRegret) {
  meme::BOConfig cfg;
  cfg.points_per_dim = 20;
  cfg.iterations = 3;
  const auto trace = meme::bo_run(meme::objective_by_name("constant"), cfg);
  ASSERT_EQ(trace.steps.size(), 6u);
  for (const auto& s : trace.steps) EXPECT_EQ(s.ir, 0.0);
}

TEST(BoRun, MedianRegretNonincreasing) {
  const auto obj = meme::objective_by_name("sinusoid");
  for (const char* method : {"quad", "meme-legendre-10"}) {
    const int seeds = std::string(method) == "quad" ? 10 : 3;
    std::vector<std::vector<double>> ir;
    for (int s = 0; s < seeds; ++s) {
      meme::BOConfig cfg;
      cfg.points_per_dim = 40;
      cfg.iterations = 4;
      cfg.seed = s;
      cfg.acquisition = meme::parse_acquisition(method);
      const auto trace = meme::bo_run(obj, cfg);
      std::vector<double> col;
      for (const auto& st : trace.steps) {
        col.push_back(st.ir);
        EXPECT_EQ(st.fallbacks, 0);
      }
      ir.push_back(col);
    }
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < ir[0].size(); ++step) {
      std::vector<double> c;
      for (const auto& r : ir) c.push_back(r[step]);
      std::nth_element(c.begin(), c.begin() + c.size() / 2, c.end());
      EXPECT_LE(c[c.size() / 2], prev) << method << " step " << step;
      prev = c[c.size() / 2];
    }
  }
}

TEST(BoRun, DeterministicPerSeed) {
  meme::BOConfig cfg;
  cfg.points_per_dim = 12;
  cfg.iterations = 3;
  cfg.seed = 7;
  const auto obj = meme::objective_by_name("branin");
  const auto a = meme::bo_run(obj, cfg);
  const auto b = meme::bo_run(obj, cfg);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].x, b.steps[i].x);
    EXPECT_EQ(a.steps[i].y, b.steps[i].y);
  }
}

TEST(BoRun, QuadArgmaxInvariantToOutputScale) {
  const auto obj = meme::objective_by_name("sinusoid");
  const auto grid = meme::unit_grid(1, 60);
  GPData d{Eigen::MatrixXd(4, 1), Eigen::VectorXd(4)};
  const auto idx = meme::initial_design(grid.rows(), 4, 2);
  for (int i = 0; i < 4; ++i) {
    d.x.row(i) = grid.row(idx[i]);
    d.y(i) = obj.f(meme::from_unit(obj, grid.row(idx[i])));
  }
  auto scaled = d;
  scaled.y *= 37.5;
  const auto hypers = meme::default_hyper_grid();
  const auto a = meme::acquisition_curve(meme::fit_posteriors(d, hypers, true), grid, {});
  const auto b = meme::acquisition_curve(meme::fit_posteriors(scaled, hypers, true), grid, {});
  EXPECT_EQ(meme::argmax(a), meme::argmax(b));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].value, b[i].value, 1e-6);
}

TEST(BoRun, MemeTracksQuadOnInitialStep) {
  const auto obj = meme::objective_by_name("sinusoid");
  const auto grid = meme::unit_grid(1, 100);
  GPData d{Eigen::MatrixXd(3, 1), Eigen::VectorXd(3)};
  const auto idx = meme::initial_design(grid.rows(), 3, 5);
  for (int i = 0; i < 3; ++i) {
    d.x.row(i) = grid.row(idx[i]);
    d.y(i) = obj.f(meme::from_unit(obj, grid.row(idx[i])));
  }
  const auto post = meme::fit_posteriors(d, meme::default_hyper_grid(), true);
  const auto q = values(meme::acquisition_curve(post, grid, {}));
  const auto m = values(meme::acquisition_curve(post, grid, meme::parse_acquisition("meme-legendre-10")));
  Eigen::Map<const Eigen::ArrayXd> qa(q.data(), q.size()), ma(m.data(), m.size());
  const Eigen::ArrayXd qc = qa - qa.mean(), mc = ma - ma.mean();
  EXPECT_GT((qc * mc).sum() / std::sqrt((qc * qc).sum() * (mc * mc).sum()), 0.95);
}

TEST(BoRun, TraceCsv) {
  meme::BOTrace t{"branin", "quad", {}};
  t.steps.push_back({0, Eigen::Vector2d(1.5, 2.0), 3.0, 0.25, 0.0, 4, 0});
  std::ostringstream out;
  meme::write_trace_csv(out, t);
  EXPECT_EQ(out.str(), "iter,x0,x1,y,ir,seconds\n0,1.5,2,3,0.25,0\n");
}

TEST(BoConfigTest, Validation) {
  meme::BOConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.iterations = 0;
  EXPECT_THROW(cfg.validate(), meme::Error);
  cfg = {};
  cfg.hypers.clear();
  EXPECT_THROW(cfg.validate(), meme::Error);
  EXPECT_THROW(meme::hyper_grid(0, 2), meme::Error);
}
