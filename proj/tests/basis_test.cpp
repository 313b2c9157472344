#include "meme/basis.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using meme::BasisKind;

TEST(BasisEval, ConstantFirstMember) {
  for (auto kind : {BasisKind::power, BasisKind::chebyshev, BasisKind::legendre})
    for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(meme::basis_eval(kind, 0, x), 1.0);
}

TEST(BasisEval, KnownValues) {
  EXPECT_DOUBLE_EQ(meme::basis_eval(BasisKind::legendre, 0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(meme::basis_eval(BasisKind::legendre, 1, 0.75), 0.5);
  EXPECT_NEAR(meme::basis_eval(BasisKind::chebyshev, 3, 0.5), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(meme::basis_eval(BasisKind::power, 3, 0.5), 0.125);
}

TEST(BasisEval, RecurrenceMatchesExplicitForms) {
  for (int n = 0; n <= 20; ++n)
    for (double x = 0.0; x <= 1.0; x += 0.0625) {
      EXPECT_NEAR(meme::basis_eval(BasisKind::legendre, n, x), oracle::legendre_explicit(n, x), 1e-10)
          << n << " " << x;
      EXPECT_NEAR(meme::basis_eval(BasisKind::chebyshev, n, x), oracle::chebyshev_explicit(n, x),
                  1e-12);
    }
}

TEST(BasisEval, RejectsOutOfDomain) {
  EXPECT_THROW(meme::basis_eval(BasisKind::legendre, 2, -0.1), meme::Error);
  EXPECT_THROW(meme::basis_eval(BasisKind::power, 2, 1.5), meme::Error);
}

TEST(BasisEval, ParseNames) {
  EXPECT_EQ(meme::parse_basis("legendre"), BasisKind::legendre);
  EXPECT_EQ(meme::parse_basis("chebyshev"), BasisKind::chebyshev);
  EXPECT_EQ(meme::parse_basis("power"), BasisKind::power);
  EXPECT_THROW(meme::parse_basis("hermite"), meme::Error);
}

TEST(PowerToBasis, UniformMomentsAreOrthogonalToConstants) {
  meme::MomentVector mu{BasisKind::power, {}};
  for (int i = 0; i <= 12; ++i) mu.values.push_back(1.0 / (i + 1));
  const auto leg = meme::power_to_basis(mu, BasisKind::legendre);
  EXPECT_DOUBLE_EQ(leg.values[0], 1.0);
  for (std::size_t i = 1; i < leg.values.size(); ++i) EXPECT_NEAR(leg.values[i], 0.0, 1e-9) << i;
  EXPECT_EQ(leg.basis, BasisKind::legendre);
}

TEST(PowerToBasis, FirstOrder) {
  const meme::MomentVector mu{BasisKind::power, {1.0, 0.3}};
  const auto leg = meme::power_to_basis(mu, BasisKind::legendre);
  EXPECT_DOUBLE_EQ(leg.values[1], 2 * 0.3 - 1);
}

TEST(PowerToBasis, DiscreteMeasureMatchesDirectEvaluation) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int m = 8;
  std::vector<double> atoms(5), w(5);
  double total = 0;
  for (int a = 0; a < 5; ++a) {
    atoms[a] = u(rng);
    w[a] = u(rng) + 0.1;
    total += w[a];
  }
  meme::MomentVector power{BasisKind::power, std::vector<double>(m + 1, 0.0)};
  for (int i = 0; i <= m; ++i)
    for (int a = 0; a < 5; ++a) power.values[i] += w[a] / total * std::pow(atoms[a], i);
  power.values[0] = 1.0;
  for (auto kind : {BasisKind::legendre, BasisKind::chebyshev}) {
    const auto got = meme::power_to_basis(power, kind);
    for (int i = 0; i <= m; ++i) {
      double direct = 0;
      for (int a = 0; a < 5; ++a)
        direct += w[a] / total *
                  (kind == BasisKind::legendre ? oracle::legendre_explicit(i, atoms[a])
                                               : oracle::chebyshev_explicit(i, atoms[a]));
      EXPECT_NEAR(got.values[i], direct, 1e-10) << meme::to_string(kind) << " " << i;
    }
  }
}

TEST(PowerToBasis, Errors) {
  const meme::MomentVector leg{BasisKind::legendre, {1.0, 0.0}};
  EXPECT_THROW(meme::power_to_basis(leg, BasisKind::chebyshev), meme::Error);
  meme::MomentVector big{BasisKind::power, std::vector<double>(62, 0.5)};
  big.values[0] = 1.0;
  EXPECT_THROW(meme::power_to_basis(big, BasisKind::legendre), meme::Error);
}
