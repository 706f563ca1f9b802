#include <gtest/gtest.h>

#include "eventlens/distributions.hpp"
#include "eventlens/error.hpp"
#include "eventlens/spillover.hpp"
#include "helpers.hpp"

using namespace eventlens;

namespace {

struct Pair {
  std::vector<double> x, y;
};

/// z_t = A z_{t-1} + e_t with unit-variance normal shocks, after a burn-in.
Pair simulate_var1(const Eigen::Matrix2d& A, std::size_t T, RngStream rng) {
  Pair out;
  Eigen::Vector2d z = Eigen::Vector2d::Zero();
  for (std::size_t t = 0; t < T + 100; ++t) {
    const double e0 = rng.normal(), e1 = rng.normal();
    z = A * z + Eigen::Vector2d(e0, e1);
    if (t >= 100) {
      out.x.push_back(z(0));
      out.y.push_back(z(1));
    }
  }
  return out;
}

/// y_t = c x_{t-lag} + e_t with x white noise.
Pair coupled(std::size_t T, int lag, double c, RngStream rng) {
  Pair out;
  out.x = testutil::normals(rng.substream(0), T);
  out.y = testutil::normals(rng.substream(1), T);
  for (std::size_t t = static_cast<std::size_t>(lag); t < T; ++t) out.y[t] += c * out.x[t - static_cast<std::size_t>(lag)];
  return out;
}

}  // namespace

TEST(FitVar, WhiteNoiseCoefficientsNearZero) {
  const Pair d = simulate_var1(Eigen::Matrix2d::Zero(), 5000, RngStream(1));
  const VarModel m = fit_var(d.x, d.y, 1);
  EXPECT_LE(m.coeff[0].cwiseAbs().maxCoeff(), 0.05);
}

TEST(FitVar, RecoversVar1) {
  Eigen::Matrix2d A;
  A << 0.5, 0.0, 0.3, 0.2;
  const Pair d = simulate_var1(A, 5000, RngStream(2));
  const VarModel m = fit_var(d.x, d.y, 1);
  EXPECT_LE((m.coeff[0] - A).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_NEAR(m.resid_cov(0, 0), 1.0, 0.06);
  EXPECT_TRUE(m.is_stable());
}

TEST(FitVar, MatchesNormalEquationSolve) {
  const std::vector<double> x{0.3, -0.1, 0.4, 0.2, -0.5, 0.1, 0.0, 0.6, -0.2, 0.3, -0.4, 0.2};
  const std::vector<double> y{0.1, 0.2, -0.3, 0.5, 0.1, -0.2, 0.4, -0.1, 0.0, 0.2, 0.3, -0.6};
  const VarModel m = fit_var(x, y, 1);
  Eigen::MatrixXd X(11, 3);
  Eigen::VectorXd yx(11), yy(11);
  for (int t = 1; t < 12; ++t) {
    X.row(t - 1) << 1.0, x[t - 1], y[t - 1];
    yx(t - 1) = x[t];
    yy(t - 1) = y[t];
  }
  const Eigen::VectorXd bx = testutil::normal_equation_solve(X, yx);
  const Eigen::VectorXd by = testutil::normal_equation_solve(X, yy);
  EXPECT_NEAR(m.intercepts(0), bx(0), 1e-8);
  EXPECT_NEAR(m.coeff[0](0, 0), bx(1), 1e-8);
  EXPECT_NEAR(m.coeff[0](0, 1), bx(2), 1e-8);
  EXPECT_NEAR(m.intercepts(1), by(0), 1e-8);
  EXPECT_NEAR(m.coeff[0](1, 0), by(1), 1e-8);
  EXPECT_NEAR(m.coeff[0](1, 1), by(2), 1e-8);
  EXPECT_EQ(m.n_obs, 11);
  EXPECT_NEAR(m.resid_cov(0, 0), m.ssr(0) / 11.0, 1e-15);
}

TEST(FitVar, SampleSizeAndDomain) {
  const std::vector<double> x(10, 0.1), y(10, 0.2);
  EXPECT_THROW(fit_var(x, y, 2), SampleSizeError);
  EXPECT_THROW(fit_var(x, std::vector<double>(9, 0.0), 1), DomainError);
}

TEST(SelectLag, BicPrefersOneUnderNull) {
  int ones = 0;
  const int trials = 100;
  for (int s = 0; s < trials; ++s) {
    const Pair d = coupled(250, 1, 0.0, RngStream(1000 + static_cast<std::uint64_t>(s)));
    ones += select_lag(d.x, d.y, 6).p_bic == 1;
  }
  EXPECT_GE(ones, 80);
}

TEST(SelectLag, FindsLagTwo) {
  int aic = 0, bic = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    const Pair d = coupled(1000, 2, 0.6, RngStream(2000 + static_cast<std::uint64_t>(s)));
    const LagSelection sel = select_lag(d.x, d.y, 6);
    aic += sel.p_aic == 2;
    bic += sel.p_bic == 2;
    ASSERT_EQ(sel.table.size(), 6u);
    EXPECT_EQ(sel.n_obs, 994);
  }
  EXPECT_GE(aic, 45);
  EXPECT_GE(bic, 45);
}

TEST(Granger, PowerAndSize) {
  int forward = 0, reverse = 0;
  const int trials = 500;
  for (int s = 0; s < trials; ++s) {
    const Pair d = coupled(250, 1, 0.6, RngStream(3000 + static_cast<std::uint64_t>(s)));
    forward += granger_test(d.x, d.y, 1, Direction::TreatmentToControl).p_value < 0.05;
    reverse += granger_test(d.x, d.y, 1, Direction::ControlToTreatment).p_value < 0.05;
  }
  EXPECT_GE(forward, 475);
  EXPECT_NEAR(reverse / 500.0, 0.05, 0.03);
}

TEST(Granger, FMatchesRestrictedRegression) {
  const Pair d = coupled(300, 2, 0.3, RngStream(4));
  const GrangerResult g = granger_test(d.x, d.y, 2, Direction::TreatmentToControl);
  // Restricted: y on its own two lags; unrestricted adds two lags of x.
  const int n = 298;
  Eigen::MatrixXd R(n, 3), U(n, 5);
  Eigen::VectorXd yv(n);
  for (int t = 2; t < 300; ++t) {
    R.row(t - 2) << 1.0, d.y[t - 1], d.y[t - 2];
    U.row(t - 2) << 1.0, d.x[t - 1], d.x[t - 2], d.y[t - 1], d.y[t - 2];
    yv(t - 2) = d.y[t];
  }
  const double ssr_r = (yv - R * testutil::normal_equation_solve(R, yv)).squaredNorm();
  const double ssr_u = (yv - U * testutil::normal_equation_solve(U, yv)).squaredNorm();
  const double F = ((ssr_r - ssr_u) / 2.0) / (ssr_u / (n - 5));
  EXPECT_NEAR(g.f_stat, F, 1e-8 * F);
  EXPECT_EQ(g.dof_num, 2);
  EXPECT_EQ(g.dof_den, n - 5);
  EXPECT_NEAR(g.p_value, f_cdf_upper(F, 2, n - 5), 1e-10);

  const VarModel m = fit_var(d.x, d.y, 2);
  EXPECT_NEAR(g.ssr_unrestricted, m.ssr(1), 1e-12 * m.ssr(1));
}

TEST(Granger, ScaleInvariance) {
  const Pair d = coupled(200, 1, 0.4, RngStream(5));
  std::vector<double> xs = d.x, ys = d.y;
  for (auto& v : xs) v *= 37.5;
  for (auto& v : ys) v *= 0.002;
  for (Direction dir : {Direction::TreatmentToControl, Direction::ControlToTreatment}) {
    const double a = granger_test(d.x, d.y, 3, dir).f_stat;
    const double b = granger_test(xs, ys, 3, dir).f_stat;
    EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, a));
  }
}

TEST(GrangerScan, NullMostlyInsignificant) {
  int clean = 0;
  for (int s = 0; s < 100; ++s) {
    const Pair d = coupled(250, 1, 0.0, RngStream(6000 + static_cast<std::uint64_t>(s)));
    bool any = false;
    for (const auto& row : granger_scan(d.x, d.y, 6)) {
      any |= row.treatment_to_control.p_value < 0.05 || row.control_to_treatment.p_value < 0.05;
    }
    clean += !any;
  }
  EXPECT_GE(clean, 70);
}

TEST(GrangerScan, StrongestAtLagTwo) {
  int hits = 0;
  const int trials = 100;
  for (int s = 0; s < trials; ++s) {
    const Pair d = coupled(500, 2, 0.3, RngStream(7000 + static_cast<std::uint64_t>(s)));
    const auto scan = granger_scan(d.x, d.y, 5);
    ASSERT_EQ(scan.size(), 5u);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.size(); ++i) {
      if (scan[i].treatment_to_control.p_value < scan[best].treatment_to_control.p_value) best = i;
    }
    hits += scan[best].lag == 2;
  }
  EXPECT_GE(hits, 80);
}

TEST(Irf, NoDynamics) {
  VarModel m;
  m.p = 1;
  m.coeff = {Eigen::Matrix2d::Zero()};
  m.resid_cov << 2.0, 0.5, 0.5, 1.0;
  const IrfResult irf = impulse_responses(m, 5);
  const Eigen::Matrix2d P = m.resid_cov.llt().matrixL();
  EXPECT_LE((irf.responses[0] - P).cwiseAbs().maxCoeff(), 1e-15);
  for (int h = 1; h <= 5; ++h) EXPECT_EQ(irf.responses[static_cast<std::size_t>(h)].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Irf, MatrixPowerOracle) {
  VarModel m;
  m.p = 1;
  Eigen::Matrix2d A;
  A << 0.5, 0.0, 0.0, 0.3;
  m.coeff = {A};
  m.resid_cov.setIdentity();
  const IrfResult irf = impulse_responses(m, 10);
  Eigen::Matrix2d power = Eigen::Matrix2d::Identity();
  for (int h = 0; h <= 10; ++h) {
    EXPECT_LE((irf.responses[static_cast<std::size_t>(h)] - power).cwiseAbs().maxCoeff(), 1e-10) << h;
    power *= A;
  }
}

TEST(Irf, CholeskyZeroAtImpact) {
  const Pair d = coupled(400, 1, 0.5, RngStream(8));
  const VarModel m = fit_var(d.x, d.y, 2);
  const IrfResult tf = impulse_responses(m, 10, Ordering::TreatmentFirst);
  EXPECT_EQ(tf.responses[0](0, 1), 0.0);
  const IrfResult cf = impulse_responses(m, 10, Ordering::ControlFirst);
  EXPECT_EQ(cf.responses[0](1, 0), 0.0);
  EXPECT_LE((tf.impact * tf.impact.transpose() - m.resid_cov).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((cf.impact * cf.impact.transpose() - m.resid_cov).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Irf, MaMatchesImpulseSimulation) {
  const Pair d = coupled(400, 2, 0.5, RngStream(9));
  const VarModel m = fit_var(d.x, d.y, 3);
  const auto psi = ma_coefficients(m, 12);
  for (int shock = 0; shock < 2; ++shock) {
    // Propagate a unit impulse through the lag polynomial, intercepts off.
    std::vector<Eigen::Vector2d> path;
    for (int h = 0; h <= 12; ++h) {
      Eigen::Vector2d z = Eigen::Vector2d::Zero();
      if (h == 0) z(shock) = 1.0;
      for (int i = 1; i <= m.p && i <= h; ++i) z += m.coeff[static_cast<std::size_t>(i - 1)] * path[static_cast<std::size_t>(h - i)];
      path.push_back(z);
      EXPECT_LE((psi[static_cast<std::size_t>(h)].col(shock) - z).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Irf, StableResponsesDecay) {
  const Pair d = coupled(500, 1, 0.5, RngStream(10));
  const IrfResult irf = impulse_responses(fit_var(d.x, d.y, 2), 40);
  EXPECT_TRUE(irf.stable);
  EXPECT_LT(irf.responses[40].norm(), 1e-3 * irf.responses[0].norm());
}

TEST(Irf, UnstableIsFlagged) {
  VarModel m;
  m.p = 1;
  Eigen::Matrix2d A;
  A << 1.1, 0.0, 0.0, 0.5;
  m.coeff = {A};
  m.resid_cov.setIdentity();
  const IrfResult irf = impulse_responses(m, 5);
  EXPECT_FALSE(irf.stable);
  EXPECT_NEAR(irf.spectral_radius, 1.1, 1e-12);
}

TEST(Ccf, SelfCorrelationAtZero) {
  const auto x = testutil::normals(RngStream(11), 300);
  const CcfResult c = cross_correlation(x, x, 10);
  EXPECT_NEAR(c.correlations[10], 1.0, 1e-15);
  EXPECT_EQ(c.lags[10], 0);
  EXPECT_EQ(c.n_pairs[10], 300);
  EXPECT_EQ(c.n_pairs[0], 290);
}

TEST(Ccf, ShiftedCopyPeaksAtLag) {
  const auto x = testutil::normals(RngStream(12), 2000);
  std::vector<double> y(2000, 0.0);
  for (std::size_t t = 3; t < y.size(); ++t) y[t] = x[t - 3];
  const CcfResult c = cross_correlation(x, y, 10);
  for (std::size_t i = 0; i < c.lags.size(); ++i) {
    if (c.lags[i] == 3) {
      EXPECT_NEAR(c.correlations[i], 1.0, 1e-3);
    } else {
      EXPECT_LT(std::abs(c.correlations[i]), 0.1) << c.lags[i];
    }
  }
}

TEST(Ccf, BruteForcePairs) {
  const auto x = testutil::normals(RngStream(13), 50);
  const auto y = testutil::normals(RngStream(14), 50);
  const CcfResult c = cross_correlation(x, y, 5);
  for (std::size_t i = 0; i < c.lags.size(); ++i) {
    const int lag = c.lags[i];
    std::vector<double> a, b;
    for (int t = 0; t < 50; ++t) {
      if (t + lag >= 0 && t + lag < 50) {
        a.push_back(x[static_cast<std::size_t>(t)]);
        b.push_back(y[static_cast<std::size_t>(t + lag)]);
      }
    }
    double ma = 0, mb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ma += a[k];
      mb += b[k];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      sab += (a[k] - ma) * (b[k] - mb);
      saa += (a[k] - ma) * (a[k] - ma);
      sbb += (b[k] - mb) * (b[k] - mb);
    }
    EXPECT_NEAR(c.correlations[i], sab / std::sqrt(saa * sbb), 1e-12);
  }
}
