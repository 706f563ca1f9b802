#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "eventlens/market_data.hpp"
#include "eventlens/rng.hpp"

namespace testutil {

using eventlens::Date;

inline std::vector<Date> business_days(Date start, std::size_t n) {
  std::vector<Date> out;
  for (Date d = start; out.size() < n; d = d.plus_days(1)) {
    if (!d.is_weekend()) out.push_back(d);
  }
  return out;
}

inline std::vector<double> normals(eventlens::RngStream rng, std::size_t n, double sd = 1.0) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.normal(0.0, sd);
  return out;
}

/// Least squares through the normal equations with a pivoted LDLT solve.
inline Eigen::VectorXd normal_equation_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd xtx = X.transpose() * X;
  return xtx.ldlt().solve(X.transpose() * y);
}

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

/// P(F > f) by integrating the F density with tanh-sinh quadrature over
/// the shorter tail, in the substitution x = d1 f / (d1 f + d2).
inline double f_upper_quadrature(double f, double d1, double d2) {
  const double a = d1 / 2.0, b = d2 / 2.0;
  const double lb = log_beta(a, b);
  auto beta_pdf = [&](double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb);
  };
  const double x = d1 * f / (d1 * f + d2);
  boost::math::quadrature::tanh_sinh<double> ts;
  if (x <= 0.5) return 1.0 - ts.integrate(beta_pdf, 0.0, x);
  return ts.integrate(beta_pdf, x, 1.0);
}

/// 2 P(T > |t|) from the Student t density with adaptive Gauss-Kronrod
/// quadrature on [|t|, inf).
inline double t_two_sided_quadrature(double t, double dof) {
  const double c = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) - 0.5 * std::log(dof * M_PI);
  auto pdf = [&](double x) { return std::exp(c - (dof + 1.0) / 2.0 * std::log1p(x * x / dof)); };
  const double tail = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      pdf, std::abs(t), std::numeric_limits<double>::infinity(), 15, 1e-14);
  return std::min(1.0, 2.0 * tail);
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eventlens_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
