#include "eventlens/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eventlens/error.hpp"

namespace eventlens {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 200000;

// Continued fraction for I_x(a, b) by the modified Lentz method.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw DomainError("incomplete_beta: continued fraction did not converge (a=" + std::to_string(a) +
                    ", b=" + std::to_string(b) + ")");
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

void require_dof(double dof, const char* what) {
  require_finite(dof, what);
  if (dof < 1.0) throw DomainError(std::string(what) + " must be >= 1");
}

}  // namespace

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("incomplete_beta: shape parameters must be positive and finite");
  }
  require_finite(x, "incomplete_beta: x");
  if (x < 0.0 || x > 1.0) throw DomainError("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log(y) - log_beta(a, b));
  // The fraction converges fastest on the side of the mean.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double f_cdf_upper(double f, double d1, double d2) {
  require_finite(f, "f_cdf_upper: statistic");
  require_dof(d1, "f_cdf_upper: d1");
  require_dof(d2, "f_cdf_upper: d2");
  if (f < 0.0) throw DomainError("f_cdf_upper: statistic must be >= 0");
  if (f == 0.0) return 1.0;
  const double denom = d2 + d1 * f;
  return std::clamp(incomplete_beta(0.5 * d2, 0.5 * d1, d2 / denom, d1 * f / denom), 0.0, 1.0);
}

double t_cdf_two_sided(double t, double dof) {
  require_finite(t, "t_cdf_two_sided: statistic");
  require_dof(dof, "t_cdf_two_sided: dof");
  if (t == 0.0) return 1.0;
  const double t2 = t * t;
  const double denom = dof + t2;
  return std::clamp(incomplete_beta(0.5 * dof, 0.5, dof / denom, t2 / denom), 0.0, 1.0);
}

double t_cdf_upper(double t, double dof) {
  const double half = 0.5 * t_cdf_two_sided(t, dof);
  return t >= 0.0 ? half : 1.0 - half;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace eventlens
