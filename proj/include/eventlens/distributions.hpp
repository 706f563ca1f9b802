#pragma once

namespace eventlens {

/// Regularized incomplete beta I_x(a, b). Pass `y` = 1 - x when it is known
/// more precisely than the subtraction would give.
double incomplete_beta(double a, double b, double x, double y);
inline double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

/// P(F_{d1,d2} > f).
double f_cdf_upper(double f, double d1, double d2);

/// 2 * P(T_dof > |t|). Fractional dof is accepted (Welch tests).
double t_cdf_two_sided(double t, double dof);

/// P(T_dof > t).
double t_cdf_upper(double t, double dof);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace eventlens
