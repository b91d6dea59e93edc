#pragma once

#include "iscat/types.hpp"

namespace iscat {

// Cylinder Bessel functions of low integer order. Thin wrappers over the
// libm routines, which are accurate to ~1e-15 absolute over the argument
// ranges used here (kappa * distance up to a few hundred).
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);
double bessel_y1(double x);

/// J_n for general integer order (series/recurrence implementation).
double bessel_jn(int n, double x);
/// Y_n for general integer order; x > 0.
double bessel_yn(int n, double x);

/// H^(1)_0(x) = J_0(x) + i Y_0(x), x > 0.
cdouble hankel1_0(double x);
/// H^(1)_1(x) = J_1(x) + i Y_1(x), x > 0.
cdouble hankel1_1(double x);
/// H^(1)_n(x), x > 0.
cdouble hankel1_n(int n, double x);

/// Derivatives via Z_n'(x) = (Z_{n-1}(x) - Z_{n+1}(x)) / 2.
double bessel_jn_deriv(int n, double x);
cdouble hankel1_n_deriv(int n, double x);

}  // namespace iscat
