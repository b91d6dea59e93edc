#include "iscat/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace iscat {

double bessel_j0(double x) { return ::j0(x); }
double bessel_j1(double x) { return ::j1(x); }
double bessel_y0(double x) { return ::y0(x); }
double bessel_y1(double x) { return ::y1(x); }

double bessel_jn(int n, double x) {
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_jn(-n, x);
  return ::jn(n, x);
}

double bessel_yn(int n, double x) {
  if (x <= 0.0) throw std::domain_error("bessel_yn: requires x > 0");
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_yn(-n, x);
  return ::yn(n, x);
}

cdouble hankel1_0(double x) { return {::j0(x), ::y0(x)}; }
cdouble hankel1_1(double x) { return {::j1(x), ::y1(x)}; }

cdouble hankel1_n(int n, double x) {
  return {bessel_jn(n, x), bessel_yn(n, x)};
}

double bessel_jn_deriv(int n, double x) {
  return 0.5 * (bessel_jn(n - 1, x) - bessel_jn(n + 1, x));
}

cdouble hankel1_n_deriv(int n, double x) {
  return 0.5 * (hankel1_n(n - 1, x) - hankel1_n(n + 1, x));
}

}  // namespace iscat
