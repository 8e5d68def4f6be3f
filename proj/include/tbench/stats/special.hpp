#pragma once

namespace tbench::stats {

/// Regularized lower incomplete gamma P(a, x). Series for x < a+1,
/// continued fraction otherwise.
double reg_incomplete_gamma(double a, double x);

/// Regularized incomplete beta I_x(a, b) via the standard continued
/// fraction with the symmetry split at x = (a+1)/(a+b+2).
double reg_incomplete_beta(double a, double b, double x);

double normal_cdf(double x);
double student_t_cdf(double x, double df);
double f_cdf(double x, double d1, double d2);
double chi2_cdf(double x, double df);

/// Inverse standard normal CDF (Wichura's PPND16, ~16 significant digits).
double normal_quantile(double p);

/// Distribution selector for the generic cdf() entry point.
struct Dist {
  enum class Kind { normal, student_t, f, chi2 } kind = Kind::normal;
  double df = 0;       // student_t, chi2
  double d1 = 0, d2 = 0;  // f

  static Dist normal() { return {Kind::normal, 0, 0, 0}; }
  static Dist student_t(double df) { return {Kind::student_t, df, 0, 0}; }
  static Dist f(double d1, double d2) { return {Kind::f, 0, d1, d2}; }
  static Dist chi2(double df) { return {Kind::chi2, df, 0, 0}; }
};

/// CDF of the selected distribution; absolute error <= 1e-8. Throws
/// ConfigError on invalid parameters (df < 1 etc).
double cdf(const Dist& dist, double x);

}  // namespace tbench::stats
