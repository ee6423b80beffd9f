#pragma once

namespace ppd {

// Density / CDF / quantile helpers.  Gamma uses the shape/rate
// parameterization throughout the library.

double log_beta_fn(double a, double b);

double beta_pdf(double x, double a, double b);
double beta_cdf(double x, double a, double b);
double beta_quantile(double p, double a, double b);
double beta_log_pdf(double x, double a, double b);

double gamma_pdf(double x, double shape, double rate);
double gamma_cdf(double x, double shape, double rate);
double gamma_quantile(double p, double shape, double rate);

double normal_cdf(double z);
double student_t_cdf(double x, double df);

}  // namespace ppd
