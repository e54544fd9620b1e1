#pragma once

namespace mocp {

double normal_cdf(double z);
//! Upper tail 1 - Phi(z), accurate for large z.
double normal_sf(double z);
double normal_quantile(double p);
double normal_log_pdf(double z);

double chi2_quantile(double p, double dof);
double chi2_sf(double x, double dof);

//! log of the volume of a d-ball of radius r.
double log_ball_volume(int d, double r);

double beta_mean(double a, double b);
double beta_variance(double a, double b);

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

} // namespace mocp
