#include "mocp/special.hpp"

#include "mocp/errors.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace mocp {

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_sf(double z)
{
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0)
      return -INFINITY;
    if (p == 1.0)
      return INFINITY;
    throw InvalidConfig("normal quantile level must lie in [0, 1]");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double normal_log_pdf(double z)
{
  return -0.5 * z * z - kLogSqrt2Pi;
}

double chi2_quantile(double p, double dof)
{
  if (!(p > 0.0 && p < 1.0) || !(dof > 0.0))
    throw InvalidConfig("chi-square quantile needs p in (0,1) and dof > 0");
  return 2.0 * boost::math::gamma_p_inv(0.5 * dof, p);
}

double chi2_sf(double x, double dof)
{
  if (!(dof > 0.0))
    throw InvalidConfig("chi-square dof must be positive");
  if (x <= 0.0)
    return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double log_ball_volume(int d, double r)
{
  const double half = 0.5 * d;
  return half * std::log(M_PI) + d * std::log(r) - std::lgamma(half + 1.0);
}

double beta_mean(double a, double b)
{
  return a / (a + b);
}

double beta_variance(double a, double b)
{
  const double s = a + b;
  return a * b / (s * s * (s + 1.0));
}

} // namespace mocp
