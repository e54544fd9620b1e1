#include "mocp/gaussian_mixture.hpp"

#include "mocp/special.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mocp {

namespace {

double log_sum_exp(const Eigen::ArrayXd& a)
{
  const double mx = a.maxCoeff();
  if (!std::isfinite(mx))
    return mx;
  return mx + std::log((a - mx).exp().sum());
}

struct TailMass
{
  double lower; // P(T <= t)
  double upper; // P(T > t)
  double pdf;
};

TailMass mixture_tails(const Eigen::ArrayXd& w,
                       const Eigen::ArrayXd& m,
                       const Eigen::ArrayXd& s,
                       double t)
{
  TailMass r{ 0.0, 0.0, 0.0 };
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) == 0.0)
      continue;
    const double u = (t - m(j)) / s(j);
    r.lower += w(j) * normal_cdf(u);
    r.upper += w(j) * normal_sf(u);
    r.pdf += w(j) * std::exp(normal_log_pdf(u)) / s(j);
  }
  return r;
}

} // namespace

double mixture_latent_1d(const Eigen::ArrayXd& w,
                         const Eigen::ArrayXd& m,
                         const Eigen::ArrayXd& s,
                         double t)
{
  const auto tm = mixture_tails(w, m, s, t);
  if (tm.lower <= tm.upper)
    return normal_quantile(std::clamp(tm.lower, 1e-300, 0.5));
  return -normal_quantile(std::clamp(tm.upper, 1e-300, 0.5));
}

double mixture_quantile_1d(const Eigen::ArrayXd& w,
                           const Eigen::ArrayXd& m,
                           const Eigen::ArrayXd& s,
                           double z)
{
  if (!std::isfinite(z))
    throw InvalidData("latent coordinate must be finite");
  // every component quantile at z brackets the mixture quantile
  double lo = kInf, hi = -kInf;
  for (Index j = 0; j < w.size(); ++j) {
    if (w(j) == 0.0)
      continue;
    const double q = m(j) + s(j) * z;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  if (!(lo <= hi))
    throw NumericalError("mixture has no component with positive weight");
  if (hi - lo <= 1e-15 * (1.0 + std::abs(lo)))
    return 0.5 * (lo + hi);

  const bool use_lower = z <= 0.0;
  const double target = use_lower ? normal_cdf(z) : normal_sf(z);
  // residual > 0 means t is above the solution
  auto residual = [&](const TailMass& tm) {
    return use_lower ? tm.lower - target : target - tm.upper;
  };

  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto tm = mixture_tails(w, m, s, t);
    const double r = residual(tm);
    if (r > 0.0)
      hi = t;
    else if (r < 0.0)
      lo = t;
    else
      return t;

    double next = tm.pdf > 0.0 ? t - r / tm.pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 4e-16 * (1.0 + std::abs(t)) || hi - lo <= 4e-16 * (1.0 + std::abs(t)))
      return next;
    t = next;
  }
  return t;
}

DiagonalGaussianMixture::DiagonalGaussianMixture(Vector weights, Matrix means, Matrix stds)
  : weights_(std::move(weights))
  , means_(std::move(means))
  , stds_(std::move(stds))
{
  if (means_.rows() < 1 || weights_.size() != means_.rows() || stds_.rows() != means_.rows() ||
      stds_.cols() != means_.cols())
    throw InvalidData("inconsistent mixture parameter shapes");
  if ((weights_.array() < 0.0).any() || !(weights_.sum() > 0.0))
    throw InvalidData("mixture weights must be nonnegative with positive sum");
  if (!(stds_.array() > 0.0).all())
    throw InvalidData("mixture standard deviations must be positive");
  weights_ /= weights_.sum();
  log_weights_ = weights_.array().log();
  log_norm_ = -stds_.array().log().rowwise().sum() - static_cast<double>(dim()) * kLogSqrt2Pi;
}

double DiagonalGaussianMixture::log_density(const Vector& y) const
{
  if (y.size() != dim())
    throw InvalidData("mixture density: output dimension mismatch");
  Eigen::ArrayXd quad = Eigen::ArrayXd::Zero(components());
  for (Index i = 0; i < dim(); ++i)
    quad += ((y(i) - means_.col(i).array()) / stds_.col(i).array()).square();
  return log_sum_exp(log_weights_ + log_norm_ - 0.5 * quad);
}

Matrix DiagonalGaussianMixture::sample(Index count, RngStream::Engine& engine) const
{
  Matrix out(count, dim());
  std::vector<double> cumulative(static_cast<std::size_t>(components()));
  double acc = 0.0;
  for (Index j = 0; j < components(); ++j)
    cumulative[static_cast<std::size_t>(j)] = (acc += weights_(j));
  std::uniform_real_distribution<double> unif(0.0, acc);
  std::normal_distribution<double> normal;
  for (Index r = 0; r < count; ++r) {
    const double u = unif(engine);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto j = std::min<Index>(static_cast<Index>(it - cumulative.begin()), components() - 1);
    for (Index i = 0; i < dim(); ++i)
      out(r, i) = means_(j, i) + stds_(j, i) * normal(engine);
  }
  return out;
}

double DiagonalGaussianMixture::marginal_cdf(Index i, double t) const
{
  return mixture_tails(weights_.array(), means_.col(i).array(), stds_.col(i).array(), t).lower;
}

double DiagonalGaussianMixture::marginal_quantile(Index i, double level) const
{
  if (!(level > 0.0 && level < 1.0))
    throw InvalidConfig("quantile level must lie in (0, 1)");
  if (i < 0 || i >= dim())
    throw InvalidConfig("output index out of range");
  return mixture_quantile_1d(weights_.array(), means_.col(i).array(), stds_.col(i).array(),
                             normal_quantile(level));
}

Eigen::ArrayXd DiagonalGaussianMixture::conditional_log_weights(const Vector& y, Index i) const
{
  Eigen::ArrayXd lw = log_weights_;
  for (Index k = 0; k < i; ++k) {
    const Eigen::ArrayXd u = (y(k) - means_.col(k).array()) / stds_.col(k).array();
    lw += -0.5 * u.square() - stds_.col(k).array().log();
  }
  return lw - log_sum_exp(lw);
}

Vector DiagonalGaussianMixture::to_latent(const Vector& y) const
{
  if (y.size() != dim())
    throw InvalidData("latent map: output dimension mismatch");
  Vector z(dim());
  for (Index i = 0; i < dim(); ++i) {
    const Eigen::ArrayXd w = conditional_log_weights(y, i).exp();
    z(i) = mixture_latent_1d(w, means_.col(i).array(), stds_.col(i).array(), y(i));
  }
  return z;
}

Vector DiagonalGaussianMixture::from_latent(const Vector& z) const
{
  if (z.size() != dim())
    throw InvalidData("latent map: latent dimension mismatch");
  Vector y(dim());
  for (Index i = 0; i < dim(); ++i) {
    const Eigen::ArrayXd w = conditional_log_weights(y, i).exp();
    y(i) = mixture_quantile_1d(w, means_.col(i).array(), stds_.col(i).array(), z(i));
  }
  return y;
}

} // namespace mocp
