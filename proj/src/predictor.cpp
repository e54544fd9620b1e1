#include "mocp/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mocp {

namespace {

thread_local double g_quantile_sampling_seconds = 0.0;

} // namespace

bool Capabilities::satisfies(const Capabilities& required) const
{
  return missing(required).empty();
}

std::string Capabilities::missing(const Capabilities& required) const
{
  if (required.density && !density)
    return "density required";
  if (required.sampler && !sampler)
    return "sampler required";
  if (required.marginal_quantiles && !marginal_quantiles)
    return "marginal quantiles required";
  if (required.invertible_map && !invertible_map)
    return "invertible map required";
  return {};
}

double BasePredictor::log_density(const Vector&, const Vector&) const
{
  throw CapabilityError(kind() + ": density required");
}

double BasePredictor::density(const Vector& x, const Vector& y) const
{
  return std::exp(log_density(x, y));
}

Matrix BasePredictor::sample(const Vector&, Index, const RngStream&) const
{
  throw CapabilityError(kind() + ": sampler required");
}

double BasePredictor::marginal_quantile(const Vector&, Index, double) const
{
  throw CapabilityError(kind() + ": marginal quantiles required");
}

Vector BasePredictor::latent_forward(const Vector&, const Vector&) const
{
  throw CapabilityError(kind() + ": invertible map required");
}

Vector BasePredictor::latent_inverse(const Vector&, const Vector&) const
{
  throw CapabilityError(kind() + ": invertible map required");
}

MaskedPredictor::MaskedPredictor(ModelPtr inner, Capabilities allowed)
  : inner_(std::move(inner))
{
  const auto have = inner_->capabilities();
  caps_.density = have.density && allowed.density;
  caps_.sampler = have.sampler && allowed.sampler;
  caps_.marginal_quantiles = have.marginal_quantiles && allowed.marginal_quantiles;
  caps_.invertible_map = have.invertible_map && allowed.invertible_map;
}

double MaskedPredictor::log_density(const Vector& x, const Vector& y) const
{
  if (!caps_.density)
    return BasePredictor::log_density(x, y);
  return inner_->log_density(x, y);
}

Matrix MaskedPredictor::sample(const Vector& x, Index count, const RngStream& rng) const
{
  if (!caps_.sampler)
    return BasePredictor::sample(x, count, rng);
  return inner_->sample(x, count, rng);
}

double MaskedPredictor::marginal_quantile(const Vector& x, Index i, double level) const
{
  if (!caps_.marginal_quantiles)
    return BasePredictor::marginal_quantile(x, i, level);
  return inner_->marginal_quantile(x, i, level);
}

Vector MaskedPredictor::latent_forward(const Vector& z, const Vector& x) const
{
  if (!caps_.invertible_map)
    return BasePredictor::latent_forward(z, x);
  return inner_->latent_forward(z, x);
}

Vector MaskedPredictor::latent_inverse(const Vector& y, const Vector& x) const
{
  if (!caps_.invertible_map)
    return BasePredictor::latent_inverse(y, x);
  return inner_->latent_inverse(y, x);
}

void check_level(double level)
{
  if (!(level > 0.0 && level < 1.0))
    throw InvalidConfig("quantile level must lie in (0, 1)");
}

double empirical_quantile(std::vector<double> draws, double level)
{
  check_level(level);
  if (draws.empty())
    throw InvalidData("empirical quantile of an empty sample");
  const auto L = draws.size();
  auto k = static_cast<std::size_t>(std::floor(static_cast<double>(L) * level));
  k = std::clamp<std::size_t>(k, 1, L);
  std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k - 1), draws.end());
  return draws[k - 1];
}

MarginalBounds marginal_bounds(const BasePredictor& model,
                               const Vector& x,
                               double lower_level,
                               double upper_level,
                               const RngStream& rng,
                               Index fallback_samples)
{
  check_level(lower_level);
  check_level(upper_level);
  const Index d = model.output_dim();
  MarginalBounds b{ Vector(d), Vector(d) };
  const auto caps = model.capabilities();
  if (caps.marginal_quantiles) {
    for (Index i = 0; i < d; ++i) {
      b.lower(i) = model.marginal_quantile(x, i, lower_level);
      b.upper(i) = model.marginal_quantile(x, i, upper_level);
    }
    return b;
  }
  if (!caps.sampler)
    throw CapabilityError(model.kind() + ": marginal quantiles or sampler required");
  if (fallback_samples < 1)
    throw InvalidConfig("fallback sample count must be positive");

  const auto start = std::chrono::steady_clock::now();
  const Matrix draws = model.sample(x, fallback_samples, rng);
  for (Index i = 0; i < d; ++i) {
    std::vector<double> col(draws.col(i).data(), draws.col(i).data() + draws.rows());
    b.lower(i) = empirical_quantile(col, lower_level);
    b.upper(i) = empirical_quantile(std::move(col), upper_level);
  }
  g_quantile_sampling_seconds +=
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return b;
}

double marginal_quantile(const BasePredictor& model,
                         const Vector& x,
                         Index i,
                         double level,
                         const RngStream& rng,
                         Index fallback_samples)
{
  check_level(level);
  if (i < 0 || i >= model.output_dim())
    throw InvalidConfig("output index out of range");
  if (model.capabilities().marginal_quantiles)
    return model.marginal_quantile(x, i, level);
  return marginal_bounds(model, x, level, level, rng, fallback_samples).lower(i);
}

double quantile_sampling_seconds()
{
  return g_quantile_sampling_seconds;
}

void reset_quantile_sampling_seconds()
{
  g_quantile_sampling_seconds = 0.0;
}

} // namespace mocp
