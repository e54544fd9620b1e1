#pragma once

#include "mocp/core.hpp"

#include <memory>
#include <string>

namespace mocp {

//! What a base predictor can do. Conformity scores declare the subset they
//! need and refuse to run on a predictor that lacks it.
struct Capabilities
{
  bool density = false;
  bool sampler = false;
  bool marginal_quantiles = false;
  bool invertible_map = false;

  bool satisfies(const Capabilities& required) const;
  //! Human readable reason for the first unmet requirement, empty if none.
  std::string missing(const Capabilities& required) const;

  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

//! Conditional model of Y | X = x.
//!
//! Every capability has a default implementation that throws
//! CapabilityError, so a concrete predictor only overrides what it supports.
class BasePredictor
{
public:
  virtual ~BasePredictor() = default;

  virtual std::string kind() const = 0;
  virtual Capabilities capabilities() const = 0;
  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;

  virtual double log_density(const Vector& x, const Vector& y) const;
  double density(const Vector& x, const Vector& y) const;

  //! count x d matrix of i.i.d. draws, deterministic in `rng`.
  virtual Matrix sample(const Vector& x, Index count, const RngStream& rng) const;

  //! Closed-form quantile of Y_i | x.
  virtual double marginal_quantile(const Vector& x, Index i, double level) const;

  //! Latent map Q(z; x) and its inverse; Z ~ N(0, I_d).
  virtual Vector latent_forward(const Vector& z, const Vector& x) const;
  virtual Vector latent_inverse(const Vector& y, const Vector& x) const;
};

using ModelPtr = std::shared_ptr<const BasePredictor>;

//! Forwards to another predictor but only exposes a subset of its
//! capabilities, e.g. to run a sample-only method against a model that also
//! has a density.
class MaskedPredictor final : public BasePredictor
{
public:
  MaskedPredictor(ModelPtr inner, Capabilities allowed);

  std::string kind() const override { return inner_->kind(); }
  Capabilities capabilities() const override { return caps_; }
  Index input_dim() const override { return inner_->input_dim(); }
  Index output_dim() const override { return inner_->output_dim(); }

  double log_density(const Vector& x, const Vector& y) const override;
  Matrix sample(const Vector& x, Index count, const RngStream& rng) const override;
  double marginal_quantile(const Vector& x, Index i, double level) const override;
  Vector latent_forward(const Vector& z, const Vector& x) const override;
  Vector latent_inverse(const Vector& y, const Vector& x) const override;

private:
  ModelPtr inner_;
  Capabilities caps_;
};

//! Order statistic of index floor(L * level) (1-based, clamped to [1, L]).
double empirical_quantile(std::vector<double> draws, double level);

struct MarginalBounds
{
  Vector lower;
  Vector upper;
};

//! Per-output quantiles at two levels. Uses the closed form when the model
//! has one, otherwise `fallback_samples` draws from the sampler and the
//! empirical order statistics.
MarginalBounds marginal_bounds(const BasePredictor& model,
                               const Vector& x,
                               double lower_level,
                               double upper_level,
                               const RngStream& rng,
                               Index fallback_samples = 100);

double marginal_quantile(const BasePredictor& model,
                         const Vector& x,
                         Index i,
                         double level,
                         const RngStream& rng,
                         Index fallback_samples = 100);

//! Wall-clock seconds this thread has spent drawing samples for empirical
//! quantiles. Timing code subtracts it, since sampling cost belongs to the
//! base model rather than the conformal method.
double quantile_sampling_seconds();
void reset_quantile_sampling_seconds();

void check_level(double level);

} // namespace mocp
