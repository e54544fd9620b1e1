#pragma once

#include "mocp/gaussian_mixture.hpp"
#include "mocp/predictor.hpp"

#include <string>
#include <string_view>

namespace mocp {

enum class ToyProcess
{
  unimodal,
  bimodal,
};

ToyProcess parse_toy_process(std::string_view name);
std::string to_string(ToyProcess process);

//! Parameters of the two heteroscedastic toy processes (p = 1, d = 2).
//!
//! unimodal: X ~ U(0, 1),
//!   Y | x ~ (1/k) sum_j N((1.3 - x) mu_j, sigma^2 I),
//!   mu_j = (cos a_j, 0.5 - sin a_j), a_j = (j - 1) pi / (k - 1).
//! bimodal: X ~ U(0.5, 2),
//!   Y | x ~ 0.5 N(c 1, x I) + 0.5 N(-c 1, I / x).
struct ToyProcessSpec
{
  ToyProcess id = ToyProcess::unimodal;
  int k = 200;
  double sigma = 0.2;
  double center = 4.0;
  Index d = 2;
  bool standardize = true;

  static ToyProcessSpec unimodal() { return {}; }
  static ToyProcessSpec bimodal()
  {
    ToyProcessSpec s;
    s.id = ToyProcess::bimodal;
    return s;
  }

  double x_low() const { return id == ToyProcess::unimodal ? 0.0 : 0.5; }
  double x_high() const { return id == ToyProcess::unimodal ? 1.0 : 2.0; }
};

//! Exact first two moments of X and Y, used to scale both to zero mean and
//! unit variance per coordinate.
struct ToyScaling
{
  double x_mean = 0.0;
  double x_scale = 1.0;
  Vector y_mean;
  Vector y_scale;
};

ToyScaling toy_scaling(const ToyProcessSpec& spec);

//! Component centers mu_j of the unimodal process (k x 2).
Matrix unimodal_arc(const ToyProcessSpec& spec);

//! Y | X = x_raw in the original (unscaled) units.
DiagonalGaussianMixture toy_conditional_raw(const ToyProcessSpec& spec, double x_raw);

//! Oracle base predictor: the exact conditional law of a toy process, in the
//! same (optionally standardized) coordinates the generator emits.
class OracleToyModel final : public BasePredictor
{
public:
  explicit OracleToyModel(ToyProcessSpec spec);

  std::string kind() const override { return "oracle_" + to_string(spec_.id); }
  Capabilities capabilities() const override { return { true, true, true, true }; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return spec_.d; }

  //! The conditional law at x (in model coordinates).
  DiagonalGaussianMixture conditional(const Vector& x) const;

  double log_density(const Vector& x, const Vector& y) const override;
  Matrix sample(const Vector& x, Index count, const RngStream& rng) const override;
  double marginal_quantile(const Vector& x, Index i, double level) const override;
  Vector latent_forward(const Vector& z, const Vector& x) const override;
  Vector latent_inverse(const Vector& y, const Vector& x) const override;

  const ToyProcessSpec& spec() const { return spec_; }
  const ToyScaling& scaling() const { return scaling_; }

private:
  ToyProcessSpec spec_;
  ToyScaling scaling_;
  Matrix arc_std_;   // unimodal: mu_j / y_scale
  Matrix stds_std_;  // component standard deviations in model coordinates
};

} // namespace mocp
