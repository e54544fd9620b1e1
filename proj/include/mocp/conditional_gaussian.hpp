#pragma once

#include "mocp/predictor.hpp"

namespace mocp {

//! Homoscedastic linear-Gaussian model Y | x ~ N(A x + b, L L^T).
//!
//! Doubles as an invertible conditional generative model:
//!   Q(z; x) = A x + b + L z,  Q^{-1}(y; x) = L^{-1}(y - A x - b).
class ConditionalGaussian final : public BasePredictor
{
public:
  //! `chol` must be lower triangular with a positive diagonal.
  ConditionalGaussian(Matrix coef, Vector intercept, Matrix chol);

  //! Least squares for (A, b) on normal equations with ridge `ridge * I`,
  //! then the Cholesky factor of the (1/n) residual covariance. Failed
  //! factorizations retry with jitter 1e-10 * I, growing x10 up to 1e-4.
  static ConditionalGaussian fit(const Dataset& train, double ridge = 1e-8);

  std::string kind() const override { return "conditional_gaussian"; }
  Capabilities capabilities() const override { return { true, true, true, true }; }
  Index input_dim() const override { return coef_.cols(); }
  Index output_dim() const override { return coef_.rows(); }

  Vector mean(const Vector& x) const;
  Matrix covariance() const { return chol_ * chol_.transpose(); }
  //! Differential entropy of Y | x (independent of x).
  double entropy() const;

  double log_density(const Vector& x, const Vector& y) const override;
  Matrix sample(const Vector& x, Index count, const RngStream& rng) const override;
  double marginal_quantile(const Vector& x, Index i, double level) const override;
  Vector latent_forward(const Vector& z, const Vector& x) const override;
  Vector latent_inverse(const Vector& y, const Vector& x) const override;

  const Matrix& coef() const { return coef_; }
  const Vector& intercept() const { return intercept_; }
  const Matrix& chol() const { return chol_; }

private:
  Matrix coef_;      // d x p
  Vector intercept_; // d
  Matrix chol_;      // d x d lower triangular
  double log_det_chol_ = 0.0;
};

} // namespace mocp
