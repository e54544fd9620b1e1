#pragma once

#include "mocp/core.hpp"

namespace mocp {

//! Finite mixture of Gaussians with diagonal covariances.
//!
//! Besides density evaluation and sampling it provides exact per-output
//! quantiles and the Rosenblatt (Knothe) transform, which maps Y to a
//! standard normal vector one coordinate at a time:
//!   z_i = Phi^{-1}( F(y_i | y_1..y_{i-1}) ).
//! The conditional of one coordinate given the previous ones is again a
//! mixture of the same components with reweighted mixing proportions, so
//! the transform and its inverse only need 1-d mixture CDFs.
class DiagonalGaussianMixture
{
public:
  DiagonalGaussianMixture(Vector weights, Matrix means, Matrix stds);

  Index components() const { return means_.rows(); }
  Index dim() const { return means_.cols(); }
  const Vector& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const Matrix& stds() const { return stds_; }

  double log_density(const Vector& y) const;
  Matrix sample(Index count, RngStream::Engine& engine) const;

  double marginal_cdf(Index i, double t) const;
  double marginal_quantile(Index i, double level) const;

  //! Y -> Z (Rosenblatt transform).
  Vector to_latent(const Vector& y) const;
  //! Z -> Y, inverse of to_latent.
  Vector from_latent(const Vector& z) const;

private:
  // log of the mixing proportions of coordinate i given y_0..y_{i-1}
  Eigen::ArrayXd conditional_log_weights(const Vector& y, Index i) const;

  Vector weights_;
  Eigen::ArrayXd log_weights_;
  Matrix means_;
  Matrix stds_;
  Eigen::ArrayXd log_norm_; // per component: -sum log s - d/2 log 2pi
};

//! Solves sum_j w_j Phi((t - m_j) / s_j) = Phi(z) for t. Works in whichever
//! tail is smaller so that |z| up to ~37 stays accurate.
double mixture_quantile_1d(const Eigen::ArrayXd& w,
                           const Eigen::ArrayXd& m,
                           const Eigen::ArrayXd& s,
                           double z);

//! Returns z = Phi^{-1}(sum_j w_j Phi((t - m_j) / s_j)).
double mixture_latent_1d(const Eigen::ArrayXd& w,
                         const Eigen::ArrayXd& m,
                         const Eigen::ArrayXd& s,
                         double t);

} // namespace mocp
