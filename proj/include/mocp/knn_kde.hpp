#pragma once

#include "mocp/predictor.hpp"

#include <span>
#include <utility>
#include <vector>

namespace mocp {

//! Nearest-neighbour weighted kernel density estimate
//!   f(y | x) = sum_i w(x_i | x) N(y | y_i, sigma^2 I)
//! with w = 1/k on the k training inputs closest to x (Euclidean, ties broken
//! by training index) and 0 elsewhere.
class KnnKde final : public BasePredictor
{
public:
  KnnKde(Matrix train_x, Matrix train_y, Index k, double sigma);

  //! Picks sigma from `sigma_grid` by minimal mean negative log density on
  //! `val` (first grid point wins ties).
  static KnnKde fit(const Dataset& train, Index k, std::span<const double> sigma_grid, const Dataset& val);

  std::string kind() const override { return "knn_kde"; }
  Capabilities capabilities() const override { return { true, true, false, false }; }
  Index input_dim() const override { return train_x_.cols(); }
  Index output_dim() const override { return train_y_.cols(); }

  //! Training rows with nonzero weight and their weights.
  std::vector<std::pair<Index, double>> weights(const Vector& x) const;

  double log_density(const Vector& x, const Vector& y) const override;
  Matrix sample(const Vector& x, Index count, const RngStream& rng) const override;

  double mean_nll(const Dataset& data) const;

  Index k() const { return k_; }
  double sigma() const { return sigma_; }
  const Matrix& train_x() const { return train_x_; }
  const Matrix& train_y() const { return train_y_; }

  static std::vector<double> default_sigma_grid();

private:
  std::vector<Index> neighbors(const Vector& x) const;
  double log_density_from(const std::vector<Index>& nn, const Vector& y, double sigma) const;

  Matrix train_x_;
  Matrix train_y_;
  Index k_;
  double sigma_;
};

} // namespace mocp
