#pragma once

#include "mocp/errors.hpp"
#include "mocp/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mocp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

//! Paired feature/target matrices, one row per observation.
struct Dataset
{
  Matrix x; // n x p
  Matrix y; // n x d
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  Dataset() = default;
  Dataset(Matrix x_, Matrix y_);

  Index n() const { return y.rows(); }
  Index p() const { return x.cols(); }
  Index d() const { return y.cols(); }

  Vector input(Index i) const { return x.row(i).transpose(); }
  Vector output(Index i) const { return y.row(i).transpose(); }

  Dataset subset(std::span<const std::size_t> rows) const;

  //! Throws InvalidData unless n >= 1, rows agree and every entry is finite.
  void validate() const;
};

struct SplitIndices
{
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> cal;
  std::vector<std::size_t> test;
};

//! Shuffles [0, n) and carves out exactly `cal_size` calibration indices; the
//! remainder is split train/val by floor(frac * remainder) with the leftover
//! going to test.
SplitIndices split_dataset(const Dataset& data,
                           std::size_t cal_size,
                           double train_frac,
                           double val_frac,
                           const RngStream& rng);

//! Per-column affine standardization (population variance).
class Standardizer
{
public:
  Standardizer() = default;
  Standardizer(Vector mean, Vector scale);

  //! Columns with zero spread get scale 1.
  static Standardizer fit(const Matrix& m, std::span<const std::size_t> rows);
  static Standardizer fit(const Matrix& m);

  Matrix apply(const Matrix& m) const;
  Matrix invert(const Matrix& m) const;
  Vector apply(const Vector& v) const;
  Vector invert(const Vector& v) const;

  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }

private:
  Vector mean_;
  Vector scale_;
};

struct CalibrationResult
{
  double alpha = 0.0;
  std::size_t k_alpha = 0;
  double q_hat = kInf;
  std::vector<double> sorted_scores;
};

//! k_alpha = ceil((n + 1)(1 - alpha)).
std::size_t conformal_rank(std::size_t n_cal, double alpha);

//! The k_alpha-th smallest element of scores augmented with +inf.
CalibrationResult conformal_quantile(std::vector<double> scores, double alpha);

//! Split-conformal membership: score <= q_hat (inclusive).
inline bool region_contains(double score_value, double q_hat)
{
  return score_value <= q_hat;
}

void check_alpha(double alpha);

} // namespace mocp
