#include "mocp/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mocp {

Dataset::Dataset(Matrix x_, Matrix y_)
  : x(std::move(x_))
  , y(std::move(y_))
{
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), p());
  out.y.resize(static_cast<Index>(rows.size()), d());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= static_cast<std::size_t>(n()))
      throw InvalidData("subset index out of range");
    out.x.row(static_cast<Index>(i)) = x.row(static_cast<Index>(rows[i]));
    out.y.row(static_cast<Index>(i)) = y.row(static_cast<Index>(rows[i]));
  }
  out.feature_names = feature_names;
  out.target_names = target_names;
  return out;
}

void Dataset::validate() const
{
  if (y.rows() < 1)
    throw InvalidData("dataset must contain at least one observation");
  if (x.rows() != y.rows())
    throw InvalidData("feature and target row counts differ");
  if (!x.allFinite() || !y.allFinite())
    throw InvalidData("dataset contains non-finite entries");
}

SplitIndices split_dataset(const Dataset& data,
                           std::size_t cal_size,
                           double train_frac,
                           double val_frac,
                           const RngStream& rng)
{
  const auto n = static_cast<std::size_t>(data.n());
  if (cal_size >= n)
    throw InvalidConfig("calibration size must be smaller than the dataset");
  if (train_frac < 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0)
    throw InvalidConfig("train_frac + val_frac must lie in [0, 1)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  auto engine = rng.engine();
  std::shuffle(order.begin(), order.end(), engine);

  SplitIndices s;
  auto it = order.begin();
  s.cal.assign(it, it + static_cast<std::ptrdiff_t>(cal_size));
  it += static_cast<std::ptrdiff_t>(cal_size);

  const std::size_t rest = n - cal_size;
  const auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(rest)));
  const auto n_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(rest)));
  s.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  s.val.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  s.test.assign(it, order.end());
  return s;
}

Standardizer::Standardizer(Vector mean, Vector scale)
  : mean_(std::move(mean))
  , scale_(std::move(scale))
{
  if (mean_.size() != scale_.size())
    throw InvalidData("standardizer mean/scale size mismatch");
  if ((scale_.array() <= 0.0).any())
    throw InvalidData("standardizer scale must be positive");
}

Standardizer Standardizer::fit(const Matrix& m, std::span<const std::size_t> rows)
{
  if (rows.empty())
    throw InvalidData("cannot fit a standardizer on zero rows");
  const Index cols = m.cols();
  Vector mean = Vector::Zero(cols);
  for (auto r : rows)
    mean += m.row(static_cast<Index>(r)).transpose();
  mean /= static_cast<double>(rows.size());

  Vector var = Vector::Zero(cols);
  for (auto r : rows)
    var += (m.row(static_cast<Index>(r)).transpose() - mean).array().square().matrix();
  var /= static_cast<double>(rows.size());

  Vector scale = var.array().sqrt();
  for (Index j = 0; j < cols; ++j)
    if (!(scale(j) > 0.0))
      scale(j) = 1.0;
  return Standardizer(std::move(mean), std::move(scale));
}

Standardizer Standardizer::fit(const Matrix& m)
{
  std::vector<std::size_t> rows(static_cast<std::size_t>(m.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{ 0 });
  return fit(m, rows);
}

Matrix Standardizer::apply(const Matrix& m) const
{
  return ((m.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array()).matrix();
}

Matrix Standardizer::invert(const Matrix& m) const
{
  return ((m.array().rowwise() * scale_.transpose().array()).matrix().rowwise() + mean_.transpose());
}

Vector Standardizer::apply(const Vector& v) const
{
  return ((v - mean_).array() / scale_.array()).matrix();
}

Vector Standardizer::invert(const Vector& v) const
{
  return (v.array() * scale_.array()).matrix() + mean_;
}

void check_alpha(double alpha)
{
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidConfig("alpha must lie in (0, 1)");
}

std::size_t conformal_rank(std::size_t n_cal, double alpha)
{
  check_alpha(alpha);
  const double target = static_cast<double>(n_cal + 1) * (1.0 - alpha);
  // absorb representation error so that e.g. 10 * 0.8 gives 8, not 9
  const double k = std::ceil(target - 1e-9 * static_cast<double>(n_cal + 1));
  return static_cast<std::size_t>(std::max(1.0, k));
}

CalibrationResult conformal_quantile(std::vector<double> scores, double alpha)
{
  CalibrationResult r;
  r.alpha = alpha;
  r.k_alpha = conformal_rank(scores.size(), alpha);
  for (double s : scores)
    if (std::isnan(s) || std::isinf(s))
      throw InvalidData("calibration scores must be finite");
  std::sort(scores.begin(), scores.end());
  r.q_hat = r.k_alpha <= scores.size() ? scores[r.k_alpha - 1] : kInf;
  r.sorted_scores = std::move(scores);
  return r;
}

} // namespace mocp
