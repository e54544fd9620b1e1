#include "mocp/conditional_gaussian.hpp"

#include "mocp/special.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <random>

namespace mocp {

ConditionalGaussian::ConditionalGaussian(Matrix coef, Vector intercept, Matrix chol)
  : coef_(std::move(coef))
  , intercept_(std::move(intercept))
  , chol_(std::move(chol))
{
  const Index d = intercept_.size();
  if (coef_.rows() != d || chol_.rows() != d || chol_.cols() != d)
    throw InvalidData("conditional gaussian: inconsistent parameter shapes");
  if (!chol_.isLowerTriangular() || !(chol_.diagonal().array() > 0.0).all())
    throw InvalidData("conditional gaussian: Cholesky factor must be lower triangular with positive diagonal");
  log_det_chol_ = chol_.diagonal().array().log().sum();
}

ConditionalGaussian ConditionalGaussian::fit(const Dataset& train, double ridge)
{
  train.validate();
  const Index n = train.n(), p = train.p(), d = train.d();
  if (n <= p + 1)
    throw InvalidData("conditional gaussian needs more than p + 1 training rows");

  Matrix design(n, p + 1);
  design.leftCols(p) = train.x;
  design.col(p).setOnes();

  Matrix gram = design.transpose() * design;
  gram.diagonal().array() += ridge;
  Eigen::LLT<Matrix> normal(gram);
  double extra = ridge;
  while (normal.info() != Eigen::Success && extra < 1.0) {
    extra *= 100.0;
    spdlog::warn("conditional gaussian: singular design, raising ridge to {}", extra);
    gram.diagonal().array() += extra;
    normal.compute(gram);
  }
  if (normal.info() != Eigen::Success)
    throw NumericalError("conditional gaussian: normal equations are singular");
  const Matrix beta = normal.solve(design.transpose() * train.y); // (p+1) x d

  const Matrix resid = train.y - design * beta;
  Matrix cov = resid.transpose() * resid / static_cast<double>(n);

  // The floor keeps the latent map well conditioned when residuals vanish.
  const double var_floor = 1e-10;
  Matrix chol;
  bool ok = false;
  for (double jitter = 0.0; jitter <= 1e-4 * 1.0001; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
    Eigen::LLT<Matrix> llt(cov + jitter * Matrix::Identity(d, d));
    if (llt.info() == Eigen::Success) {
      chol = llt.matrixL();
      if (chol.diagonal().array().square().minCoeff() >= 0.5 * var_floor) {
        if (jitter > 0.0)
          spdlog::debug("conditional gaussian: residual covariance jittered by {}", jitter);
        ok = true;
        break;
      }
    }
  }
  if (!ok)
    throw NumericalError("conditional gaussian: residual covariance is not positive definite");

  return ConditionalGaussian(beta.topRows(p).transpose(), beta.row(p).transpose(), chol);
}

Vector ConditionalGaussian::mean(const Vector& x) const
{
  if (x.size() != input_dim())
    throw InvalidData("conditional gaussian: input dimension mismatch");
  return coef_ * x + intercept_;
}

double ConditionalGaussian::entropy() const
{
  const double d = static_cast<double>(output_dim());
  return 0.5 * d + d * kLogSqrt2Pi + log_det_chol_;
}

double ConditionalGaussian::log_density(const Vector& x, const Vector& y) const
{
  const Vector z = latent_inverse(y, x);
  return -0.5 * z.squaredNorm() - static_cast<double>(output_dim()) * kLogSqrt2Pi - log_det_chol_;
}

Matrix ConditionalGaussian::sample(const Vector& x, Index count, const RngStream& rng) const
{
  if (count < 0)
    throw InvalidConfig("sample count must be nonnegative");
  auto engine = rng.engine();
  std::normal_distribution<double> normal;
  Matrix z(count, output_dim());
  for (Index r = 0; r < count; ++r)
    for (Index i = 0; i < output_dim(); ++i)
      z(r, i) = normal(engine);
  const Vector mu = mean(x);
  return (z * chol_.transpose()).rowwise() + mu.transpose();
}

double ConditionalGaussian::marginal_quantile(const Vector& x, Index i, double level) const
{
  check_level(level);
  if (i < 0 || i >= output_dim())
    throw InvalidConfig("output index out of range");
  const double sd = chol_.row(i).norm();
  return mean(x)(i) + sd * normal_quantile(level);
}

Vector ConditionalGaussian::latent_forward(const Vector& z, const Vector& x) const
{
  if (z.size() != output_dim())
    throw InvalidData("conditional gaussian: latent dimension mismatch");
  return mean(x) + chol_ * z;
}

Vector ConditionalGaussian::latent_inverse(const Vector& y, const Vector& x) const
{
  if (y.size() != output_dim())
    throw InvalidData("conditional gaussian: output dimension mismatch");
  return chol_.triangularView<Eigen::Lower>().solve(y - mean(x));
}

} // namespace mocp
