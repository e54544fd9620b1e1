#include "mocp/toy_process.hpp"

#include <cmath>

namespace mocp {

ToyProcess parse_toy_process(std::string_view name)
{
  if (name == "unimodal")
    return ToyProcess::unimodal;
  if (name == "bimodal")
    return ToyProcess::bimodal;
  throw InvalidConfig("unknown toy process '" + std::string(name) + "'");
}

std::string to_string(ToyProcess process)
{
  return process == ToyProcess::unimodal ? "unimodal" : "bimodal";
}

Matrix unimodal_arc(const ToyProcessSpec& spec)
{
  Matrix mu(spec.k, 2);
  for (int j = 0; j < spec.k; ++j) {
    const double a = spec.k > 1 ? j * M_PI / (spec.k - 1) : 0.0;
    mu(j, 0) = std::cos(a);
    mu(j, 1) = 0.5 - std::sin(a);
  }
  return mu;
}

ToyScaling toy_scaling(const ToyProcessSpec& spec)
{
  ToyScaling s;
  const double lo = spec.x_low(), hi = spec.x_high();
  s.x_mean = 0.5 * (lo + hi);
  s.x_scale = (hi - lo) / std::sqrt(12.0);
  if (!spec.standardize) {
    s.x_mean = 0.0;
    s.x_scale = 1.0;
    s.y_mean = Vector::Zero(spec.d);
    s.y_scale = Vector::Ones(spec.d);
    return s;
  }

  if (spec.id == ToyProcess::unimodal) {
    // Y = c(x) mu_J + sigma eps with c = 1.3 - x, J uniform on the arc
    const Matrix mu = unimodal_arc(spec);
    const Vector mbar = mu.colwise().mean().transpose();
    const Vector m2 = mu.array().square().colwise().mean().transpose();
    const double ec = 1.3 - s.x_mean;
    const double ec2 = s.x_scale * s.x_scale + ec * ec;
    s.y_mean = ec * mbar;
    s.y_scale = (ec2 * m2.array() + spec.sigma * spec.sigma - (ec * mbar.array()).square()).sqrt();
  } else {
    // E[Y_i | x] = 0, E[Y_i^2 | x] = c^2 + (x + 1/x) / 2
    const double e_inv = std::log(hi / lo) / (hi - lo);
    const double var = spec.center * spec.center + 0.5 * (s.x_mean + e_inv);
    s.y_mean = Vector::Zero(spec.d);
    s.y_scale = Vector::Constant(spec.d, std::sqrt(var));
  }
  return s;
}

DiagonalGaussianMixture toy_conditional_raw(const ToyProcessSpec& spec, double x_raw)
{
  if (spec.id == ToyProcess::unimodal) {
    const double c = 1.3 - x_raw;
    Matrix means = c * unimodal_arc(spec);
    Matrix stds = Matrix::Constant(spec.k, 2, spec.sigma);
    return { Vector::Constant(spec.k, 1.0 / spec.k), std::move(means), std::move(stds) };
  }
  if (!(x_raw > 0.0))
    throw InvalidData("bimodal process is only defined for x > 0");
  Matrix means(2, spec.d), stds(2, spec.d);
  means.row(0).setConstant(spec.center);
  means.row(1).setConstant(-spec.center);
  stds.row(0).setConstant(std::sqrt(x_raw));
  stds.row(1).setConstant(1.0 / std::sqrt(x_raw));
  return { Vector::Constant(2, 0.5), std::move(means), std::move(stds) };
}

OracleToyModel::OracleToyModel(ToyProcessSpec spec)
  : spec_(spec)
  , scaling_(toy_scaling(spec))
{
  if (spec_.id == ToyProcess::unimodal && spec_.d != 2)
    throw InvalidConfig("the unimodal process is bivariate");
  if (spec_.k < 1 || !(spec_.sigma > 0.0) || spec_.d < 1)
    throw InvalidConfig("invalid toy process parameters");
  if (spec_.id == ToyProcess::unimodal) {
    arc_std_ = unimodal_arc(spec_).array().rowwise() / scaling_.y_scale.transpose().array();
    stds_std_ = (spec_.sigma / scaling_.y_scale.array()).transpose().replicate(spec_.k, 1).matrix();
  }
}

DiagonalGaussianMixture OracleToyModel::conditional(const Vector& x) const
{
  if (x.size() != 1)
    throw InvalidData("toy processes have a single input");
  const double x_raw = scaling_.x_mean + scaling_.x_scale * x(0);
  if (spec_.id == ToyProcess::unimodal) {
    const Vector offset = (scaling_.y_mean.array() / scaling_.y_scale.array()).matrix();
    Matrix means = ((1.3 - x_raw) * arc_std_).rowwise() - offset.transpose();
    return { Vector::Constant(spec_.k, 1.0 / spec_.k), std::move(means), stds_std_ };
  }
  auto raw = toy_conditional_raw(spec_, x_raw);
  // y_std = (y - m) / s, applied per output coordinate
  Matrix means = (raw.means().rowwise() - scaling_.y_mean.transpose()).array().rowwise() /
                 scaling_.y_scale.transpose().array();
  Matrix stds = raw.stds().array().rowwise() / scaling_.y_scale.transpose().array();
  return { raw.weights(), std::move(means), std::move(stds) };
}

double OracleToyModel::log_density(const Vector& x, const Vector& y) const
{
  if (spec_.id != ToyProcess::unimodal)
    return conditional(x).log_density(y);
  if (x.size() != 1 || y.size() != 2)
    throw InvalidData("oracle density: dimension mismatch");
  // equal weights and a shared diagonal covariance, so skip building the mixture
  const double c = 1.3 - (scaling_.x_mean + scaling_.x_scale * x(0));
  const double s0 = stds_std_(0, 0), s1 = stds_std_(0, 1);
  const double t0 = y(0) + scaling_.y_mean(0) / scaling_.y_scale(0);
  const double t1 = y(1) + scaling_.y_mean(1) / scaling_.y_scale(1);
  const Eigen::ArrayXd quad = ((t0 - c * arc_std_.col(0).array()) / s0).square() + ((t1 - c * arc_std_.col(1).array()) / s1).square();
  const double q_min = quad.minCoeff();
  const double lse = -0.5 * q_min + std::log((-0.5 * (quad - q_min)).exp().sum());
  return lse - std::log(static_cast<double>(spec_.k)) - std::log(2.0 * M_PI * s0 * s1);
}

Matrix OracleToyModel::sample(const Vector& x, Index count, const RngStream& rng) const
{
  auto engine = rng.engine();
  return conditional(x).sample(count, engine);
}

double OracleToyModel::marginal_quantile(const Vector& x, Index i, double level) const
{
  return conditional(x).marginal_quantile(i, level);
}

Vector OracleToyModel::latent_forward(const Vector& z, const Vector& x) const
{
  return conditional(x).from_latent(z);
}

Vector OracleToyModel::latent_inverse(const Vector& y, const Vector& x) const
{
  return conditional(x).to_latent(y);
}

} // namespace mocp
