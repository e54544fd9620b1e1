#include "mocp/scores.hpp"

#include "mocp/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mocp {

Capabilities merge(const Capabilities& a, const Capabilities& b)
{
  return { a.density || b.density,
           a.sampler || b.sampler,
           a.marginal_quantiles || b.marginal_quantiles,
           a.invertible_map || b.invertible_map };
}

void require(const BasePredictor& model, const Capabilities& required, const std::string& who)
{
  const auto reason = model.capabilities().missing(required);
  if (!reason.empty())
    throw CapabilityError(who + ": " + reason);
}

namespace {

template <class F>
class LambdaPoint final : public PointScore
{
public:
  explicit LambdaPoint(F f)
    : f_(std::move(f))
  {
  }
  double operator()(const Vector& y) const override { return f_(y); }

private:
  F f_;
};

template <class F>
std::unique_ptr<PointScore> make_point(F f)
{
  return std::make_unique<LambdaPoint<F>>(std::move(f));
}

void check_count(Index n, const char* what)
{
  if (n < 1)
    throw InvalidConfig(std::string(what) + " must be at least 1");
}

} // namespace

// --- DR-CP -----------------------------------------------------------------

DrCpScore::DrCpScore(ModelPtr model)
  : model_(std::move(model))
{
  require(*model_, requirements(), "dr_cp");
}

std::unique_ptr<PointScore> DrCpScore::at(const Vector& x, const RngStream&) const
{
  return make_point([model = model_, x](const Vector& y) {
    const double f = model->density(x, y);
    if (std::isnan(f) || f < 0.0 || std::isinf(f))
      throw NumericalError("dr_cp: predictive density is not a finite nonnegative number");
    return -f;
  });
}

// --- L-CP ------------------------------------------------------------------

LatentNormScore::LatentNormScore(ModelPtr model)
  : model_(std::move(model))
{
  require(*model_, requirements(), "l_cp");
}

std::unique_ptr<PointScore> LatentNormScore::at(const Vector& x, const RngStream&) const
{
  return make_point([model = model_, x](const Vector& y) { return model->latent_inverse(y, x).norm(); });
}

// --- M-CP ------------------------------------------------------------------

MarginalIntervalScore::MarginalIntervalScore(ModelPtr model, double alpha, Index fallback_samples)
  : model_(std::move(model))
  , alpha_(alpha)
  , fallback_(fallback_samples)
{
  check_alpha(alpha_);
  check_count(fallback_, "quantile fallback sample count");
  require(*model_, requirements(), "m_cp");
}

Capabilities MarginalIntervalScore::requirements() const
{
  if (model_->capabilities().marginal_quantiles)
    return { false, false, true, false };
  return { false, true, false, false };
}

MarginalBounds MarginalIntervalScore::bounds(const Vector& x, const RngStream& rng) const
{
  return marginal_bounds(*model_, x, lower_level(), upper_level(), rng, fallback_);
}

Vector cqr_scores(const MarginalBounds& b, const Vector& y)
{
  return (b.lower - y).cwiseMax(y - b.upper);
}

std::unique_ptr<PointScore> MarginalIntervalScore::at(const Vector& x, const RngStream& rng) const
{
  return make_point([b = bounds(x, rng)](const Vector& y) { return cqr_scores(b, y).maxCoeff(); });
}

// --- sample-set scores -----------------------------------------------------

NearestSamplePoint::NearestSamplePoint(Matrix centers)
  : centers_(std::move(centers))
{
  if (centers_.rows() < 1)
    throw InvalidConfig("nearest-sample score needs at least one center");
}

double NearestSamplePoint::operator()(const Vector& y) const
{
  return std::sqrt((centers_.rowwise() - y.transpose()).rowwise().squaredNorm().minCoeff());
}

PcpScore::PcpScore(ModelPtr model, Index L)
  : model_(std::move(model))
  , L_(L)
{
  check_count(L_, "L");
  require(*model_, requirements(), "pcp");
}

std::unique_ptr<PointScore> PcpScore::at(const Vector& x, const RngStream& rng) const
{
  return std::make_unique<NearestSamplePoint>(model_->sample(x, L_, rng));
}

HdPcpScore::HdPcpScore(ModelPtr model, Index L, double alpha)
  : model_(std::move(model))
  , L_(L)
{
  check_count(L_, "L");
  check_alpha(alpha);
  kept_ = static_cast<Index>(std::floor((1.0 - alpha) * static_cast<double>(L_)));
  if (kept_ < 1)
    throw InvalidConfig("hd_pcp keeps floor((1 - alpha) L) = 0 samples");
  require(*model_, requirements(), "hd_pcp");
}

std::unique_ptr<PointScore> HdPcpScore::at(const Vector& x, const RngStream& rng) const
{
  const Matrix draws = model_->sample(x, L_, rng);
  std::vector<double> logf(static_cast<std::size_t>(L_));
  for (Index l = 0; l < L_; ++l)
    logf[static_cast<std::size_t>(l)] = model_->log_density(x, draws.row(l).transpose());
  std::vector<Index> order(static_cast<std::size_t>(L_));
  std::iota(order.begin(), order.end(), Index{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return logf[static_cast<std::size_t>(a)] > logf[static_cast<std::size_t>(b)];
  });
  Matrix kept(kept_, draws.cols());
  for (Index r = 0; r < kept_; ++r)
    kept.row(r) = draws.row(order[static_cast<std::size_t>(r)]);
  return std::make_unique<NearestSamplePoint>(std::move(kept));
}

StdqrScore::StdqrScore(ModelPtr model, Index L, double alpha)
  : model_(std::move(model))
  , L_(L)
{
  check_count(L_, "L");
  check_alpha(alpha);
  kept_ = static_cast<Index>(std::ceil((1.0 - alpha) * static_cast<double>(L_) - 1e-9));
  if (kept_ < 1)
    throw InvalidConfig("stdqr keeps no latent samples");
  require(*model_, requirements(), "stdqr");
}

Matrix StdqrScore::kept_latents(const RngStream& rng) const
{
  const Index d = model_->output_dim();
  auto engine = rng.engine();
  std::normal_distribution<double> normal;
  Matrix z(L_, d);
  for (Index l = 0; l < L_; ++l)
    for (Index i = 0; i < d; ++i)
      z(l, i) = normal(engine);
  const Vector norms = z.rowwise().squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(L_));
  std::iota(order.begin(), order.end(), Index{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return norms(a) < norms(b); });
  Matrix kept(kept_, d);
  for (Index r = 0; r < kept_; ++r)
    kept.row(r) = z.row(order[static_cast<std::size_t>(r)]);
  return kept;
}

std::unique_ptr<PointScore> StdqrScore::at(const Vector& x, const RngStream& rng) const
{
  const Matrix z = kept_latents(rng);
  Matrix centers(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r)
    centers.row(r) = model_->latent_forward(z.row(r).transpose(), x).transpose();
  return std::make_unique<NearestSamplePoint>(std::move(centers));
}

SampleMaxDensityScore::SampleMaxDensityScore(ModelPtr model, Index L)
  : model_(std::move(model))
  , L_(L)
{
  check_count(L_, "L");
  require(*model_, requirements(), "dr_cp_fmax");
}

std::unique_ptr<PointScore> SampleMaxDensityScore::at(const Vector& x, const RngStream& rng) const
{
  const Index d = model_->output_dim();
  return make_point([nearest = NearestSamplePoint(model_->sample(x, L_, rng)), d](const Vector& y) {
    const double r = nearest(y);
    return -std::exp(-0.5 * r * r - static_cast<double>(d) * kLogSqrt2Pi);
  });
}

// --- wrappers --------------------------------------------------------------

double ecdf_rank(const std::vector<double>& sorted_draws, double value)
{
  if (sorted_draws.empty())
    throw InvalidConfig("ecdf of an empty sample");
  const auto count = std::upper_bound(sorted_draws.begin(), sorted_draws.end(), value) - sorted_draws.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_draws.size());
}

namespace {

std::vector<double> sorted_base_scores(const PointScore& base, const Matrix& draws)
{
  std::vector<double> out(static_cast<std::size_t>(draws.rows()));
  for (Index k = 0; k < draws.rows(); ++k)
    out[static_cast<std::size_t>(k)] = base(draws.row(k).transpose());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

EcdfScore::EcdfScore(ScorePtr base, ModelPtr model, Index K, std::string name)
  : base_(std::move(base))
  , model_(std::move(model))
  , K_(K)
  , name_(std::move(name))
{
  check_count(K_, "K");
  require(*model_, requirements(), name_);
}

Capabilities EcdfScore::requirements() const
{
  return merge(base_->requirements(), { false, true, false, false });
}

std::unique_ptr<PointScore> EcdfScore::at(const Vector& x, const RngStream& rng) const
{
  std::shared_ptr<const PointScore> base = base_->at(x, rng.derive(0));
  auto sorted = sorted_base_scores(*base, model_->sample(x, K_, rng.derive(1)));
  return make_point([base, sorted = std::move(sorted)](const Vector& y) { return ecdf_rank(sorted, (*base)(y)); });
}

Cp2Score::Cp2Score(ScorePtr base, ModelPtr model, Index K, double alpha, std::string name)
  : base_(std::move(base))
  , model_(std::move(model))
  , K_(K)
  , name_(std::move(name))
{
  check_count(K_, "K");
  check_alpha(alpha);
  rank_ = static_cast<Index>(std::floor(static_cast<double>(K_) * (1.0 - alpha)));
  if (rank_ < 1)
    throw InvalidConfig("cp2 threshold rank floor(K (1 - alpha)) is 0");
  require(*model_, requirements(), name_);
}

Capabilities Cp2Score::requirements() const
{
  return merge(base_->requirements(), { false, true, false, false });
}

double Cp2Score::tau(const Vector& x, const RngStream& rng) const
{
  const auto base = base_->at(x, rng.derive(0));
  return sorted_base_scores(*base, model_->sample(x, K_, rng.derive(1)))[static_cast<std::size_t>(rank_ - 1)];
}

std::unique_ptr<PointScore> Cp2Score::at(const Vector& x, const RngStream& rng) const
{
  std::shared_ptr<const PointScore> base = base_->at(x, rng.derive(0));
  const auto sorted = sorted_base_scores(*base, model_->sample(x, K_, rng.derive(1)));
  const double tau = sorted[static_cast<std::size_t>(rank_ - 1)];
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw NumericalError(name_ + ": degenerate threshold tau_x = " + std::to_string(tau));
  return make_point([base, tau](const Vector& y) { return (*base)(y) / tau; });
}

MonotoneTransform MonotoneTransform::affine(double scale, double shift)
{
  if (!(scale > 0.0))
    throw InvalidConfig("affine transform needs a positive scale");
  return { [=](double s) { return scale * s + shift; }, [=](double t) { return (t - shift) / scale; } };
}

TransformedScore::TransformedScore(ScorePtr base, MonotoneTransform f)
  : base_(std::move(base))
  , f_(std::move(f))
{
}

std::unique_ptr<PointScore> TransformedScore::at(const Vector& x, const RngStream& rng) const
{
  std::shared_ptr<const PointScore> base = base_->at(x, rng);
  return make_point([base, f = f_.forward](const Vector& y) { return f((*base)(y)); });
}

} // namespace mocp
