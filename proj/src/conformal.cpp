#include "mocp/conformal.hpp"

namespace mocp {

std::vector<double> calibration_scores(const ConformityScore& score, const Dataset& cal, const RngStream& rng)
{
  std::vector<double> out(static_cast<std::size_t>(cal.n()));
  for (Index j = 0; j < cal.n(); ++j)
    out[static_cast<std::size_t>(j)] = score(cal.input(j), cal.output(j), rng.derive(static_cast<std::uint64_t>(j)));
  return out;
}

ScoreRegion::ScoreRegion(std::unique_ptr<PointScore> score, double q_hat)
  : score_(std::move(score))
  , q_hat_(q_hat)
{
}

SplitCalibrated::SplitCalibrated(ScorePtr score, CalibrationResult result)
  : score_(std::move(score))
  , result_(std::move(result))
{
}

std::unique_ptr<Region> SplitCalibrated::region(const Vector& x, const RngStream& rng) const
{
  return std::make_unique<ScoreRegion>(score_->at(x, rng), result_.q_hat);
}

SplitConformal::SplitConformal(ScorePtr score, double alpha)
  : score_(std::move(score))
  , alpha_(alpha)
{
  if (!score_)
    throw InvalidConfig("split conformal needs a score");
  check_alpha(alpha_);
}

std::unique_ptr<SplitCalibrated> SplitConformal::fit(const Dataset& cal, const RngStream& rng) const
{
  return std::make_unique<SplitCalibrated>(score_, conformal_quantile(calibration_scores(*score_, cal, rng), alpha_));
}

std::unique_ptr<CalibratedPredictor> SplitConformal::calibrate(const Dataset& cal, const RngStream& rng) const
{
  return fit(cal, rng);
}

} // namespace mocp
