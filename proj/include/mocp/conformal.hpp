#pragma once

#include "mocp/scores.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mocp {

//! Prediction region at one input.
class Region
{
public:
  virtual ~Region() = default;
  virtual bool contains(const Vector& y) const = 0;
};

class CalibratedPredictor
{
public:
  virtual ~CalibratedPredictor() = default;
  //! Region at x; any sampling the region needs is drawn from `rng`.
  virtual std::unique_ptr<Region> region(const Vector& x, const RngStream& rng) const = 0;
};

class ConformalMethod
{
public:
  virtual ~ConformalMethod() = default;
  virtual std::string name() const = 0;
  virtual Capabilities requirements() const = 0;
  //! Point j of `cal` uses the stream rng.derive(j).
  virtual std::unique_ptr<CalibratedPredictor> calibrate(const Dataset& cal, const RngStream& rng) const = 0;
};

using MethodPtr = std::shared_ptr<const ConformalMethod>;

//! Scores of every calibration point, point j drawn from rng.derive(j).
std::vector<double> calibration_scores(const ConformityScore& score, const Dataset& cal, const RngStream& rng);

//! Region {y : s(x, y) <= q_hat}.
class ScoreRegion final : public Region
{
public:
  ScoreRegion(std::unique_ptr<PointScore> score, double q_hat);
  bool contains(const Vector& y) const override { return region_contains((*score_)(y), q_hat_); }
  double score(const Vector& y) const { return (*score_)(y); }
  double q_hat() const { return q_hat_; }

private:
  std::unique_ptr<PointScore> score_;
  double q_hat_;
};

class SplitCalibrated final : public CalibratedPredictor
{
public:
  SplitCalibrated(ScorePtr score, CalibrationResult result);
  std::unique_ptr<Region> region(const Vector& x, const RngStream& rng) const override;
  const CalibrationResult& result() const { return result_; }
  const ConformityScore& score() const { return *score_; }

private:
  ScorePtr score_;
  CalibrationResult result_;
};

//! Split conformal prediction with a fixed conformity score.
class SplitConformal final : public ConformalMethod
{
public:
  SplitConformal(ScorePtr score, double alpha);
  std::string name() const override { return score_->name(); }
  Capabilities requirements() const override { return score_->requirements(); }
  std::unique_ptr<CalibratedPredictor> calibrate(const Dataset& cal, const RngStream& rng) const override;

  //! Same as calibrate() with a concrete return type.
  std::unique_ptr<SplitCalibrated> fit(const Dataset& cal, const RngStream& rng) const;

  const ScorePtr& score() const { return score_; }
  double alpha() const { return alpha_; }

private:
  ScorePtr score_;
  double alpha_;
};

} // namespace mocp
