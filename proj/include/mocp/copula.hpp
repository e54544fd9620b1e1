#pragma once

#include "mocp/conformal.hpp"

#include <optional>
#include <vector>

namespace mocp {

struct CopulaConfig
{
  //! Leading fraction of the calibration rows used to fit the per-output
  //! empirical CDFs; the rest selects the levels.
  double cal1_fraction = 0.5;
  Index fallback_samples = 100;
};

//! Result of the CopulaCPTS level search.
//!
//! Level k_i in [1, n1 + 1] stands for the threshold s_i* equal to the k_i-th
//! smallest cal-1 score of output i (+inf for k_i = n1 + 1). A point is
//! covered iff s_i < s_i* for every i, i.e. iff fewer than k_i cal-1 scores
//! are <= s_i.
struct CopulaCalibration
{
  double alpha = 0.2;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<std::size_t> levels;
  Vector thresholds;
  std::size_t required = 0;   // ceil((1 - alpha) n2)
  std::size_t covered = 0;    // cal-2 points inside the returned region
  double coverage = 0.0;      // covered / n2
  double loss = 0.0;          // |coverage - (1 - alpha)|
  double mean_volume = 0.0;   // mean cal-2 rectangle volume
  std::vector<std::size_t> symmetric_levels;
};

class CopulaPredictor final : public CalibratedPredictor
{
public:
  CopulaPredictor(ModelPtr model, CopulaCalibration cal, double alpha, Index fallback, std::optional<MonotoneTransform> transform);
  std::unique_ptr<Region> region(const Vector& x, const RngStream& rng) const override;
  const CopulaCalibration& calibration() const { return cal_; }

private:
  ModelPtr model_;
  CopulaCalibration cal_;
  double alpha_;
  Index fallback_;
  std::optional<MonotoneTransform> transform_;
};

//! CopulaCPTS on per-output CQR scores with an empirical copula.
//!
//! The levels are chosen by a deterministic search over the empirical
//! quantile grid: start from the smallest common level that reaches the
//! coverage target on cal-2, then repeatedly apply the first move that keeps
//! the target and lowers the mean rectangle volume, trying single-output
//! decreases before trades that lower one level and raise another by the
//! least amount that restores coverage.
class CopulaCpts final : public ConformalMethod
{
public:
  CopulaCpts(ModelPtr model, double alpha, CopulaConfig cfg = {}, std::optional<MonotoneTransform> transform = {});

  std::string name() const override { return "copula_cpts"; }
  Capabilities requirements() const override;
  std::unique_ptr<CalibratedPredictor> calibrate(const Dataset& cal, const RngStream& rng) const override;

  CopulaCalibration fit_levels(const Dataset& cal, const RngStream& rng) const;

  //! Per-output (optionally transformed) CQR scores at (x, y).
  Vector scores(const Vector& x, const Vector& y, const RngStream& rng) const;

private:
  ModelPtr model_;
  double alpha_;
  CopulaConfig cfg_;
  std::optional<MonotoneTransform> transform_;
};

} // namespace mocp
