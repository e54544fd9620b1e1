#pragma once

#include "mocp/methods.hpp"
#include "mocp/toy_process.hpp"

#include <string>
#include <vector>

namespace mocp {

//! n i.i.d. pairs from a toy process, scaled with the exact moments when
//! spec.standardize is set (the coordinates OracleToyModel works in).
Dataset generate_toy(const ToyProcessSpec& spec, Index n, const RngStream& rng);
Dataset gen_unimodal(Index n, const RngStream& rng);
Dataset gen_bimodal(Index n, const RngStream& rng);

//! Standard normal predictive law in d dimensions with the ball
//! {y : ||y|| <= r}, r^2 the (1 - alpha) quantile of chi-square(d), as region.
struct BallScenario
{
  int d = 1;
  double alpha = 0.2;
  double radius = 0.0;
  double log_volume = 0.0;

  bool contains(const Vector& y) const { return y.norm() <= radius; }
};

BallScenario ball_scenario(int d, double alpha);

//! N(0, I_d) as a predictor with no inputs.
ModelPtr standard_normal_model(int d);

struct BetaHarnessResult
{
  std::vector<double> coverages;
  std::size_t k_alpha = 0;
  double beta_a = 0.0;
  double beta_b = 0.0;
  double beta_mean = 0.0;
  double beta_variance = 0.0;
  double mean = 0.0;
  double variance = 0.0; // unbiased sample variance of the coverages
};

//! Replication r draws a fresh calibration set (n_cal points) and test set
//! (n_test points) from the process, calibrates `method` and records the test
//! coverage. The streams of replication r are rng.derive(r) and its children.
BetaHarnessResult coverage_beta_harness(const ToyProcessSpec& process,
                                        Index n_cal,
                                        double alpha,
                                        Index replications,
                                        const std::string& method,
                                        const ModelPtr& model,
                                        const MethodParams& params,
                                        const RngStream& rng,
                                        Index n_test = 2000);

} // namespace mocp
