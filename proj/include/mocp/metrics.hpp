#pragma once

#include "mocp/predictor.hpp"

#include <functional>
#include <vector>

namespace mocp {

//! Fraction of true entries. Throws InvalidData on an empty list.
double marginal_coverage(const std::vector<bool>& memberships);

using Membership = std::function<bool(const Vector&)>;

//! Importance-sampling size estimate of {y : member(y)} at x:
//!   (1/K) sum_k 1(Yhat_k in R) / f(Yhat_k | x),  Yhat_k ~ f(. | x).
double estimate_region_size(const BasePredictor& model,
                            const Membership& member,
                            const Vector& x,
                            Index K_volume,
                            const RngStream& rng);

struct SizeEstimate
{
  std::vector<double> per_point;
  double mean_size = 0.0;
  double median_size = 0.0;
  Index K_volume = 0;
};

//! Median of an even count averages the two middle values.
SizeEstimate summarize_sizes(std::vector<double> per_point, Index K_volume);

double median(std::vector<double> values);

struct WscConfig
{
  double delta = 0.2;
  Index n_directions = 1000;
  double test_split_fraction = 0.5;
};

struct WscResult
{
  double value = 0.0;
  bool fallback = false;
  Vector direction;
  double a = 0.0;
  double b = 0.0;
  std::size_t search_points = 0;
  std::size_t eval_points_in_slab = 0;
};

//! Worst-slab coverage. The test points are shuffled (rng.derive(0)) and
//! split; the slab {x : a <= v'x <= b} with at least a delta fraction of the
//! search half and the lowest coverage there is found over n_directions
//! random unit directions (rng.derive(1)), then its coverage is measured on
//! the other half. Falls back to the overall coverage when the held-out half
//! has no point in the slab or the test set is smaller than 2 / delta.
WscResult wsc(const Matrix& test_x, const std::vector<bool>& memberships, const WscConfig& cfg, const RngStream& rng);

//! Smallest mean over windows of at least `min_len` consecutive values,
//! and the window [first, last] reaching it.
struct WindowMin
{
  double mean = 0.0;
  std::size_t first = 0;
  std::size_t last = 0;
};
WindowMin min_mean_window(const std::vector<double>& values, std::size_t min_len);

struct Partition
{
  Matrix centroids; // J x p
  std::vector<Index> assign;
  //! Sum of squared distances after each assignment step.
  std::vector<double> objective;

  Index J() const { return centroids.rows(); }
  Index cell(const Vector& point) const;
  std::vector<Index> cells(const Matrix& points) const;
};

//! k-means++ seeding followed by Lloyd iterations until the assignment is
//! stable or `max_iters` is reached. Empty clusters are reseeded at the point
//! farthest from its centroid.
Partition kmeans_pp(const Matrix& points, Index J, const RngStream& rng, int max_iters = 100);

//! sum_j (n_j / n) (coverage_j - (1 - alpha))^2 over nonempty cells.
double cec(const std::vector<Index>& cells, const std::vector<bool>& memberships, double alpha);

double cec_x(const Matrix& test_x, const std::vector<bool>& memberships, const Partition& partition, double alpha);

struct CecVConfig
{
  Index m = 20;
  Index J = 10;
  int max_iters = 100;
};

//! Row i: sorted log f(Yhat_k | x_i) of m draws from rng.derive(i).
Matrix log_density_features(const BasePredictor& model, const Matrix& xs, Index m, const RngStream& rng);

//! CEC on clusters of log-density features. Clusters are fitted on the
//! validation inputs' features (rng.derive(0), rng.derive(2)) and the test
//! features (rng.derive(1)) are assigned to the nearest centroid.
double cec_v(const BasePredictor& model,
             const Matrix& val_x,
             const Matrix& test_x,
             const std::vector<bool>& memberships,
             const CecVConfig& cfg,
             double alpha,
             const RngStream& rng);

//! min(10, max(2, floor(n_test / 500))).
Index default_cluster_count(Index n_test);

} // namespace mocp
