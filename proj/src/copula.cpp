#include "mocp/copula.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace mocp {

namespace {

struct Cal2Point
{
  std::vector<std::size_t> rank; // #cal-1 scores <= s_i, per output
  Vector base_width;             // u_i - l_i
};

class LevelSearch
{
public:
  LevelSearch(std::vector<std::vector<double>> cal1_sorted,
              std::vector<Cal2Point> points,
              std::size_t required,
              const std::optional<MonotoneTransform>& transform)
    : sorted_(std::move(cal1_sorted))
    , points_(std::move(points))
    , required_(required)
    , transform_(transform)
    , n1_(sorted_.front().size())
    , d_(sorted_.size())
  {
  }

  double threshold(std::size_t i, std::size_t k) const { return k > n1_ ? kInf : sorted_[i][k - 1]; }

  // Half-width added on each side of [l_i, u_i], in original score units.
  double margin(std::size_t i, std::size_t k) const
  {
    const double t = threshold(i, k);
    if (std::isinf(t) || !transform_)
      return t;
    return transform_->inverse(t);
  }

  std::size_t covered(const std::vector<std::size_t>& k) const
  {
    std::size_t count = 0;
    for (const auto& p : points_)
      count += inside(p, k) ? 1 : 0;
    return count;
  }

  static bool inside(const Cal2Point& p, const std::vector<std::size_t>& k)
  {
    for (std::size_t i = 0; i < k.size(); ++i)
      if (p.rank[i] >= k[i])
        return false;
    return true;
  }

  double mean_volume(const std::vector<std::size_t>& k) const
  {
    std::vector<double> m(d_);
    for (std::size_t i = 0; i < d_; ++i)
      m[i] = margin(i, k[i]);
    double total = 0.0;
    for (const auto& p : points_) {
      double v = 1.0;
      for (std::size_t i = 0; i < d_; ++i)
        v *= std::max(0.0, p.base_width(static_cast<Index>(i)) + 2.0 * m[i]);
      total += v;
    }
    return total / static_cast<double>(points_.size());
  }

  std::vector<std::size_t> symmetric() const
  {
    std::size_t lo = 1, hi = n1_ + 1; // hi always feasible
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (covered(std::vector<std::size_t>(d_, mid)) >= required_)
        hi = mid;
      else
        lo = mid + 1;
    }
    return std::vector<std::size_t>(d_, lo);
  }

  // Smallest k_j' > k_j restoring the target after k_i is lowered by one, or
  // 0 if none exists.
  std::size_t trade_level(const std::vector<std::size_t>& k, std::size_t i, std::size_t j) const
  {
    std::vector<std::size_t> lowered = k;
    lowered[i] -= 1;
    std::size_t have = 0;
    std::vector<std::size_t> blocked; // ranks in j of points only excluded by output j
    for (const auto& p : points_) {
      bool others = true;
      for (std::size_t q = 0; q < d_ && others; ++q)
        if (q != j && p.rank[q] >= lowered[q])
          others = false;
      if (!others)
        continue;
      if (p.rank[j] < lowered[j])
        ++have;
      else
        blocked.push_back(p.rank[j]);
    }
    if (have >= required_)
      return lowered[j];
    const std::size_t deficit = required_ - have;
    if (deficit > blocked.size())
      return 0;
    std::nth_element(blocked.begin(), blocked.begin() + static_cast<std::ptrdiff_t>(deficit - 1), blocked.end());
    return blocked[deficit - 1] + 1;
  }

  std::vector<std::size_t> run(std::vector<std::size_t> k) const
  {
    double vol = mean_volume(k);
    const auto better = [&](double v) { return v < vol && !(std::abs(v - vol) <= 1e-12 * std::abs(vol)); };
    for (std::size_t iter = 0; iter < 100000; ++iter) {
      bool moved = false;
      for (std::size_t i = 0; i < d_ && !moved; ++i) {
        if (k[i] <= 1)
          continue;
        auto trial = k;
        trial[i] -= 1;
        if (covered(trial) < required_)
          continue;
        const double v = mean_volume(trial);
        if (better(v)) {
          k = std::move(trial);
          vol = v;
          moved = true;
        }
      }
      for (std::size_t i = 0; i < d_ && !moved; ++i) {
        if (k[i] <= 1)
          continue;
        for (std::size_t j = 0; j < d_ && !moved; ++j) {
          if (j == i)
            continue;
          const std::size_t kj = trade_level(k, i, j);
          if (kj == 0 || kj > n1_ + 1)
            continue;
          auto trial = k;
          trial[i] -= 1;
          trial[j] = kj;
          const double v = mean_volume(trial);
          if (better(v)) {
            k = std::move(trial);
            vol = v;
            moved = true;
          }
        }
      }
      if (!moved)
        return k;
    }
    spdlog::warn("copula_cpts: level search hit the iteration cap");
    return k;
  }

private:
  std::vector<std::vector<double>> sorted_;
  std::vector<Cal2Point> points_;
  std::size_t required_;
  const std::optional<MonotoneTransform>& transform_;
  std::size_t n1_;
  std::size_t d_;
};

class CopulaRegion final : public Region
{
public:
  CopulaRegion(MarginalBounds bounds, Vector thresholds, std::optional<MonotoneTransform> transform)
    : bounds_(std::move(bounds))
    , thresholds_(std::move(thresholds))
    , transform_(std::move(transform))
  {
  }

  bool contains(const Vector& y) const override
  {
    const Vector s = cqr_scores(bounds_, y);
    for (Index i = 0; i < s.size(); ++i) {
      const double v = transform_ ? transform_->forward(s(i)) : s(i);
      if (!(v < thresholds_(i)))
        return false;
    }
    return true;
  }

private:
  MarginalBounds bounds_;
  Vector thresholds_;
  std::optional<MonotoneTransform> transform_;
};

} // namespace

CopulaPredictor::CopulaPredictor(ModelPtr model,
                                 CopulaCalibration cal,
                                 double alpha,
                                 Index fallback,
                                 std::optional<MonotoneTransform> transform)
  : model_(std::move(model))
  , cal_(std::move(cal))
  , alpha_(alpha)
  , fallback_(fallback)
  , transform_(std::move(transform))
{
}

std::unique_ptr<Region> CopulaPredictor::region(const Vector& x, const RngStream& rng) const
{
  auto b = marginal_bounds(*model_, x, alpha_ / 2.0, 1.0 - alpha_ / 2.0, rng, fallback_);
  return std::make_unique<CopulaRegion>(std::move(b), cal_.thresholds, transform_);
}

CopulaCpts::CopulaCpts(ModelPtr model, double alpha, CopulaConfig cfg, std::optional<MonotoneTransform> transform)
  : model_(std::move(model))
  , alpha_(alpha)
  , cfg_(cfg)
  , transform_(std::move(transform))
{
  check_alpha(alpha_);
  if (!(cfg_.cal1_fraction > 0.0 && cfg_.cal1_fraction < 1.0))
    throw InvalidConfig("copula_cpts: cal-1 fraction must lie in (0, 1)");
  if (cfg_.fallback_samples < 1)
    throw InvalidConfig("copula_cpts: fallback sample count must be positive");
  require(*model_, requirements(), "copula_cpts");
}

Capabilities CopulaCpts::requirements() const
{
  if (model_->capabilities().marginal_quantiles)
    return { false, false, true, false };
  return { false, true, false, false };
}

Vector CopulaCpts::scores(const Vector& x, const Vector& y, const RngStream& rng) const
{
  Vector s = cqr_scores(marginal_bounds(*model_, x, alpha_ / 2.0, 1.0 - alpha_ / 2.0, rng, cfg_.fallback_samples), y);
  if (transform_)
    for (Index i = 0; i < s.size(); ++i)
      s(i) = transform_->forward(s(i));
  return s;
}

CopulaCalibration CopulaCpts::fit_levels(const Dataset& cal, const RngStream& rng) const
{
  const auto n = static_cast<std::size_t>(cal.n());
  const auto n1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg_.cal1_fraction));
  if (n1 < 1 || n1 >= n)
    throw InvalidConfig("copula_cpts: calibration set of " + std::to_string(n) + " rows is too small to split");
  const std::size_t n2 = n - n1;
  const auto d = static_cast<std::size_t>(model_->output_dim());

  std::vector<std::vector<double>> sorted(d, std::vector<double>(n1));
  for (std::size_t j = 0; j < n1; ++j) {
    const Vector s = scores(cal.input(static_cast<Index>(j)), cal.output(static_cast<Index>(j)), rng.derive(j));
    for (std::size_t i = 0; i < d; ++i)
      sorted[i][j] = s(static_cast<Index>(i));
  }
  for (auto& col : sorted)
    std::sort(col.begin(), col.end());

  std::vector<Cal2Point> points(n2);
  for (std::size_t j = 0; j < n2; ++j) {
    const auto row = static_cast<Index>(n1 + j);
    const auto b = marginal_bounds(*model_, cal.input(row), alpha_ / 2.0, 1.0 - alpha_ / 2.0, rng.derive(n1 + j), cfg_.fallback_samples);
    Vector s = cqr_scores(b, cal.output(row));
    points[j].rank.resize(d);
    points[j].base_width = b.upper - b.lower;
    for (std::size_t i = 0; i < d; ++i) {
      double v = s(static_cast<Index>(i));
      if (transform_)
        v = transform_->forward(v);
      points[j].rank[i] = static_cast<std::size_t>(std::upper_bound(sorted[i].begin(), sorted[i].end(), v) - sorted[i].begin());
    }
  }

  CopulaCalibration out;
  out.alpha = alpha_;
  out.n1 = n1;
  out.n2 = n2;
  out.required = static_cast<std::size_t>(std::ceil((1.0 - alpha_) * static_cast<double>(n2) - 1e-9));

  const LevelSearch search(std::move(sorted), std::move(points), out.required, transform_);
  out.symmetric_levels = search.symmetric();
  out.levels = search.run(out.symmetric_levels);
  out.thresholds.resize(static_cast<Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    out.thresholds(static_cast<Index>(i)) = search.threshold(i, out.levels[i]);
  out.covered = search.covered(out.levels);
  out.coverage = static_cast<double>(out.covered) / static_cast<double>(n2);
  out.loss = std::abs(out.coverage - (1.0 - alpha_));
  out.mean_volume = search.mean_volume(out.levels);
  return out;
}

std::unique_ptr<CalibratedPredictor> CopulaCpts::calibrate(const Dataset& cal, const RngStream& rng) const
{
  return std::make_unique<CopulaPredictor>(model_, fit_levels(cal, rng), alpha_, cfg_.fallback_samples, transform_);
}

} // namespace mocp
