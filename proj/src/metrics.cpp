#include "mocp/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mocp {

double marginal_coverage(const std::vector<bool>& memberships)
{
  if (memberships.empty())
    throw InvalidData("coverage of an empty test set");
  const auto hits = std::count(memberships.begin(), memberships.end(), true);
  return static_cast<double>(hits) / static_cast<double>(memberships.size());
}

double estimate_region_size(const BasePredictor& model,
                            const Membership& member,
                            const Vector& x,
                            Index K_volume,
                            const RngStream& rng)
{
  if (K_volume < 1)
    throw InvalidConfig("K_volume must be at least 1");
  const Matrix draws = model.sample(x, K_volume, rng);
  double total = 0.0;
  for (Index k = 0; k < K_volume; ++k) {
    const Vector y = draws.row(k).transpose();
    if (!member(y))
      continue;
    const double logf = model.log_density(x, y);
    if (!std::isfinite(logf))
      throw NumericalError("region size: predictive density vanishes at a sampled point");
    total += std::exp(-logf);
  }
  return total / static_cast<double>(K_volume);
}

double median(std::vector<double> v)
{
  if (v.empty())
    throw InvalidData("median of an empty list");
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double upper = v[h];
  if (v.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h));
  return 0.5 * (lower + upper);
}

SizeEstimate summarize_sizes(std::vector<double> per_point, Index K_volume)
{
  SizeEstimate s;
  s.K_volume = K_volume;
  if (!per_point.empty()) {
    s.mean_size = std::accumulate(per_point.begin(), per_point.end(), 0.0) / static_cast<double>(per_point.size());
    s.median_size = median(per_point);
  }
  s.per_point = std::move(per_point);
  return s;
}

WindowMin min_mean_window(const std::vector<double>& c, std::size_t min_len)
{
  const std::size_t n = c.size();
  if (min_len < 1 || min_len > n)
    throw InvalidConfig("window length out of range");
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] + c[i];

  WindowMin best{ prefix[n] / static_cast<double>(n), 0, n - 1 };
  // Dinkelbach: look for a window with sum(c - lambda) < 0 until none exists.
  for (int iter = 0; iter < 200; ++iter) {
    const double lambda = best.mean;
    double best_gain = 0.0;
    std::size_t bi = 0, bj = 0;
    double max_q = -kInf;
    std::size_t arg_max = 0;
    for (std::size_t j = min_len; j <= n; ++j) {
      const std::size_t i = j - min_len;
      const double qi = prefix[i] - lambda * static_cast<double>(i);
      if (qi > max_q) {
        max_q = qi;
        arg_max = i;
      }
      const double gain = prefix[j] - lambda * static_cast<double>(j) - max_q;
      if (gain < best_gain) {
        best_gain = gain;
        bi = arg_max;
        bj = j;
      }
    }
    if (!(best_gain < -1e-12))
      break;
    const double mean = (prefix[bj] - prefix[bi]) / static_cast<double>(bj - bi);
    if (!(mean < best.mean))
      break;
    best = { mean, bi, bj - 1 };
  }
  return best;
}

WscResult wsc(const Matrix& test_x, const std::vector<bool>& memberships, const WscConfig& cfg, const RngStream& rng)
{
  const auto n = static_cast<std::size_t>(test_x.rows());
  if (memberships.size() != n)
    throw InvalidData("wsc: memberships and inputs differ in length");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0))
    throw InvalidConfig("wsc: delta must lie in (0, 1]");
  if (!(cfg.test_split_fraction > 0.0 && cfg.test_split_fraction < 1.0))
    throw InvalidConfig("wsc: split fraction must lie in (0, 1)");
  if (cfg.n_directions < 1)
    throw InvalidConfig("wsc: need at least one direction");

  WscResult out;
  out.value = marginal_coverage(memberships);
  const auto n1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.test_split_fraction));
  if (static_cast<double>(n) < 2.0 / cfg.delta || n1 < 1 || n1 >= n) {
    spdlog::warn("wsc: test set of {} points is too small, reporting marginal coverage", n);
    out.fallback = true;
    return out;
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
  auto shuffle_engine = rng.derive(0).engine();
  std::shuffle(perm.begin(), perm.end(), shuffle_engine);

  const Index p = test_x.cols();
  const auto min_len = static_cast<std::size_t>(std::ceil(cfg.delta * static_cast<double>(n1) - 1e-9));
  auto dir_engine = rng.derive(1).engine();
  std::normal_distribution<double> normal;

  std::vector<std::pair<double, double>> proj(n1); // (projection, covered)
  std::vector<double> cov(n1);
  double worst = kInf;
  for (Index t = 0; t < cfg.n_directions; ++t) {
    Vector v(p);
    for (Index i = 0; i < p; ++i)
      v(i) = normal(dir_engine);
    const double nv = v.norm();
    if (!(nv > 0.0))
      continue;
    v /= nv;
    for (std::size_t i = 0; i < n1; ++i) {
      const std::size_t r = perm[i];
      proj[i] = { test_x.row(static_cast<Index>(r)).dot(v), memberships[r] ? 1.0 : 0.0 };
    }
    std::sort(proj.begin(), proj.end());
    for (std::size_t i = 0; i < n1; ++i)
      cov[i] = proj[i].second;
    const auto w = min_mean_window(cov, min_len);
    if (w.mean < worst) {
      worst = w.mean;
      out.direction = v;
      out.a = proj[w.first].first;
      out.b = proj[w.last].first;
    }
  }
  out.search_points = n1;
  if (out.direction.size() == 0) {
    out.fallback = true;
    return out;
  }

  std::size_t inside = 0, hits = 0;
  for (std::size_t i = n1; i < n; ++i) {
    const std::size_t r = perm[i];
    const double z = test_x.row(static_cast<Index>(r)).dot(out.direction);
    if (z >= out.a && z <= out.b) {
      ++inside;
      hits += memberships[r] ? 1 : 0;
    }
  }
  out.eval_points_in_slab = inside;
  if (inside == 0) {
    spdlog::warn("wsc: no held-out point falls in the worst slab, reporting marginal coverage");
    out.fallback = true;
    return out;
  }
  out.value = static_cast<double>(hits) / static_cast<double>(inside);
  return out;
}

Index Partition::cell(const Vector& point) const
{
  Index best = 0;
  (centroids.rowwise() - point.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return best;
}

std::vector<Index> Partition::cells(const Matrix& points) const
{
  std::vector<Index> out(static_cast<std::size_t>(points.rows()));
  for (Index i = 0; i < points.rows(); ++i)
    out[static_cast<std::size_t>(i)] = cell(points.row(i).transpose());
  return out;
}

Partition kmeans_pp(const Matrix& points, Index J, const RngStream& rng, int max_iters)
{
  const Index n = points.rows();
  if (J < 1 || J > n)
    throw InvalidConfig("k-means: need 1 <= J <= number of points");
  auto engine = rng.engine();

  Partition part;
  part.centroids.resize(J, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  part.centroids.row(0) = points.row(first(engine));
  Vector d2 = (points.rowwise() - part.centroids.row(0)).rowwise().squaredNorm();
  for (Index j = 1; j < J; ++j) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(engine);
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target < 0.0)
          break;
      }
    } else {
      pick = first(engine);
    }
    part.centroids.row(j) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - part.centroids.row(j)).rowwise().squaredNorm());
  }

  part.assign.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double obj = 0.0;
    for (Index i = 0; i < n; ++i) {
      Index c = 0;
      dist(i) = (part.centroids.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&c);
      obj += dist(i);
      if (part.assign[static_cast<std::size_t>(i)] != c) {
        part.assign[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    part.objective.push_back(obj);
    if (!changed && iter > 0)
      break;

    Matrix sums = Matrix::Zero(J, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(J), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = part.assign[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Index j = 0; j < J; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        part.centroids.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
      } else {
        Index far = 0;
        dist.maxCoeff(&far);
        part.centroids.row(j) = points.row(far);
        dist(far) = 0.0;
      }
    }
  }
  return part;
}

double cec(const std::vector<Index>& cells, const std::vector<bool>& memberships, double alpha)
{
  if (cells.size() != memberships.size())
    throw InvalidData("cec: cells and memberships differ in length");
  if (cells.empty())
    throw InvalidData("cec of an empty test set");
  check_alpha(alpha);
  const Index J = *std::max_element(cells.begin(), cells.end()) + 1;
  std::vector<double> count(static_cast<std::size_t>(J), 0.0), hits(static_cast<std::size_t>(J), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] < 0)
      throw InvalidData("cec: negative cell index");
    count[static_cast<std::size_t>(cells[i])] += 1.0;
    hits[static_cast<std::size_t>(cells[i])] += memberships[i] ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(cells.size());
  double total = 0.0;
  for (std::size_t j = 0; j < count.size(); ++j) {
    if (count[j] == 0.0)
      continue;
    const double err = hits[j] / count[j] - (1.0 - alpha);
    total += count[j] / n * err * err;
  }
  return total;
}

double cec_x(const Matrix& test_x, const std::vector<bool>& memberships, const Partition& partition, double alpha)
{
  return cec(partition.cells(test_x), memberships, alpha);
}

Matrix log_density_features(const BasePredictor& model, const Matrix& xs, Index m, const RngStream& rng)
{
  if (m < 1)
    throw InvalidConfig("cec-v: m must be at least 1");
  Matrix feats(xs.rows(), m);
  for (Index i = 0; i < xs.rows(); ++i) {
    const Vector x = xs.row(i).transpose();
    const Matrix draws = model.sample(x, m, rng.derive(static_cast<std::uint64_t>(i)));
    std::vector<double> v(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k)
      v[static_cast<std::size_t>(k)] = model.log_density(x, draws.row(k).transpose());
    std::sort(v.begin(), v.end());
    for (Index k = 0; k < m; ++k)
      feats(i, k) = v[static_cast<std::size_t>(k)];
  }
  return feats;
}

double cec_v(const BasePredictor& model,
             const Matrix& val_x,
             const Matrix& test_x,
             const std::vector<bool>& memberships,
             const CecVConfig& cfg,
             double alpha,
             const RngStream& rng)
{
  const Matrix val_f = log_density_features(model, val_x, cfg.m, rng.derive(0));
  const Matrix test_f = log_density_features(model, test_x, cfg.m, rng.derive(1));
  const Index J = std::min(cfg.J, val_f.rows());
  const auto part = kmeans_pp(val_f, J, rng.derive(2), cfg.max_iters);
  return cec(part.cells(test_f), memberships, alpha);
}

Index default_cluster_count(Index n_test)
{
  return std::min<Index>(10, std::max<Index>(2, n_test / 500));
}

} // namespace mocp
