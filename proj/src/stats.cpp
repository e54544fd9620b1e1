#include "mocp/stats.hpp"

#include "mocp/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mocp {

namespace {

// Average ranks (1-based) of v; also returns sum over tie groups of t^3 - t.
std::vector<double> average_ranks(const std::vector<double>& v, double* tie_term = nullptr)
{
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]])
      ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q)
      ranks[order[q]] = r;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term)
    *tie_term = ties;
  return ranks;
}

} // namespace

Matrix rank_rows(const Matrix& values)
{
  Matrix ranks(values.rows(), values.cols());
  for (Index r = 0; r < values.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(values.cols()));
    for (Index c = 0; c < values.cols(); ++c)
      row[static_cast<std::size_t>(c)] = values(r, c);
    const auto rk = average_ranks(row);
    for (Index c = 0; c < values.cols(); ++c)
      ranks(r, c) = rk[static_cast<std::size_t>(c)];
  }
  return ranks;
}

TestResult friedman_test(const Matrix& ranks)
{
  const Index n = ranks.rows(), k = ranks.cols();
  if (n < 2 || k < 2)
    throw InvalidData("friedman test needs at least 2 datasets and 2 methods");
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);

  double ties = 0.0;
  for (Index r = 0; r < n; ++r) {
    std::vector<double> row(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c)
      row[static_cast<std::size_t>(c)] = ranks(r, c);
    double t = 0.0;
    average_ranks(row, &t);
    ties += t;
  }
  const double correction = 1.0 - ties / (nd * (kd * kd * kd - kd));
  TestResult out;
  if (correction <= 1e-12)
    return out;
  const Vector sums = ranks.colwise().sum().transpose();
  double stat = 12.0 / (nd * kd * (kd + 1.0)) * sums.squaredNorm() - 3.0 * nd * (kd + 1.0);
  stat = std::max(0.0, stat / correction);
  out.statistic = stat;
  out.p_value = stat > 0.0 ? chi2_sf(stat, kd - 1.0) : 1.0;
  return out;
}

std::vector<double> signed_rank_null(const std::vector<double>& ranks)
{
  std::vector<long> doubled(ranks.size());
  long total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = std::lround(2.0 * ranks[i]);
    total += doubled[i];
  }
  std::vector<double> dist(static_cast<std::size_t>(total + 1), 0.0);
  dist[0] = 1.0;
  long reach = 0;
  for (long r : doubled) {
    for (long s = reach; s >= 0; --s) {
      if (dist[static_cast<std::size_t>(s)] == 0.0)
        continue;
      dist[static_cast<std::size_t>(s + r)] += 0.5 * dist[static_cast<std::size_t>(s)];
      dist[static_cast<std::size_t>(s)] *= 0.5;
    }
    reach += r;
  }
  return dist;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b, WilcoxonMethod method)
{
  if (a.size() != b.size())
    throw InvalidData("wilcoxon: samples differ in length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i])
      diff.push_back(a[i] - b[i]);
  TestResult out;
  if (diff.empty())
    return out;
  const std::size_t n = diff.size();
  if (n < 5)
    throw InvalidData("wilcoxon: fewer than 5 nonzero differences");

  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i)
    mag[i] = std::abs(diff[i]);
  double ties = 0.0;
  const auto ranks = average_ranks(mag, &ties);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diff[i] > 0.0)
      w_plus += ranks[i];
  out.statistic = w_plus;

  const bool exact = method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && n <= 25);
  if (exact) {
    const auto dist = signed_rank_null(ranks);
    const auto t = static_cast<std::size_t>(std::lround(2.0 * w_plus));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s < dist.size(); ++s) {
      if (s <= t)
        lower += dist[s];
      if (s >= t)
        upper += dist[s];
    }
    out.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    return out;
  }
  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - ties / 48.0;
  if (var <= 0.0)
    return out;
  const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
  out.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return out;
}

HolmResult holm_correction(const std::vector<double>& p, double level)
{
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidData("holm: p-values must lie in [0, 1]");
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  HolmResult out{ std::vector<double>(m), std::vector<bool>(m) };
  double running = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = order[r];
    running = std::max(running, std::min(1.0, static_cast<double>(m - r) * p[i]));
    out.adjusted[i] = running;
    out.reject[i] = running <= level;
  }
  return out;
}

CdSummary cd_summary(const Matrix& values, const std::vector<std::string>& methods, double level)
{
  const auto k = static_cast<std::size_t>(values.cols());
  if (methods.size() != k)
    throw InvalidData("cd summary: method names do not match columns");
  if (k < 1 || values.rows() < 1)
    throw InvalidData("cd summary: empty table");

  CdSummary out;
  out.methods = methods;
  const Matrix ranks = rank_rows(values);
  const Vector mean = ranks.colwise().mean().transpose();
  out.mean_ranks.assign(mean.data(), mean.data() + mean.size());
  if (k >= 2 && values.rows() >= 2)
    out.friedman = friedman_test(ranks);

  std::vector<double> raw;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      std::vector<double> a(static_cast<std::size_t>(values.rows())), b(a.size());
      for (Index r = 0; r < values.rows(); ++r) {
        a[static_cast<std::size_t>(r)] = values(r, static_cast<Index>(i));
        b[static_cast<std::size_t>(r)] = values(r, static_cast<Index>(j));
      }
      double p = 1.0;
      try {
        p = wilcoxon_signed_rank(a, b).p_value;
      } catch (const InvalidData&) {
        p = 1.0; // too few informative datasets to separate the pair
      }
      out.pairs.push_back({ i, j, p, p, false });
      raw.push_back(p);
    }
  }
  const bool significant = out.friedman.p_value < level;
  if (!raw.empty()) {
    const auto holm = holm_correction(raw, level);
    for (std::size_t q = 0; q < raw.size(); ++q) {
      out.pairs[q].p_adjusted = holm.adjusted[q];
      out.pairs[q].different = significant && holm.reject[q];
    }
  }

  std::vector<std::vector<bool>> diff(k, std::vector<bool>(k, false));
  for (const auto& pr : out.pairs)
    diff[pr.i][pr.j] = diff[pr.j][pr.i] = pr.different;

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean(static_cast<Index>(a)) < mean(static_cast<Index>(b)); });

  std::size_t last_end = 0;
  bool any = false;
  for (std::size_t s = 0; s < k; ++s) {
    std::size_t e = s;
    while (e + 1 < k) {
      bool ok = true;
      for (std::size_t q = s; q <= e && ok; ++q)
        ok = !diff[order[q]][order[e + 1]];
      if (!ok)
        break;
      ++e;
    }
    if (any && e <= last_end)
      continue;
    std::vector<std::string> group;
    for (std::size_t q = s; q <= e; ++q)
      group.push_back(methods[order[q]]);
    out.groups.push_back(std::move(group));
    last_end = e;
    any = true;
  }
  return out;
}

double kolmogorov_sf(double t)
{
  if (t <= 0.0)
    return 1.0;
  if (t < 1.0) {
    // small-t form: 1 - sqrt(2 pi) / t sum exp(-(2k - 1)^2 pi^2 / (8 t^2))
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double a = (2.0 * k - 1.0) * M_PI / t;
      s += std::exp(-a * a / 8.0);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / t * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-18)
      break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_uniform(std::vector<double> u)
{
  if (u.empty())
    throw InvalidData("ks test of an empty sample");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double f = std::clamp(u[i], 0.0, 1.0);
    d = std::max({ d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n });
  }
  const double sn = std::sqrt(n);
  return { d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d) };
}

} // namespace mocp
