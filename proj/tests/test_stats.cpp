#include <catch2/catch_amalgamated.hpp>

#include "mocp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace mocp;
using Catch::Approx;

namespace {

// Two-sided p by enumerating all 2^n sign patterns.
double brute_force_wilcoxon(const std::vector<double>& ranks, double w_plus)
{
  const std::size_t n = ranks.size();
  double le = 0, ge = 0;
  const double total = std::ldexp(1.0, static_cast<int>(n));
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1)
        w += ranks[i];
    le += w <= w_plus + 1e-9 ? 1 : 0;
    ge += w >= w_plus - 1e-9 ? 1 : 0;
  }
  return std::min(1.0, 2 * std::min(le, ge) / total);
}

std::vector<double> abs_ranks(const std::vector<double>& d)
{
  Matrix row(1, static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    row(0, static_cast<Index>(i)) = std::abs(d[i]);
  const Matrix r = rank_rows(row);
  return std::vector<double>(r.data(), r.data() + r.size());
}

} // namespace

TEST_CASE("row ranks with ties")
{
  Matrix v(2, 4);
  v << 3, 1, 2, 2, 5, 5, 5, 5;
  const Matrix r = rank_rows(v);
  CHECK(r(0, 0) == 4.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(0, 2) == 2.5);
  CHECK(r(0, 3) == 2.5);
  CHECK(r(1, 2) == 2.5);
}

TEST_CASE("friedman test")
{
  Matrix same = Matrix::Constant(10, 3, 2.0);
  const auto t0 = friedman_test(same);
  CHECK(t0.statistic == 0.0);
  CHECK(t0.p_value == 1.0);

  Matrix ordered(10, 3);
  for (Index i = 0; i < 10; ++i)
    ordered.row(i) << 1, 2, 3;
  const auto t1 = friedman_test(ordered);
  CHECK(t1.statistic == Approx(20.0));
  CHECK(t1.p_value == Approx(std::exp(-10.0)));

  // ties correction against the textbook formula
  std::mt19937_64 g(1);
  std::uniform_int_distribution<int> u(0, 3);
  Matrix vals(12, 3);
  for (Index i = 0; i < 12; ++i)
    vals.row(i) << u(g), u(g), u(g);
  const Matrix r = rank_rows(vals);
  const double n = 12, k = 3;
  double sum_r2 = 0;
  for (Index j = 0; j < 3; ++j)
    sum_r2 += r.col(j).sum() * r.col(j).sum();
  double ties = 0;
  for (Index i = 0; i < 12; ++i) {
    std::map<double, int> count;
    for (Index j = 0; j < 3; ++j)
      ++count[vals(i, j)];
    for (const auto& [v, t] : count)
      ties += static_cast<double>(t) * t * t - t;
  }
  const double chi = (12 / (n * k * (k + 1)) * sum_r2 - 3 * n * (k + 1)) / (1 - ties / (n * k * (k * k - 1)));
  const auto t2 = friedman_test(r);
  CHECK(t2.statistic == Approx(chi).epsilon(1e-12));
  CHECK(t2.p_value == Approx(std::exp(-chi / 2)).epsilon(1e-10));
}

TEST_CASE("wilcoxon signed-rank")
{
  const std::vector<double> a{ 2, 3, 4, 5, 6 }, b{ 1, 1, 1, 1, 1 };
  const auto t = wilcoxon_signed_rank(a, b);
  CHECK(t.statistic == 15.0);
  CHECK(t.p_value == Approx(0.0625));
  CHECK(wilcoxon_signed_rank(a, a).p_value == 1.0);
  CHECK_THROWS_AS(wilcoxon_signed_rank({ 1, 2, 3 }, { 0, 0, 0 }), InvalidData);
  CHECK_THROWS_AS(wilcoxon_signed_rank({ 1, 2 }, { 0 }), InvalidData);

  std::mt19937_64 g(2);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> coarse(-3, 3);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 6 + static_cast<std::size_t>(rep % 7);
    std::vector<double> x(n), y(n, 0.0), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse values produce tied ranks; avoid zero differences
      x[i] = rep % 2 ? z(g) + 0.3 : coarse(g) + (coarse(g) >= 0 ? 0.5 : -0.5);
      d[i] = x[i];
    }
    const auto r = wilcoxon_signed_rank(x, y, WilcoxonMethod::exact);
    const auto ranks = abs_ranks(d);
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      w += d[i] > 0 ? ranks[i] : 0;
    CHECK(r.statistic == Approx(w));
    CHECK(r.p_value == Approx(brute_force_wilcoxon(ranks, w)).epsilon(1e-10));
  }
}

TEST_CASE("signed-rank null distribution")
{
  const auto p = signed_rank_null({ 1, 2, 3, 4, 5 });
  double total = 0;
  for (double v : p)
    total += v;
  CHECK(total == Approx(1.0));
  CHECK(p.back() == Approx(1.0 / 32));
  const auto q = signed_rank_null({ 1.5, 1.5, 3 });
  double tq = 0;
  for (double v : q)
    tq += v;
  CHECK(tq == Approx(1.0));
}

TEST_CASE("exact and normal wilcoxon agree at n = 25")
{
  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(25), b(25);
    for (std::size_t i = 0; i < 25; ++i) {
      a[i] = z(g) + 0.1 * rep;
      b[i] = z(g);
    }
    const double pe = wilcoxon_signed_rank(a, b, WilcoxonMethod::exact).p_value;
    const double pn = wilcoxon_signed_rank(a, b, WilcoxonMethod::normal).p_value;
    CHECK(std::abs(pe - pn) < 0.02);
  }
}

TEST_CASE("holm correction")
{
  const auto one = holm_correction({ 0.04 }, 0.05);
  CHECK(one.reject[0]);
  const auto two = holm_correction({ 0.01, 0.04 }, 0.05);
  CHECK(two.reject[0]);
  CHECK(two.reject[1]);
  CHECK(two.adjusted[0] == Approx(0.02));
  CHECK(two.adjusted[1] == Approx(0.04));

  const auto h = holm_correction({ 0.04, 0.001, 0.03, 0.5 }, 0.05);
  CHECK(h.adjusted[1] == Approx(0.004));
  CHECK(h.adjusted[2] == Approx(0.09));
  CHECK(h.adjusted[0] == Approx(0.09));
  CHECK(h.adjusted[3] == Approx(0.5));
  CHECK(h.reject == std::vector<bool>{ false, true, false, false });

  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(12);
  for (auto& v : p)
    v = u(g) * 0.2;
  const auto r = holm_correction(p);
  std::vector<std::size_t> order(12);
  for (std::size_t i = 0; i < 12; ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  for (std::size_t t = 1; t < 12; ++t)
    CHECK(r.adjusted[order[t]] >= r.adjusted[order[t - 1]]);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(r.adjusted[i] >= p[i]);
    CHECK(r.adjusted[i] <= 1.0);
    CHECK(r.reject[i] == (r.adjusted[i] <= 0.05));
  }
}

TEST_CASE("critical difference summary")
{
  Matrix same = Matrix::Constant(8, 2, 1.0);
  const auto s = cd_summary(same, { "a", "b" });
  REQUIRE(s.groups.size() == 1);
  CHECK(s.groups[0].size() == 2);

  std::mt19937_64 g(5);
  std::normal_distribution<double> z;
  Matrix v(30, 3);
  for (Index i = 0; i < 30; ++i) {
    const double base = z(g);
    v.row(i) << base, base + 1 + 0.1 * z(g), base + 2 + 0.1 * z(g);
  }
  const auto d = cd_summary(v, { "x", "y", "w" });
  CHECK(d.mean_ranks == std::vector<double>{ 1.0, 2.0, 3.0 });
  CHECK(d.friedman.p_value < 1e-6);
  REQUIRE(d.pairs.size() == 3);
  for (const auto& p : d.pairs)
    CHECK(p.different);
  CHECK(d.groups.size() == 3);

  // two methods that trade places stay together, a clearly worse one is apart
  Matrix t(30, 3);
  for (Index i = 0; i < 30; ++i) {
    const double e = z(g);
    t.row(i) << e, -e, 5 + 0.1 * z(g);
  }
  const auto m = cd_summary(t, { "p", "q", "r" });
  REQUIRE(m.groups.size() == 2);
  CHECK(m.groups[1] == std::vector<std::string>{ "r" });
}

TEST_CASE("kolmogorov-smirnov against uniform")
{
  CHECK(kolmogorov_sf(1.36) == Approx(0.0494).margin(5e-4));
  CHECK(kolmogorov_sf(1.0) == Approx(0.26999967).margin(1e-6));
  CHECK(kolmogorov_sf(0.2) == Approx(1.0).margin(1e-6));
  CHECK(kolmogorov_sf(0.0) == 1.0);

  std::vector<double> grid;
  for (int i = 0; i < 100; ++i)
    grid.push_back((i + 0.5) / 100);
  const auto g = ks_uniform(grid);
  CHECK(g.statistic == Approx(0.005));
  CHECK(g.p_value > 0.99);

  std::vector<double> squashed;
  for (double v : grid)
    squashed.push_back(v * v);
  CHECK(ks_uniform(squashed).p_value < 1e-4);
}
