#pragma once

#include "mocp/core.hpp"

#include <string>
#include <vector>

namespace mocp {

//! Row-wise ranks (1 = smallest value), ties get their average rank.
Matrix rank_rows(const Matrix& values);

struct TestResult
{
  double statistic = 0.0;
  double p_value = 1.0;
};

//! Friedman chi-square with ties correction on a datasets x methods matrix of
//! ranks; p from chi-square with m - 1 degrees of freedom.
TestResult friedman_test(const Matrix& ranks);

enum class WilcoxonMethod
{
  automatic, // exact for n <= 25 nonzero differences, normal beyond
  exact,
  normal,
};

//! Two-sided Wilcoxon signed-rank test of a - b. Zero differences are dropped.
//! Statistic is W+ (sum of ranks of positive differences). All-zero
//! differences give p = 1; otherwise fewer than 5 nonzero differences throw
//! InvalidData.
TestResult wilcoxon_signed_rank(const std::vector<double>& a,
                                const std::vector<double>& b,
                                WilcoxonMethod method = WilcoxonMethod::automatic);

//! Null distribution of 2 W+ for the given (possibly tied) ranks, indexed by
//! doubled rank sum, normalized to total probability 1.
std::vector<double> signed_rank_null(const std::vector<double>& ranks);

struct HolmResult
{
  std::vector<double> adjusted;
  std::vector<bool> reject;
};

HolmResult holm_correction(const std::vector<double>& p_values, double level = 0.05);

struct CdSummary
{
  std::vector<std::string> methods;
  std::vector<double> mean_ranks;
  TestResult friedman;
  //! Pairwise Wilcoxon p (raw and Holm-adjusted) and decisions, row-major
  //! upper triangle in method order.
  struct Pair
  {
    std::size_t i = 0;
    std::size_t j = 0;
    double p = 1.0;
    double p_adjusted = 1.0;
    bool different = false;
  };
  std::vector<Pair> pairs;
  //! Maximal runs of methods, in mean-rank order, whose members are pairwise
  //! not significantly different.
  std::vector<std::vector<std::string>> groups;
};

//! values: datasets x methods, lower is better.
CdSummary cd_summary(const Matrix& values, const std::vector<std::string>& methods, double level = 0.05);

//! One-sample Kolmogorov-Smirnov test against U(0, 1) (asymptotic p-value).
TestResult ks_uniform(std::vector<double> sample);

//! P(sqrt(n) D_n > t) under the asymptotic Kolmogorov distribution.
double kolmogorov_sf(double t);

} // namespace mocp
