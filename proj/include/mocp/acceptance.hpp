#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mocp {

struct CriterionResult
{
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 9;

//! Runs one acceptance criterion (1..9) at full size.
CriterionResult run_criterion(int id);

//! Runs the listed criteria (all when empty), reporting each as it finishes.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& r);

} // namespace mocp
