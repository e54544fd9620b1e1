#include "mocp/acceptance.hpp"

#include <spdlog/spdlog.h>

#include <iostream>

int main()
{
  spdlog::set_level(spdlog::level::err);
  int failed = 0;
  mocp::run_acceptance({}, [&](const mocp::CriterionResult& r) {
    std::cout << mocp::format_result(r) << std::endl;
    failed += r.passed ? 0 : 1;
  });
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " acceptance criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
