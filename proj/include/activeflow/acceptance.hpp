#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace activeflow {

enum class CheckStatus { Pass, Fail, Skip };

std::string_view to_string(CheckStatus status) noexcept;

struct CheckResult {
  int id = 0;
  std::string name;
  CheckStatus status = CheckStatus::Skip;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceSettings {
  int n = 32;         // grid points per axis for the desk-scale checks
  double pe = 0.05;   // Pe = 0 keeps only the Pe-free checks (2, 5, 10)
  double dt = 1e-2;
  std::vector<int> checks;  // empty: all ten
};

inline constexpr int kCriterionCount = 10;

std::vector<CheckResult> run_acceptance(
    const AcceptanceSettings& settings,
    const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace activeflow
