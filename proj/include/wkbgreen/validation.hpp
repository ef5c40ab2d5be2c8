#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wkbgreen {

/// Outcome of one acceptance criterion.
struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    std::string summary;      // one line, printed next to PASS/FAIL
    nlohmann::json details;   // measured values behind the verdict
};

constexpr int criterion_count = 8;
constexpr std::uint64_t default_seed = 20241015;

/// Runs criterion `id` (1..8). The seed only affects the randomized property sweep.
CriterionResult run_criterion(int id, std::uint64_t seed = default_seed);

/// Criterion ids of a named suite: heat, degenerate, smallt, oracle or all.
std::vector<int> suite_members(std::string_view suite);

std::vector<CriterionResult> run_suite(std::string_view suite, std::uint64_t seed = default_seed);

/// {"suite", "seed", "passed", "criteria": [...]}.
nlohmann::json summary_json(std::string_view suite, std::uint64_t seed, const std::vector<CriterionResult>& results);

}  // namespace wkbgreen
