#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace crit4::suite {

constexpr int kCriteria = 15;

struct CriterionResult {
    int id = 0;
    bool pass = false;
    std::string detail;  // one indented line per sub-check
    double seconds = 0;
    std::vector<std::string> files;  // CSVs written under the output directory
};

// Writes the criterion's CSVs under `out`. Exceptions become a failed result.
CriterionResult run_criterion(int id, const std::filesystem::path& out, int threads = 1);

// criteria that finish in well under a minute each
const std::vector<int>& quick_criteria();

}  // namespace crit4::suite
