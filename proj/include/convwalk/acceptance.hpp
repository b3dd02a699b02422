#pragma once

// The acceptance suite: twelve property and oracle checks over the whole
// toolkit, each with its own fixed seed and wall-clock timing.

#include <functional>
#include <string>
#include <vector>

namespace convwalk {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

struct AcceptanceOptions {
    int workers = 1;
    std::vector<int> only;  ///< empty: run all criteria
    std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

}  // namespace convwalk
