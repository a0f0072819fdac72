#pragma once

#include "mtdgrid/grid_model.hpp"

namespace mtdgrid {

struct PlanEntry {
    int branch = 0;      // 1-based branch index k_d
    double lambda = 1.0; // multiplicative susceptance ratio
};

struct PerturbationPlan {
    std::vector<PlanEntry> entries;
    double lambda_min = 0.8;
    double lambda_max = 1.2;

    bool empty() const { return entries.empty(); }
    std::vector<int> branch_indices() const;
};

// Checks bounds, lambda != 1, distinct valid branch indices.
void validate_plan(const GridCase& c, const PerturbationPlan& plan);

// b'_ij = lambda * b_ij on plan branches; everything else unchanged.
GridCase apply_plan(const GridCase& c, const PerturbationPlan& plan);

PerturbationPlan plan_from_json(const std::string& json_text);
std::string plan_to_json(const PerturbationPlan& plan);
PerturbationPlan load_plan_file(const std::string& path);

}  // namespace mtdgrid
