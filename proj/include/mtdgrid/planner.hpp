#pragma once

#include <cstdint>

#include "mtdgrid/mtd_engine.hpp"

namespace mtdgrid {

struct PlannerConfig {
    int n_d = 1;                  // device budget
    std::vector<int> candidates;  // empty = all branches
    std::uint64_t rng_seed = 0;
    double lambda_min = 0.8;
    double lambda_max = 1.2;
};

struct PlannerResult {
    PerturbationPlan plan;        // selected branches with their ratios
    std::vector<int> phase1;      // branches kept because delta gamma = +1
    std::vector<int> phase2;      // branches added for coverage
    int gamma_minus_n = 0;
    int dim_stealthy = 0;
    std::set<int> covered;
    double elapsed_s = 0.0;
};

// Two-phase greedy selection. Phase 1 walks a seeded shuffle of the
// candidates and keeps a branch iff perturbing it (fresh random ratio)
// raises the security factor by 1. If budget remains, phase 2 spends it on
// coverage: branches covering two new buses first, then one, then by lowest
// index. Buses of degree 1 never count as newly covered (perturbing their
// only branch cannot shrink the stealthy space).
PlannerResult plan_branches(const GridCase& c, const PlannerConfig& config,
                            int slack_bus = 1);

struct PlanComparison {
    SpaceReport report_a, report_b;
    int covered_a = 0, covered_b = 0;
};

PlanComparison compare_plan(const GridCase& c, const PerturbationPlan& a,
                            const PerturbationPlan& b, int slack_bus = 1);

}  // namespace mtdgrid
