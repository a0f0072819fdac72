#pragma once

#include <cstdint>
#include <random>

#include "mtdgrid/attack_space.hpp"
#include "mtdgrid/grid_model.hpp"
#include "mtdgrid/perturbation.hpp"

namespace mtdgrid {

struct CompletenessReport {
    bool branch_count_ok = false;  // l >= 2n
    bool coverage_ok = false;      // perturbed branches cover all buses
    std::set<int> uncovered_buses;
    std::set<int> single_branch_buses;
    int gamma = 0;
    int dim_stealthy = 0;
    bool complete = false;  // gamma == 2n
};

struct SecuritySet {
    std::vector<int> state_indices;  // 0-based columns of H'
    std::vector<int> bus_ids;        // same set as bus ids
    int q = 0;
};

struct DeltaHReport {
    std::set<int> nonzero_columns;   // 0-based state columns of H' - H
    std::set<int> expected_columns;  // endpoint states of perturbed branches
    bool sparsity_ok = false;        // nonzero ⊆ expected
};

enum class PerturbCase { Case1 = 1, Case2 = 2, Case3 = 3 };

CompletenessReport completeness_check(const GridCase& c, const PerturbationPlan& plan,
                                      int slack_bus = 1);

DeltaHReport delta_H(const GridCase& c, const PerturbationPlan& plan, int slack_bus = 1);

// Greedy scan of H' columns in ascending index order, keeping a column iff it
// raises the rank of [H | kept columns]. |result| = gamma - n.
SecuritySet security_set(const MeasurementModel& before, const MeasurementModel& after);

// Case1: neither endpoint state in the security set; Case2: exactly one;
// Case3: both. A slack endpoint counts as outside every set.
PerturbCase classify_case(const SecuritySet& sec, const Branch& branch, int slack_bus = 1);

// rank([H H'']) - rank([H H']); H'' must extend H' by exactly one more
// perturbed branch.
int delta_gamma(const MeasurementModel& base, const MeasurementModel& before,
                const MeasurementModel& after);

struct LambdaScan {
    std::vector<std::pair<double, int>> samples;  // (lambda, delta gamma)
    int majority = 0;
    int exceptions = 0;  // samples deviating from the majority
};

// Re-evaluates delta_gamma for `samples` ratios of `branch` drawn uniformly
// from the plan bounds (excluding |lambda-1| < 1e-3 and ratios already used
// by base_plan). `extra_lambdas` are appended verbatim, e.g. to probe a
// deliberate ratio collision.
LambdaScan lambda_invariance_scan(const GridCase& c, const PerturbationPlan& base_plan,
                                  int branch, int samples, std::uint64_t rng_seed,
                                  const std::vector<double>& extra_lambdas = {},
                                  int slack_bus = 1);

// Uniform ratio in [lo, hi] avoiding |lambda-1| < 1e-3 and values in `used`
// (rejection sampling).
double draw_ratio(std::mt19937_64& rng, double lo, double hi,
                  const std::vector<double>& used = {});

}  // namespace mtdgrid
