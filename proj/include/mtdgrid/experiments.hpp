#pragma once

#include <cstdint>
#include <optional>

#include "mtdgrid/estimation.hpp"
#include "mtdgrid/mtd_engine.hpp"

namespace mtdgrid {

struct AttackSpec {
    enum class Mode { AllStates, Count, ExplicitBuses } mode = Mode::AllStates;
    int count = 0;                // Mode::Count: number of modified states
    std::vector<int> buses;       // Mode::ExplicitBuses: bus ids to modify
    enum class Restriction { Unrestricted, CoveredOnly, UncoveredOnly } restriction =
        Restriction::Unrestricted;
    double dm = 0.1;              // bias magnitude; c_i ~ U(-dm, dm)
};

struct PlanSpec {
    enum class Mode { None, Explicit, AllBranches, RandomPerTrial } mode = Mode::None;
    PerturbationPlan plan;              // Mode::Explicit
    std::vector<int> exclude_branches;  // removed from the random candidate pool
    double lambda_min = 0.8;
    double lambda_max = 1.2;
};

struct ScenarioConfig {
    PlanSpec plan;
    AttackSpec attack;
    double sigma = 0.0;
    double alpha = 0.05;
    int trials = 1000;
    std::uint64_t rng_seed = 0;
    int slack_bus = 1;
};

struct ExperimentResult {
    int detected_count = 0;
    int trials = 0;
    double detection_probability = 0.0;
    double wall_s = 0.0;
    std::string scenario;
};

ExperimentResult run_detection_experiment(const GridCase& c, const ScenarioConfig& cfg);

// Random all-branch perturbation with pairwise-distinct ratios.
PerturbationPlan random_all_branch_plan(const GridCase& c, std::mt19937_64& rng,
                                        double lo = 0.8, double hi = 1.2);

// Random plan over a uniformly drawn subset (size >= 1) of the candidates.
PerturbationPlan random_subset_plan(const GridCase& c, std::mt19937_64& rng,
                                    const std::vector<int>& exclude = {}, double lo = 0.8,
                                    double hi = 1.2);

// Searches random plans for one whose stealthy-space dimension equals
// target_dim (target n = empty plan). Nullopt if the bounded search fails.
std::optional<PerturbationPlan> find_plan_with_dimension(const GridCase& c, int target_dim,
                                                         std::uint64_t seed,
                                                         int max_attempts = 2000,
                                                         int slack_bus = 1);

struct DimensionCurvePoint {
    int dim = 0;
    double dim_over_n = 0.0;
    ExperimentResult result;
};

std::vector<DimensionCurvePoint> sweep_dimension_curve(const GridCase& c,
                                                       const std::vector<int>& dim_targets,
                                                       const ScenarioConfig& templ);

// A1 = attacks with some bias on a covered bus; A2 = bias only on uncovered
// buses. The plan must leave at least one bus uncovered.
std::pair<ExperimentResult, ExperimentResult> covered_vs_uncovered_experiment(
    const GridCase& c, const PerturbationPlan& plan, double sigma, int trials,
    std::uint64_t seed, int slack_bus = 1, double dm = 0.1);

struct DimensionRow {
    std::string name;
    int n = 0;
    int l = 0;
    int dim = 0;
};

// Perturb every branch of every case with distinct random ratios and report
// the resulting stealthy-space dimension.
std::vector<DimensionRow> table_dimension_report(const std::vector<GridCase>& cases,
                                                 std::uint64_t seed);

// Dimensions of the prefix plans {k_1}, {k_1,k_2}, ... over all branches.
std::vector<int> incremental_dimension_curve(const GridCase& c, std::uint64_t seed,
                                             int slack_bus = 1);

}  // namespace mtdgrid
