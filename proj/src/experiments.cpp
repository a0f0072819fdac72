#include "mtdgrid/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include "mtdgrid/rng.hpp"

namespace mtdgrid {

PerturbationPlan random_all_branch_plan(const GridCase& c, std::mt19937_64& rng, double lo,
                                        double hi) {
    PerturbationPlan plan;
    plan.lambda_min = lo;
    plan.lambda_max = hi;
    std::vector<double> used;
    for (int k = 1; k <= c.n_branches(); ++k) {
        double lam = draw_ratio(rng, lo, hi, used);
        used.push_back(lam);
        plan.entries.push_back({k, lam});
    }
    return plan;
}

PerturbationPlan random_subset_plan(const GridCase& c, std::mt19937_64& rng,
                                    const std::vector<int>& exclude, double lo, double hi) {
    std::vector<int> cands;
    for (int k = 1; k <= c.n_branches(); ++k)
        if (std::find(exclude.begin(), exclude.end(), k) == exclude.end()) cands.push_back(k);
    if (cands.empty()) throw ValidationError("no candidate branches for a random plan");
    std::shuffle(cands.begin(), cands.end(), rng);
    std::uniform_int_distribution<int> size_dist(1, static_cast<int>(cands.size()));
    int size = size_dist(rng);
    PerturbationPlan plan;
    plan.lambda_min = lo;
    plan.lambda_max = hi;
    std::vector<double> used;
    std::vector<int> chosen(cands.begin(), cands.begin() + size);
    std::sort(chosen.begin(), chosen.end());
    for (int k : chosen) {
        double lam = draw_ratio(rng, lo, hi, used);
        used.push_back(lam);
        plan.entries.push_back({k, lam});
    }
    return plan;
}

namespace {

std::vector<int> candidate_states(const GridCase& c, const AttackSpec& spec,
                                  const PerturbationPlan& plan, int slack_bus) {
    std::set<int> covered = covered_buses(c, plan.branch_indices());
    std::vector<int> states;
    for (int bus = 1; bus <= c.n_buses; ++bus) {
        int s = state_index_of_bus(bus, slack_bus);
        if (s < 0) continue;
        bool cov = covered.count(bus) > 0;
        if (spec.restriction == AttackSpec::Restriction::CoveredOnly && !cov) continue;
        if (spec.restriction == AttackSpec::Restriction::UncoveredOnly && cov) continue;
        states.push_back(s);
    }
    return states;
}

Eigen::VectorXd draw_injection(const GridCase& c, const AttackSpec& spec,
                               const PerturbationPlan& plan, int n, int slack_bus,
                               std::mt19937_64& rng) {
    std::vector<int> chosen;
    switch (spec.mode) {
        case AttackSpec::Mode::AllStates:
            chosen = candidate_states(c, spec, plan, slack_bus);
            break;
        case AttackSpec::Mode::Count: {
            std::vector<int> pool = candidate_states(c, spec, plan, slack_bus);
            if (spec.count > static_cast<int>(pool.size()))
                throw ValidationError("attack count exceeds candidate states");
            std::shuffle(pool.begin(), pool.end(), rng);
            chosen.assign(pool.begin(), pool.begin() + spec.count);
            break;
        }
        case AttackSpec::Mode::ExplicitBuses:
            for (int bus : spec.buses) {
                int s = state_index_of_bus(bus, slack_bus);
                if (s < 0) throw ValidationError("cannot attack the slack bus state");
                chosen.push_back(s);
            }
            break;
    }
    if (chosen.empty()) throw ValidationError("attack selects no states");
    Eigen::VectorXd cvec = Eigen::VectorXd::Zero(n);
    std::uniform_real_distribution<double> bias(-spec.dm, spec.dm);
    for (int s : chosen) cvec(s) = bias(rng);
    return cvec;
}

}  // namespace

ExperimentResult run_detection_experiment(const GridCase& c, const ScenarioConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    MeasurementModel before = measurement_matrix(c, cfg.slack_bus);
    const int n = before.n;
    NoiseModel noise{cfg.sigma, cfg.alpha};

    // fixed-plan models can be factored once
    std::optional<MeasurementModel> fixed_after;
    PerturbationPlan fixed_plan;
    if (cfg.plan.mode == PlanSpec::Mode::None) {
        fixed_after = before;
    } else if (cfg.plan.mode == PlanSpec::Mode::Explicit) {
        fixed_plan = cfg.plan.plan;
        fixed_after = measurement_matrix(apply_plan(c, fixed_plan), cfg.slack_bus);
    }

    ExperimentResult res;
    res.trials = cfg.trials;
    std::uniform_real_distribution<double> angle(-0.2, 0.2);
    for (int t = 0; t < cfg.trials; ++t) {
        auto rng = make_rng(cfg.rng_seed, "trial", static_cast<std::uint64_t>(t));
        PerturbationPlan plan = fixed_plan;
        MeasurementModel after = fixed_after ? *fixed_after : MeasurementModel{};
        if (!fixed_after) {
            plan = cfg.plan.mode == PlanSpec::Mode::AllBranches
                       ? random_all_branch_plan(c, rng, cfg.plan.lambda_min, cfg.plan.lambda_max)
                       : random_subset_plan(c, rng, cfg.plan.exclude_branches,
                                            cfg.plan.lambda_min, cfg.plan.lambda_max);
            after = measurement_matrix(apply_plan(c, plan), cfg.slack_bus);
        }
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = angle(rng);
        Eigen::VectorXd z = after.H * x;
        if (cfg.sigma > 0.0) {
            std::normal_distribution<double> gauss(0.0, cfg.sigma);
            for (int i = 0; i < z.size(); ++i) z(i) += gauss(rng);
        }
        Eigen::VectorXd cvec = draw_injection(c, cfg.attack, plan, n, cfg.slack_bus, rng);
        Eigen::VectorXd z_a = z + before.H * cvec;
        if (detect(after, z_a, noise)) ++res.detected_count;
    }
    res.detection_probability = static_cast<double>(res.detected_count) / res.trials;
    auto t1 = std::chrono::steady_clock::now();
    res.wall_s = std::chrono::duration<double>(t1 - t0).count();
    return res;
}

std::optional<PerturbationPlan> find_plan_with_dimension(const GridCase& c, int target_dim,
                                                         std::uint64_t seed, int max_attempts,
                                                         int slack_bus) {
    MeasurementModel before = measurement_matrix(c, slack_bus);
    const int n = before.n;
    if (target_dim == n) return PerturbationPlan{};  // no MTD
    auto rng = make_rng(seed, "plan-search");
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        PerturbationPlan plan = attempt == 0 ? random_all_branch_plan(c, rng)
                                             : random_subset_plan(c, rng);
        MeasurementModel after = measurement_matrix(apply_plan(c, plan), slack_bus);
        if (security_factor(before, after).dim_stealthy == target_dim) return plan;
    }
    return std::nullopt;
}

std::vector<DimensionCurvePoint> sweep_dimension_curve(const GridCase& c,
                                                       const std::vector<int>& dim_targets,
                                                       const ScenarioConfig& templ) {
    MeasurementModel before = measurement_matrix(c, templ.slack_bus);
    const int n = before.n;
    std::vector<DimensionCurvePoint> out;
    for (size_t i = 0; i < dim_targets.size(); ++i) {
        int dim = dim_targets[i];
        auto plan = find_plan_with_dimension(c, dim, templ.rng_seed + i, 2000, templ.slack_bus);
        if (!plan) continue;  // unachievable within the bounded search
        ScenarioConfig cfg = templ;
        if (plan->empty()) {
            cfg.plan.mode = PlanSpec::Mode::None;
        } else {
            cfg.plan.mode = PlanSpec::Mode::Explicit;
            cfg.plan.plan = *plan;
        }
        DimensionCurvePoint pt;
        pt.dim = dim;
        pt.dim_over_n = static_cast<double>(dim) / n;
        pt.result = run_detection_experiment(c, cfg);
        out.push_back(std::move(pt));
    }
    return out;
}

std::pair<ExperimentResult, ExperimentResult> covered_vs_uncovered_experiment(
    const GridCase& c, const PerturbationPlan& plan, double sigma, int trials,
    std::uint64_t seed, int slack_bus, double dm) {
    std::set<int> covered = covered_buses(c, plan.branch_indices());
    bool any_uncovered = false;
    for (int bus = 1; bus <= c.n_buses; ++bus)
        if (bus != slack_bus && !covered.count(bus)) any_uncovered = true;
    if (!any_uncovered) throw ValidationError("plan leaves no bus uncovered");

    ScenarioConfig cfg;
    cfg.plan.mode = PlanSpec::Mode::Explicit;
    cfg.plan.plan = plan;
    cfg.sigma = sigma;
    cfg.trials = trials;
    cfg.slack_bus = slack_bus;
    cfg.attack.mode = AttackSpec::Mode::AllStates;
    cfg.attack.dm = dm;

    cfg.attack.restriction = AttackSpec::Restriction::CoveredOnly;
    cfg.rng_seed = substream_seed(seed, "covered");
    ExperimentResult a1 = run_detection_experiment(c, cfg);
    cfg.attack.restriction = AttackSpec::Restriction::UncoveredOnly;
    cfg.rng_seed = substream_seed(seed, "uncovered");
    ExperimentResult a2 = run_detection_experiment(c, cfg);
    return {a1, a2};
}

std::vector<DimensionRow> table_dimension_report(const std::vector<GridCase>& cases,
                                                 std::uint64_t seed) {
    std::vector<DimensionRow> rows;
    for (size_t i = 0; i < cases.size(); ++i) {
        const GridCase& c = cases[i];
        auto rng = make_rng(seed, "dimension-table", static_cast<std::uint64_t>(i));
        PerturbationPlan plan = random_all_branch_plan(c, rng);
        MeasurementModel before = measurement_matrix(c, 1);
        MeasurementModel after = measurement_matrix(apply_plan(c, plan), 1);
        SpaceReport rep = security_factor(before, after);
        rows.push_back({c.name, c.n_states(), c.n_branches(), rep.dim_stealthy});
    }
    return rows;
}

std::vector<int> incremental_dimension_curve(const GridCase& c, std::uint64_t seed,
                                             int slack_bus) {
    auto rng = make_rng(seed, "incremental");
    MeasurementModel before = measurement_matrix(c, slack_bus);
    PerturbationPlan plan;
    std::vector<double> used;
    std::vector<int> dims;
    for (int k = 1; k <= c.n_branches(); ++k) {
        double lam = draw_ratio(rng, plan.lambda_min, plan.lambda_max, used);
        used.push_back(lam);
        plan.entries.push_back({k, lam});
        MeasurementModel after = measurement_matrix(apply_plan(c, plan), slack_bus);
        dims.push_back(security_factor(before, after).dim_stealthy);
    }
    return dims;
}

}  // namespace mtdgrid
