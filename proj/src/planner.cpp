#include "mtdgrid/planner.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "mtdgrid/rng.hpp"

namespace mtdgrid {

namespace {

// One randomized two-phase pass: a shuffled traversal keeps branches whose
// perturbation raises the security factor, then leftover budget goes to bus
// coverage. Degree-1 buses are ignored when counting new coverage.
PlannerResult single_attempt(const GridCase& c, const PlannerConfig& config, int slack_bus,
                             const MeasurementModel& base, std::vector<int> candidates,
                             std::uint64_t seed) {
    PlannerResult res;
    res.plan.lambda_min = config.lambda_min;
    res.plan.lambda_max = config.lambda_max;

    auto rng = make_rng(seed, "planner");
    std::shuffle(candidates.begin(), candidates.end(), rng);

    const int n = base.n;
    std::vector<double> used;

    GridCase current = c;
    Eigen::MatrixXd stacked(base.m, 2 * n);
    stacked << base.H, base.H;
    int gamma = n;  // rank([H H]) = n
    std::vector<int> remaining;
    for (int k : candidates) {
        if (static_cast<int>(res.phase1.size()) == config.n_d) {
            remaining.push_back(k);
            continue;
        }
        double lam = draw_ratio(rng, config.lambda_min, config.lambda_max, used);
        GridCase trial = current;
        trial.branches[k - 1].susceptance *= lam;
        MeasurementModel after = measurement_matrix(trial, slack_bus);
        stacked.rightCols(n) = after.H;
        int g = numerical_rank(stacked);
        if (g == gamma + 1) {
            gamma = g;
            current = trial;
            used.push_back(lam);
            res.phase1.push_back(k);
            res.plan.entries.push_back({k, lam});
        } else {
            remaining.push_back(k);
        }
    }

    if (static_cast<int>(res.plan.entries.size()) < config.n_d) {
        std::set<int> pendant = single_branch_buses(c);
        std::set<int> covered = covered_buses(c, res.plan.branch_indices());
        std::sort(remaining.begin(), remaining.end());
        auto new_coverage = [&](int k) {
            int cnt = 0;
            for (int bus : {c.branches[k - 1].from_bus, c.branches[k - 1].to_bus})
                if (!covered.count(bus) && !pendant.count(bus)) ++cnt;
            return cnt;
        };
        for (int want = 2; want >= 0 && static_cast<int>(res.plan.entries.size()) < config.n_d;
             --want) {
            for (auto it = remaining.begin();
                 it != remaining.end() && static_cast<int>(res.plan.entries.size()) < config.n_d;) {
                int k = *it;
                if (new_coverage(k) >= want) {
                    double lam = draw_ratio(rng, config.lambda_min, config.lambda_max, used);
                    used.push_back(lam);
                    res.phase2.push_back(k);
                    res.plan.entries.push_back({k, lam});
                    covered.insert(c.branches[k - 1].from_bus);
                    covered.insert(c.branches[k - 1].to_bus);
                    it = remaining.erase(it);
                } else {
                    ++it;
                }
            }
        }
    }

    MeasurementModel after = measurement_matrix(apply_plan(c, res.plan), slack_bus);
    SpaceReport rep = security_factor(base, after);
    res.gamma_minus_n = rep.gamma - n;
    res.dim_stealthy = rep.dim_stealthy;
    res.covered = covered_buses(c, res.plan.branch_indices());
    return res;
}

}  // namespace

PlannerResult plan_branches(const GridCase& c, const PlannerConfig& config, int slack_bus) {
    auto t0 = std::chrono::steady_clock::now();
    if (config.n_d < 0) throw std::invalid_argument("negative budget");
    std::vector<int> candidates = config.candidates;
    if (candidates.empty()) {
        candidates.resize(c.n_branches());
        std::iota(candidates.begin(), candidates.end(), 1);
    }
    for (int k : candidates)
        if (k < 1 || k > c.n_branches())
            throw std::invalid_argument("candidate branch out of range: " + std::to_string(k));

    if (config.n_d == 0) {
        PlannerResult res;
        res.plan.lambda_min = config.lambda_min;
        res.plan.lambda_max = config.lambda_max;
        res.dim_stealthy = c.n_states();
        auto t1 = std::chrono::steady_clock::now();
        res.elapsed_s = std::chrono::duration<double>(t1 - t0).count();
        return res;
    }

    MeasurementModel base = measurement_matrix(c, slack_bus);

    // A single random traversal can paint itself into a corner: the branches
    // kept for rank may leave more uncovered buses than the leftover budget
    // can reach. Restart from derived seeds and keep the best attempt, best
    // meaning highest rank gain, then highest coverage.
    std::set<int> pendant = single_branch_buses(c);
    std::set<int> reachable = covered_buses(c, candidates);
    int target_cov = 0;
    for (int bus : reachable)
        if (!pendant.count(bus)) ++target_cov;

    const int kMaxAttempts = 16;
    PlannerResult best;
    bool have_best = false;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        PlannerResult res = single_attempt(c, config, slack_bus, base, candidates,
                                           substream_seed(config.rng_seed, "attempt", attempt));
        int cov = 0;
        for (int bus : res.covered)
            if (!pendant.count(bus)) ++cov;
        if (!have_best || res.gamma_minus_n > best.gamma_minus_n ||
            (res.gamma_minus_n == best.gamma_minus_n &&
             res.covered.size() > best.covered.size())) {
            best = std::move(res);
            have_best = true;
        }
        if (best.gamma_minus_n == std::min(config.n_d, c.n_states()) || cov >= target_cov) break;
    }
    auto t1 = std::chrono::steady_clock::now();
    best.elapsed_s = std::chrono::duration<double>(t1 - t0).count();
    return best;
}

PlanComparison compare_plan(const GridCase& c, const PerturbationPlan& a,
                            const PerturbationPlan& b, int slack_bus) {
    MeasurementModel base = measurement_matrix(c, slack_bus);
    PlanComparison cmp;
    cmp.report_a = security_factor(base, measurement_matrix(apply_plan(c, a), slack_bus));
    cmp.report_b = security_factor(base, measurement_matrix(apply_plan(c, b), slack_bus));
    cmp.covered_a = static_cast<int>(covered_buses(c, a.branch_indices()).size());
    cmp.covered_b = static_cast<int>(covered_buses(c, b.branch_indices()).size());
    return cmp;
}

}  // namespace mtdgrid
