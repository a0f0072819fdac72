#include "mtdgrid/mtd_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mtdgrid/rng.hpp"

namespace mtdgrid {

CompletenessReport completeness_check(const GridCase& c, const PerturbationPlan& plan,
                                      int slack_bus) {
    validate_plan(c, plan);
    CompletenessReport rep;
    const int n = c.n_states();
    rep.branch_count_ok = c.n_branches() >= 2 * n;
    std::set<int> covered = covered_buses(c, plan.branch_indices());
    for (int i = 1; i <= c.n_buses; ++i)
        if (!covered.count(i)) rep.uncovered_buses.insert(i);
    rep.coverage_ok = rep.uncovered_buses.empty();
    rep.single_branch_buses = single_branch_buses(c);
    MeasurementModel before = measurement_matrix(c, slack_bus);
    MeasurementModel after = measurement_matrix(apply_plan(c, plan), slack_bus);
    SpaceReport sp = security_factor(before, after);
    rep.gamma = sp.gamma;
    rep.dim_stealthy = sp.dim_stealthy;
    rep.complete = sp.gamma == 2 * n;
    return rep;
}

DeltaHReport delta_H(const GridCase& c, const PerturbationPlan& plan, int slack_bus) {
    validate_plan(c, plan);
    MeasurementModel before = measurement_matrix(c, slack_bus);
    MeasurementModel after = measurement_matrix(apply_plan(c, plan), slack_bus);
    Eigen::MatrixXd diff = after.H - before.H;
    DeltaHReport rep;
    double scale = std::max(before.H.norm(), 1.0);
    for (int j = 0; j < diff.cols(); ++j)
        if (diff.col(j).norm() > 1e-12 * scale) rep.nonzero_columns.insert(j);
    for (const auto& e : plan.entries) {
        const Branch& b = c.branches[e.branch - 1];
        for (int bus : {b.from_bus, b.to_bus}) {
            int s = state_index_of_bus(bus, slack_bus);
            if (s >= 0) rep.expected_columns.insert(s);
        }
    }
    rep.sparsity_ok = std::includes(rep.expected_columns.begin(), rep.expected_columns.end(),
                                    rep.nonzero_columns.begin(), rep.nonzero_columns.end());
    return rep;
}

SecuritySet security_set(const MeasurementModel& before, const MeasurementModel& after) {
    const int n = before.n;
    SecuritySet sec;
    Eigen::MatrixXd acc(before.m, 2 * n);
    acc.leftCols(n) = before.H;
    int width = n;
    int rank = numerical_rank(before.H);
    for (int j = 0; j < n; ++j) {
        acc.col(width) = after.H.col(j);
        int r = numerical_rank(acc.leftCols(width + 1));
        if (r > rank) {
            rank = r;
            ++width;
            sec.state_indices.push_back(j);
            sec.bus_ids.push_back(bus_of_state_index(j, after.slack_bus));
        }
    }
    sec.q = static_cast<int>(sec.state_indices.size());
    return sec;
}

PerturbCase classify_case(const SecuritySet& sec, const Branch& branch, int slack_bus) {
    int hits = 0;
    for (int bus : {branch.from_bus, branch.to_bus}) {
        int s = state_index_of_bus(bus, slack_bus);
        if (s < 0) continue;  // slack endpoint is outside every set
        if (std::find(sec.state_indices.begin(), sec.state_indices.end(), s) !=
            sec.state_indices.end())
            ++hits;
    }
    return hits == 0 ? PerturbCase::Case1 : hits == 1 ? PerturbCase::Case2 : PerturbCase::Case3;
}

int delta_gamma(const MeasurementModel& base, const MeasurementModel& before,
                const MeasurementModel& after) {
    const int n = base.n;
    // H'' must differ from H' in exactly the columns touched by one more branch
    Eigen::MatrixXd diff = after.H - before.H;
    std::set<int> changed;
    double scale = std::max(base.H.norm(), 1.0);
    for (int j = 0; j < n; ++j)
        if (diff.col(j).norm() > 1e-12 * scale) changed.insert(j);
    if (changed.size() > 2)
        throw ValidationError("delta_gamma: models differ in more than one branch");
    Eigen::MatrixXd s1(base.m, 2 * n), s2(base.m, 2 * n);
    s1 << base.H, before.H;
    s2 << base.H, after.H;
    int dg = numerical_rank(s2) - numerical_rank(s1);
    if (dg < -1 || dg > 1)
        throw std::logic_error("delta_gamma outside {-1,0,1}: " + std::to_string(dg));
    return dg;
}

double draw_ratio(std::mt19937_64& rng, double lo, double hi, const std::vector<double>& used) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (int tries = 0; tries < 10000; ++tries) {
        double v = dist(rng);
        if (std::fabs(v - 1.0) < 1e-3) continue;
        bool clash = false;
        for (double u : used)
            if (v == u) clash = true;
        if (!clash) return v;
    }
    throw std::runtime_error("draw_ratio: rejection sampling failed");
}

LambdaScan lambda_invariance_scan(const GridCase& c, const PerturbationPlan& base_plan,
                                  int branch, int samples, std::uint64_t rng_seed,
                                  const std::vector<double>& extra_lambdas, int slack_bus) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    MeasurementModel base = measurement_matrix(c, slack_bus);
    MeasurementModel before = measurement_matrix(apply_plan(c, base_plan), slack_bus);
    Eigen::MatrixXd s1(base.m, 2 * base.n);
    s1 << base.H, before.H;
    const int gamma_before = numerical_rank(s1);

    std::vector<double> used;
    for (const auto& e : base_plan.entries) used.push_back(e.lambda);
    auto rng = make_rng(rng_seed, "lambda-scan");

    LambdaScan scan;
    auto probe = [&](double lam) {
        PerturbationPlan p = base_plan;
        p.entries.push_back({branch, lam});
        MeasurementModel after = measurement_matrix(apply_plan(c, p), slack_bus);
        Eigen::MatrixXd s2(base.m, 2 * base.n);
        s2 << base.H, after.H;
        scan.samples.emplace_back(lam, numerical_rank(s2) - gamma_before);
    };
    for (int i = 0; i < samples; ++i)
        probe(draw_ratio(rng, base_plan.lambda_min, base_plan.lambda_max, used));
    for (double lam : extra_lambdas) probe(lam);

    std::map<int, int> counts;
    for (const auto& [lam, dg] : scan.samples) ++counts[dg];
    scan.majority = std::max_element(counts.begin(), counts.end(), [](auto& a, auto& b) {
                        return a.second < b.second;
                    })->first;
    for (const auto& [lam, dg] : scan.samples)
        if (dg != scan.majority) ++scan.exceptions;
    return scan;
}

}  // namespace mtdgrid
