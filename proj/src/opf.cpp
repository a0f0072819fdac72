#include "mtdgrid/opf.hpp"

#include <algorithm>
#include <cmath>

namespace mtdgrid {

namespace {
constexpr double kTol = 1e-9;
}

bool simplex_solve(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                   const Eigen::MatrixXd& A_ub, const Eigen::VectorXd& b_ub,
                   const Eigen::VectorXd& cost, Eigen::VectorXd& x_out) {
    const int nv = static_cast<int>(cost.size());
    const int me = static_cast<int>(b_eq.size());
    const int mu = static_cast<int>(b_ub.size());
    const int m = me + mu;
    // columns: [structural | ub slacks | artificials | rhs]
    const int n_total = nv + mu + m;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, n_total + 1);
    for (int i = 0; i < me; ++i) {
        T.row(i).head(nv) = A_eq.row(i);
        T(i, n_total) = b_eq(i);
    }
    for (int i = 0; i < mu; ++i) {
        T.row(me + i).head(nv) = A_ub.row(i);
        T(me + i, nv + i) = 1.0;  // slack
        T(me + i, n_total) = b_ub(i);
    }
    // make rhs nonnegative, then give every row an artificial basis column
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        if (T(i, n_total) < 0.0) T.row(i) = -T.row(i);
        T(i, nv + mu + i) = 1.0;
        basis[i] = nv + mu + i;
    }

    auto run_phase = [&](const Eigen::VectorXd& obj, int active_cols) -> bool {
        // reduced-cost row z = obj - obj_B * T
        Eigen::VectorXd z(active_cols + 1);
        for (int pass = 0;; ++pass) {
            if (pass > 200000) throw std::runtime_error("simplex iteration limit");
            z.setZero();
            z.head(active_cols) = obj.head(active_cols);
            for (int i = 0; i < m; ++i) {
                double cb = obj(basis[i]);
                if (cb != 0.0) {
                    z.head(active_cols) -= cb * T.row(i).head(active_cols);
                    z(active_cols) -= cb * T(i, n_total);
                }
            }
            // Bland's rule: first column with negative reduced cost
            int enter = -1;
            for (int j = 0; j < active_cols; ++j)
                if (z(j) < -kTol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;  // optimal
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m; ++i) {
                if (T(i, enter) > kTol) {
                    double ratio = T(i, n_total) / T(i, enter);
                    if (leave < 0 || ratio < best - kTol ||
                        (ratio < best + kTol && basis[i] < basis[leave]))
                        leave = i, best = ratio;
                }
            }
            if (leave < 0) return false;  // unbounded
            T.row(leave) /= T(leave, enter);
            for (int i = 0; i < m; ++i)
                if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
            basis[leave] = enter;
        }
    };

    // phase 1: minimize the sum of artificials
    Eigen::VectorXd obj1 = Eigen::VectorXd::Zero(n_total);
    obj1.tail(m).setOnes();
    if (!run_phase(obj1, n_total)) throw std::runtime_error("phase-1 unbounded");
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
        if (basis[i] >= nv + mu) art_sum += T(i, n_total);
    if (art_sum > 1e-7) return false;  // infeasible
    // pivot any degenerate artificial out of the basis
    for (int i = 0; i < m; ++i) {
        if (basis[i] < nv + mu) continue;
        int enter = -1;
        for (int j = 0; j < nv + mu; ++j)
            if (std::fabs(T(i, j)) > kTol) {
                enter = j;
                break;
            }
        if (enter < 0) continue;  // redundant row
        T.row(i) /= T(i, enter);
        for (int r = 0; r < m; ++r)
            if (r != i && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(i);
        basis[i] = enter;
    }

    // phase 2: original objective over structural + slack columns only
    Eigen::VectorXd obj2 = Eigen::VectorXd::Zero(n_total);
    obj2.head(nv) = cost;
    if (!run_phase(obj2, nv + mu)) throw std::runtime_error("LP unbounded");

    x_out = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < m; ++i)
        if (basis[i] < nv) x_out(basis[i]) = T(i, n_total);
    return true;
}

OpfSolution solve_dc_opf(const GridCase& c, int slack_bus) {
    OpfSolution sol;
    const int g = static_cast<int>(c.generators.size());
    if (g == 0) throw ValidationError("no generators in case");
    const int nb = c.n_buses;
    const int n = nb - 1;
    const int l = c.n_branches();

    double total_load = 0.0;
    for (double d : c.load_mw) total_load += d;
    double total_cap = 0.0;
    for (const auto& gen : c.generators) total_cap += gen.p_max;
    if (total_cap + 1e-9 < total_load) {
        sol.status = OpfSolution::Status::Infeasible;
        sol.diagnostic = "total generation capacity below total load";
        return sol;
    }

    // injection shift factors: flows = M * (E p - d_red)
    Eigen::MatrixXd A = incidence_matrix(c);
    Eigen::MatrixXd D = susceptance_diagonal(c);
    Eigen::MatrixXd Bfull = A.transpose() * D * A;
    Eigen::MatrixXd Ared(l, n), Bred(n, n);
    std::vector<int> keep;
    for (int j = 0; j < nb; ++j)
        if (j != slack_bus - 1) keep.push_back(j);
    for (int j = 0; j < n; ++j) Ared.col(j) = A.col(keep[j]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Bred(i, j) = Bfull(keep[i], keep[j]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Bred);
    Eigen::MatrixXd M = D * Ared * lu.inverse();  // l x n

    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, g);  // generator -> non-slack bus map
    for (int k = 0; k < g; ++k) {
        int s = state_index_of_bus(c.generators[k].bus, slack_bus);
        if (s >= 0) E(s, k) = 1.0;
    }
    Eigen::VectorXd dred(n);
    for (int j = 0; j < n; ++j) dred(j) = c.load_mw[keep[j]];

    // balance equality + generator caps + flow limits
    Eigen::MatrixXd A_eq = Eigen::MatrixXd::Ones(1, g);
    Eigen::VectorXd b_eq(1);
    b_eq(0) = total_load;

    std::vector<int> limited;
    for (int t = 0; t < l; ++t)
        if (c.branches[t].flow_limit > 0.0) limited.push_back(t);
    const int nl = static_cast<int>(limited.size());
    Eigen::MatrixXd A_ub(g + 2 * nl, g);
    Eigen::VectorXd b_ub(g + 2 * nl);
    A_ub.topRows(g) = Eigen::MatrixXd::Identity(g, g);
    for (int k = 0; k < g; ++k) b_ub(k) = c.generators[k].p_max;
    Eigen::MatrixXd ME = M * E;  // l x g
    Eigen::VectorXd base_flow = M * dred;  // flow from loads alone, negated sense
    for (int i = 0; i < nl; ++i) {
        int t = limited[i];
        double fmax = c.branches[t].flow_limit;
        A_ub.row(g + 2 * i) = ME.row(t);
        b_ub(g + 2 * i) = fmax + base_flow(t);
        A_ub.row(g + 2 * i + 1) = -ME.row(t);
        b_ub(g + 2 * i + 1) = fmax - base_flow(t);
    }

    Eigen::VectorXd cost(g);
    for (int k = 0; k < g; ++k) cost(k) = c.generators[k].cost_rate;

    Eigen::VectorXd p;
    if (!simplex_solve(A_eq, b_eq, A_ub, b_ub, cost, p)) {
        sol.status = OpfSolution::Status::Infeasible;
        sol.diagnostic = "no dispatch satisfies balance, generator and flow limits";
        return sol;
    }
    sol.status = OpfSolution::Status::Optimal;
    sol.dispatch = p;
    sol.total_cost = cost.dot(p);
    Eigen::VectorXd inj = E * p - dred;
    sol.theta = lu.solve(inj);
    sol.flows = D * Ared * sol.theta;
    return sol;
}

std::vector<std::pair<double, double>> cost_vs_ratio_sweep(const GridCase& c, int branch,
                                                           const std::vector<double>& ratios,
                                                           int slack_bus) {
    std::vector<std::pair<double, double>> out;
    for (double lam : ratios) {
        GridCase cc = c;
        if (lam != 1.0) {
            PerturbationPlan plan;
            plan.lambda_min = std::min(0.8, lam);
            plan.lambda_max = std::max(1.2, lam);
            plan.entries.push_back({branch, lam});
            cc = apply_plan(c, plan);
        }
        OpfSolution sol = solve_dc_opf(cc, slack_bus);
        if (sol.status != OpfSolution::Status::Optimal)
            throw std::runtime_error("sweep point infeasible at ratio " + std::to_string(lam));
        out.emplace_back(lam, sol.total_cost);
    }
    return out;
}

}  // namespace mtdgrid
