#pragma once

#include "mtdgrid/perturbation.hpp"

namespace mtdgrid {

struct OpfSolution {
    enum class Status { Optimal, Infeasible } status = Status::Infeasible;
    Eigen::VectorXd dispatch;  // MW per generator, case order
    double total_cost = 0.0;   // $/h
    Eigen::VectorXd theta;     // phase angles at non-slack buses
    Eigen::VectorXd flows;     // MW per branch
    std::string diagnostic;
};

// Minimize sum mu_i p_i subject to power balance, generator limits and
// branch flow limits (flow_limit 0 = unlimited). Flows are expressed through
// injection shift factors, so the only decision variables are generator
// outputs.
OpfSolution solve_dc_opf(const GridCase& c, int slack_bus = 1);

// One solve per ratio with only `branch` perturbed (lambda = 1 means the
// unperturbed case).
std::vector<std::pair<double, double>> cost_vs_ratio_sweep(const GridCase& c, int branch,
                                                           const std::vector<double>& ratios,
                                                           int slack_bus = 1);

// Generic dense LP: minimize c.x s.t. A_eq x = b_eq, A_ub x <= b_ub, x >= 0.
// Two-phase primal simplex with Bland's rule. Returns false if infeasible.
bool simplex_solve(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                   const Eigen::MatrixXd& A_ub, const Eigen::VectorXd& b_ub,
                   const Eigen::VectorXd& cost, Eigen::VectorXd& x_out);

}  // namespace mtdgrid
