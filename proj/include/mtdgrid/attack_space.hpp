#pragma once

#include "mtdgrid/grid_model.hpp"
#include "mtdgrid/perturbation.hpp"

namespace mtdgrid {

struct StateInjection {
    Eigen::VectorXd c;  // length n, per-state bias in radians
};

struct SpaceReport {
    int gamma = 0;         // rank([H H'])
    int dim_stealthy = 0;  // 2n - gamma
    int n = 0;
    int l = 0;
    int m = 0;
    double rank_tolerance = 0.0;
    bool complete() const { return gamma == 2 * n; }
};

// a = H c
Eigen::VectorXd make_attack(const MeasurementModel& model, const Eigen::VectorXd& c);

// Singular values above tol * sigma_max; default tol = max(rows, cols) * eps.
int numerical_rank(const Eigen::MatrixXd& M, double rel_tol = -1.0);

SpaceReport security_factor(const MeasurementModel& before, const MeasurementModel& after);

// True iff the projection residual of a onto span(H') is <= 1e-8 * max(1, ||a||).
bool is_stealthy(const Eigen::VectorXd& a, const MeasurementModel& after);

// Solve z_a = [H' H] [x'; c] under a complete MTD; throws if the stealthy
// space is nonzero (the split is then not unique).
struct IdentifiedInjection {
    Eigen::VectorXd x_prime;
    Eigen::VectorXd c;
};
IdentifiedInjection identify_injection(const MeasurementModel& before,
                                       const MeasurementModel& after,
                                       const Eigen::VectorXd& z_a);

// Orthonormal basis of the stealthy space span(H) ∩ span(H'), for small
// fixtures. Columns are length-m vectors.
Eigen::MatrixXd stealthy_basis(const MeasurementModel& before, const MeasurementModel& after);

// For the 3-bus triangle with branches {1,2} and {2,3} perturbed (slack bus 1):
// the unique ratio c2/c1 making a = H [c1; c2] stealthy, computed from the
// 1-dimensional intersection of span(H) and span(H').
double stealthy_family_3bus(const GridCase& c, const PerturbationPlan& plan);

}  // namespace mtdgrid
