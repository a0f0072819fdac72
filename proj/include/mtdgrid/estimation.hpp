#pragma once

#include "mtdgrid/grid_model.hpp"

namespace mtdgrid {

struct NoiseModel {
    double sigma = 0.0;   // per-meter standard deviation (uniform across meters)
    double alpha = 0.05;  // false-alarm rate
};

struct EstimationResult {
    Eigen::VectorXd x_hat;
    double residual_norm = 0.0;
    bool detected = false;
};

// WLS estimate. With uniform sigma the weight matrix cancels, so this is the
// ordinary least-squares solution via QR.
Eigen::VectorXd estimate_state(const MeasurementModel& model, const Eigen::VectorXd& z);

// ||z - H x_hat||_2
double residual_norm(const MeasurementModel& model, const Eigen::VectorXd& z);

// Inverse CDF of the chi-square distribution with dof degrees of freedom,
// evaluated at probability p. Accurate to ~1e-8.
double chi_square_quantile(double dof, double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// tau = sigma * sqrt(chi2_{m-n, alpha}); requires sigma > 0 and m > n.
// The noiseless case (sigma == 0) is handled inside detect() with a relative
// tolerance, not here.
double bdd_threshold(const NoiseModel& noise, int m, int n);

bool detect(const MeasurementModel& model, const Eigen::VectorXd& z, const NoiseModel& noise);

EstimationResult estimate(const MeasurementModel& model, const Eigen::VectorXd& z,
                          const NoiseModel& noise);

}  // namespace mtdgrid
