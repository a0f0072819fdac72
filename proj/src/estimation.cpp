#include "mtdgrid/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtdgrid {

Eigen::VectorXd estimate_state(const MeasurementModel& model, const Eigen::VectorXd& z) {
    if (z.size() != model.m) throw std::invalid_argument("measurement vector length != m");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(model.H);
    if (qr.rank() < model.n) throw ValidationError("H is rank deficient; state unobservable");
    return qr.solve(z);
}

double residual_norm(const MeasurementModel& model, const Eigen::VectorXd& z) {
    Eigen::VectorXd x = estimate_state(model, z);
    return (z - model.H * x).norm();
}

namespace {

// P(a, x) by series expansion; good for x < a + 1.
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a, term = sum;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by Lentz's continued fraction; good for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int k = 1; k < 10000; ++k) {
        double an = -k * (k - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
    if (x == 0.0) return 0.0;
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double chi_square_quantile(double dof, double p) {
    if (dof <= 0.0 || p < 0.0 || p >= 1.0)
        throw std::invalid_argument("chi_square_quantile domain");
    if (p == 0.0) return 0.0;
    // CDF(x) = P(dof/2, x/2); invert by bisection on a bracketed interval.
    const double a = dof / 2.0;
    auto cdf = [&](double x) { return gamma_p(a, x / 2.0); };
    double lo = 0.0, hi = dof + 10.0;
    while (cdf(hi) < p) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

double bdd_threshold(const NoiseModel& noise, int m, int n) {
    if (m <= n) throw std::invalid_argument("bdd_threshold requires m > n");
    if (noise.sigma <= 0.0) throw std::invalid_argument("bdd_threshold requires sigma > 0");
    return noise.sigma * std::sqrt(chi_square_quantile(m - n, 1.0 - noise.alpha));
}

bool detect(const MeasurementModel& model, const Eigen::VectorXd& z, const NoiseModel& noise) {
    double r = residual_norm(model, z);
    double tau = noise.sigma > 0.0
                     ? bdd_threshold(noise, model.m, model.n)
                     : 1e-8 * std::max(1.0, z.norm());
    return r > tau;
}

EstimationResult estimate(const MeasurementModel& model, const Eigen::VectorXd& z,
                          const NoiseModel& noise) {
    EstimationResult res;
    res.x_hat = estimate_state(model, z);
    res.residual_norm = (z - model.H * res.x_hat).norm();
    double tau = noise.sigma > 0.0
                     ? bdd_threshold(noise, model.m, model.n)
                     : 1e-8 * std::max(1.0, z.norm());
    res.detected = res.residual_norm > tau;
    return res;
}

}  // namespace mtdgrid
