#include "mtdgrid/attack_space.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtdgrid {

Eigen::VectorXd make_attack(const MeasurementModel& model, const Eigen::VectorXd& c) {
    if (c.size() != model.n) throw std::invalid_argument("injection length != n");
    return model.H * c;
}

int numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
    if (M.size() == 0) throw std::invalid_argument("numerical_rank: empty matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    if (rel_tol < 0.0)
        rel_tol = static_cast<double>(std::max(M.rows(), M.cols())) *
                  std::numeric_limits<double>::epsilon();
    double tol = rel_tol * sv(0);
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

SpaceReport security_factor(const MeasurementModel& before, const MeasurementModel& after) {
    if (before.H.rows() != after.H.rows() || before.H.cols() != after.H.cols())
        throw std::invalid_argument("measurement models differ in shape");
    const int n = before.n;
    if (numerical_rank(before.H) < n || numerical_rank(after.H) < n)
        throw ValidationError("rank-deficient measurement matrix");
    Eigen::MatrixXd stacked(before.m, 2 * n);
    stacked << before.H, after.H;
    SpaceReport rep;
    rep.n = n;
    rep.l = before.l;
    rep.m = before.m;
    rep.rank_tolerance = static_cast<double>(std::max(stacked.rows(), stacked.cols())) *
                         std::numeric_limits<double>::epsilon();
    rep.gamma = numerical_rank(stacked);
    rep.dim_stealthy = 2 * n - rep.gamma;
    return rep;
}

bool is_stealthy(const Eigen::VectorXd& a, const MeasurementModel& after) {
    if (a.size() != after.m) throw std::invalid_argument("attack length != m");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(after.H);
    Eigen::VectorXd resid = a - after.H * qr.solve(a);
    return resid.norm() <= 1e-8 * std::max(1.0, a.norm());
}

IdentifiedInjection identify_injection(const MeasurementModel& before,
                                       const MeasurementModel& after,
                                       const Eigen::VectorXd& z_a) {
    SpaceReport rep = security_factor(before, after);
    if (rep.dim_stealthy != 0)
        throw ValidationError("identification not unique: stealthy space dimension " +
                              std::to_string(rep.dim_stealthy));
    const int n = before.n;
    Eigen::MatrixXd stacked(before.m, 2 * n);
    stacked << after.H, before.H;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
    Eigen::VectorXd sol = qr.solve(z_a);
    IdentifiedInjection out;
    out.x_prime = sol.head(n);
    out.c = sol.tail(n);
    return out;
}

Eigen::MatrixXd stealthy_basis(const MeasurementModel& before, const MeasurementModel& after) {
    const int n = before.n;
    Eigen::MatrixXd paired(before.m, 2 * n);
    paired << before.H, -after.H;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(paired, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double tol = static_cast<double>(std::max(paired.rows(), paired.cols())) *
                 std::numeric_limits<double>::epsilon() * (sv.size() ? sv(0) : 0.0);
    std::vector<int> null_cols;
    for (int i = 0; i < 2 * n; ++i)
        if (i >= sv.size() || sv(i) <= tol) null_cols.push_back(i);
    Eigen::MatrixXd vecs(before.m, static_cast<int>(null_cols.size()));
    for (size_t k = 0; k < null_cols.size(); ++k)
        vecs.col(static_cast<int>(k)) = before.H * svd.matrixV().col(null_cols[k]).head(n);
    if (vecs.cols() == 0) return vecs;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vecs);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(before.m, vecs.cols());
    return q;
}

double stealthy_family_3bus(const GridCase& c, const PerturbationPlan& plan) {
    if (c.n_buses != 3) throw ValidationError("stealthy_family_3bus needs a 3-bus case");
    validate_plan(c, plan);
    if (plan.entries.empty()) throw ValidationError("no perturbation");
    for (const auto& e : plan.entries) {
        const Branch& b = c.branches[e.branch - 1];
        int lo = std::min(b.from_bus, b.to_bus), hi = std::max(b.from_bus, b.to_bus);
        bool is12 = (lo == 1 && hi == 2), is23 = (lo == 2 && hi == 3);
        if (!is12 && !is23)
            throw ValidationError("plan must perturb only branches {1,2} and {2,3}");
    }
    MeasurementModel before = measurement_matrix(c, 1);
    MeasurementModel after = measurement_matrix(apply_plan(c, plan), 1);
    // c spans states of buses 2 and 3 (slack is bus 1)
    Eigen::MatrixXd paired(before.m, 4);
    paired << before.H, -after.H;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(paired, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double tol = static_cast<double>(std::max(paired.rows(), paired.cols())) *
                 std::numeric_limits<double>::epsilon() * sv(0);
    int nullity = 0;
    for (int i = 0; i < 4; ++i)
        if (i >= sv.size() || sv(i) <= tol) ++nullity;
    if (nullity != 1)
        throw ValidationError("stealthy space dimension is " + std::to_string(nullity) +
                              ", expected 1");
    Eigen::Vector2d cvec = svd.matrixV().col(3).head(2);
    if (std::fabs(cvec(0)) < 1e-12 * cvec.norm())
        throw ValidationError("degenerate family: c1 = 0");
    return cvec(1) / cvec(0);
}

}  // namespace mtdgrid
