#include "woldlab/near_isometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace woldlab {

NearIsometryReport check_near_isometry(const Operator& t, const Subspace& interior, int depth, const Tolerances& tol) {
    if (t.rows() != t.cols()) throw DimensionMismatch("check_near_isometry: operator must be square");
    if (interior.ambient_dim() != t.cols()) throw DimensionMismatch("check_near_isometry: interior has wrong ambient");
    if (interior.empty()) throw PreconditionViolated("check_near_isometry: empty interior");
    if (depth < 0) throw PreconditionViolated("check_near_isometry: negative depth");

    NearIsometryReport rep;
    Eigen::VectorXd sv = singular_values(t * interior.basis);
    rep.delta = sv.size() < interior.dim() ? 0.0 : sv.minCoeff();
    rep.upper_excess = std::max(0.0, sv.maxCoeff() - 1.0);

    rep.wandering = kernel_of_adjoint(t, tol);
    rep.wandering_dim = rep.wandering.dim();
    Subspace u = rep.wandering;
    Subspace v = apply_to_subspace(t, interior, tol);
    for (int n = 0; n <= depth; ++n) {
        double r = principal_cosine(u, v);
        rep.ortho_residuals.push_back(r);
        if (r > tol.residual_abs && rep.first_failing_order < 0) rep.first_failing_order = n;
        if (n < depth) {
            u = apply_to_subspace(t, u, tol);
            v = apply_to_subspace(t, v, tol);
        }
    }
    rep.bounded_below = rep.delta >= tol.lower_bound_min;
    rep.contraction = rep.upper_excess <= tol.residual_abs;
    rep.orthogonality = rep.first_failing_order < 0;
    rep.pass = rep.bounded_below && rep.contraction && rep.orthogonality;
    return rep;
}

namespace {

void finish_invertible_part(const Operator& t, const Subspace& interior, const Tolerances& tol, WoldSplit& s) {
    Subspace inv = complement_in(s.shift_space, interior, tol);
    s.invertible_lower_bound = sigma_min_on(t, inv);
    s.invertible_ok = s.invertible_lower_bound >= tol.lower_bound_min;
}

}  // namespace

WoldSplit wold_single(const Operator& t, const Subspace& interior, int depth, const Tolerances& tol) {
    NearIsometryReport rep = check_near_isometry(t, interior, depth, tol);
    if (!rep.pass) {
        std::ostringstream msg;
        msg << "wold_single: not a near-isometry (delta=" << rep.delta << ", excess=" << rep.upper_excess
            << ", first failing order=" << rep.first_failing_order << ")";
        throw NotNearIsometry(msg.str());
    }
    WoldSplit s;
    s.depth = depth;
    s.wandering = kernel_of_adjoint(t, tol);
    std::vector<Subspace> levels{s.wandering};
    for (int n = 1; n <= depth; ++n) levels.push_back(apply_to_subspace(t, levels.back(), tol));
    s.shift_space = sum_of(levels, tol);
    s.p_shift = s.shift_space.projector();
    s.p_invertible = identity(t.rows()) - s.p_shift;
    finish_invertible_part(t, interior, tol, s);
    return s;
}

Operator power_range_projector(const Operator& t, int k, const Tolerances& tol) {
    return numerical_range(matrix_power(t, k), tol).projector();
}

WoldSplit wold_projection_route(const Operator& t, const Subspace& interior, int depth, const Tolerances& tol) {
    if (t.rows() != t.cols()) throw DimensionMismatch("wold_projection_route: operator must be square");
    if (depth < 0) throw PreconditionViolated("wold_projection_route: negative depth");
    WoldSplit s;
    s.depth = depth;
    s.wandering = kernel_of_adjoint(t, tol);
    // T^{d+1}(T^{d+1})^#; the telescoping sum of the level projections collapses to I minus this.
    Subspace tail = numerical_range(matrix_power(t, depth + 1), tol);
    s.p_invertible = tail.projector();
    s.p_shift = identity(t.rows()) - s.p_invertible;
    s.shift_space = kernel_of_adjoint(tail.basis, tol);
    finish_invertible_part(t, interior, tol, s);
    return s;
}

WeightedShiftModel analytic_model_single(const Operator& t, const WoldSplit& split, const Subspace& interior,
                                         int depth, const Tolerances& tol) {
    if (depth < 1) throw PreconditionViolated("analytic_model_single: depth must be at least 1");
    if (restricted_norm(split.p_invertible, interior) > tol.residual_abs)
        throw NotPureShift("analytic_model_single: interior meets the invertible part");
    const Subspace& w = split.wandering;
    if (w.empty()) throw NotPureShift("analytic_model_single: trivial wandering subspace");
    const Eigen::Index wd = w.dim();

    WeightedShiftModel m;
    Eigen::MatrixXcd y = w.basis;
    for (int n = 0; n <= depth; ++n) {
        // Powers decay geometrically, so injectivity is certified relative to their own size.
        Tolerances rel = tol;
        rel.lower_bound_min = tol.rank_rel * std::max(opnorm(y), std::numeric_limits<double>::min());
        m.lambdas.push_back(n == 0 ? w.basis : polar_unitary(y, rel));
        if (n < depth) y = t * y;
    }
    m.lower_bound_c = std::numeric_limits<double>::infinity();
    for (int n = 0; n < depth; ++n) {
        Operator tn = m.lambdas[n + 1].adjoint() * t * m.lambdas[n];
        Eigen::VectorXd sv = singular_values(tn);
        m.lower_bound_c = std::min(m.lower_bound_c, sv.minCoeff());
        m.upper_bound = std::max(m.upper_bound, sv.maxCoeff());
        m.weights.push_back(tn);
    }
    const Eigen::Index md = (depth + 1) * wd;
    m.intertwiner = Operator(md, t.rows());
    m.model = Operator::Zero(md, md);
    for (int n = 0; n <= depth; ++n) m.intertwiner.middleRows(n * wd, wd) = m.lambdas[n].adjoint();
    for (int n = 0; n < depth; ++n) m.model.block((n + 1) * wd, n * wd, wd, wd) = m.weights[n];
    Operator conj = m.intertwiner * t * m.intertwiner.adjoint() - m.model;
    m.conjugation_residual = opnorm(conj.leftCols(depth * wd));
    return m;
}

}  // namespace woldlab
