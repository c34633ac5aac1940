#include <doctest.h>

#include <cmath>

#include "woldlab/examples.hpp"
#include "woldlab/near_isometry.hpp"
#include "woldlab/spaces.hpp"

using namespace woldlab;

namespace {

Subspace interior_of(int degree_cap, int guard) { return InteriorMask(SpaceDescriptor{1, degree_cap, 1, guard}).subspace(); }

Operator block_diag(const Operator& a, const Operator& b) {
    Operator out = Operator::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

Subspace direct_sum(const Subspace& a, const Subspace& b) {
    Operator q = Operator::Zero(a.ambient_dim() + b.ambient_dim(), a.dim() + b.dim());
    q.topLeftCorner(a.ambient_dim(), a.dim()) = a.basis;
    q.bottomRightCorner(b.ambient_dim(), b.dim()) = b.basis;
    return Subspace(q);
}

}  // namespace

TEST_CASE("unilateral shift is a near-isometry with delta 1") {
    SpaceDescriptor s{1, 32, 1, 8};
    Operator mz = mult_op(s, 1);
    NearIsometryReport r = check_near_isometry(mz, interior_of(32, 8), 8);
    CHECK(r.pass);
    CHECK(std::abs(r.delta - 1.0) < 1e-12);
    CHECK(r.upper_excess < 1e-12);
    CHECK(r.wandering_dim == 1);
    CHECK(r.first_failing_order == -1);
    CHECK(r.ortho_residuals.size() == 9);
}

TEST_CASE("Bergman shift passes with delta sqrt(1/2)") {
    Operator b = bergman_shift(32);
    NearIsometryReport r = check_near_isometry(b, interior_of(32, 8), 8);
    CHECK(r.pass);
    CHECK(std::abs(r.delta - std::sqrt(0.5)) < 1e-10);
    CHECK(r.wandering_dim == 1);
    for (double x : r.ortho_residuals) CHECK(x < 1e-12);
}

TEST_CASE("Bergman compression to a zero set fails at order one") {
    BergmanRestriction br = build_bergman_restriction(32, 8, 0.5);
    NearIsometryReport r = check_near_isometry(br.compressed, br.interior_m, 8);
    CHECK_FALSE(r.pass);
    CHECK(r.first_failing_order == 1);
    CHECK(r.ortho_residuals.at(0) < 1e-10);
    CHECK(r.ortho_residuals.at(1) >= 1e-3);
    CHECK_THROWS_AS(wold_single(br.compressed, br.interior_m, 8), NotNearIsometry);
}

TEST_CASE("contraction and lower bound failures") {
    Subspace e = interior_of(16, 8);
    NearIsometryReport big = check_near_isometry(2.0 * mult_op(SpaceDescriptor{1, 16, 1, 8}, 1), e, 4);
    CHECK_FALSE(big.contraction);
    CHECK(std::abs(big.upper_excess - 1.0) < 1e-12);
    Operator w = weighted_shift(16, [](int n) { return n == 3 ? 0.0 : 1.0; });
    NearIsometryReport deg = check_near_isometry(w, e, 4);
    CHECK_FALSE(deg.bounded_below);
    CHECK(deg.delta < 1e-12);
}

TEST_CASE("wold_single on a unitary diagonal") {
    Operator d = Operator::Zero(5, 5);
    for (int k = 0; k < 5; ++k) d(k, k) = std::polar(1.0, 0.7 * k + 0.1);
    WoldSplit s = wold_single(d, Subspace::full(5), 4);
    CHECK(s.wandering.dim() == 0);
    CHECK(s.shift_space.dim() == 0);
    CHECK((s.p_invertible - identity(5)).norm() < 1e-12);
    CHECK(s.invertible_ok);
    CHECK(std::abs(s.invertible_lower_bound - 1.0) < 1e-12);
    CHECK_THROWS_AS(analytic_model_single(d, s, Subspace::full(5), 3), NotPureShift);
}

TEST_CASE("wold_single and the projection route on diag(M_z, 0.9 I)") {
    const int n = 16, g = 8;
    Operator t = block_diag(mult_op(SpaceDescriptor{1, n, 1, g}, 1), 0.9 * identity(3));
    Subspace e = direct_sum(interior_of(n, g), Subspace::full(3));
    const int depth = n - g + 1;
    WoldSplit a = wold_single(t, e, depth);
    WoldSplit b = wold_projection_route(t, e, depth);

    CHECK(a.wandering.dim() == 1);
    CHECK(a.shift_space.dim() == depth + 1);
    CHECK(std::abs(a.invertible_lower_bound - 0.9) < 1e-12);
    CHECK(a.invertible_ok);
    // the shift part is the first depth+1 coordinates of H^2
    Operator expected = Operator::Zero(t.rows(), t.rows());
    for (int k = 0; k <= depth; ++k) expected(k, k) = 1.0;
    CHECK((a.p_shift - expected).norm() < 1e-12);
    CHECK((b.p_shift - expected).norm() < 1e-12);
    CHECK((a.p_invertible - b.p_invertible).norm() < 1e-12);
    CHECK((a.p_shift * a.p_shift - a.p_shift).norm() < 1e-12);

    // both parts reduce T on the interior
    CHECK(restricted_norm(a.p_invertible * t * a.p_shift, e) < 1e-12);
    CHECK(restricted_norm(a.p_shift * t * a.p_invertible, e) < 1e-12);
}

TEST_CASE("power range projectors") {
    Operator b = bergman_shift(12);
    for (int k = 0; k <= 3; ++k) {
        Operator p = power_range_projector(b, k);
        CHECK((p * p - p).norm() < 1e-12);
        CHECK((p - p.adjoint()).norm() < 1e-12);
        CHECK(std::abs(p.trace().real() - (13 - k)) < 1e-10);
    }
}

TEST_CASE("single-operator analytic model weights") {
    const int n = 32, g = 8;
    Subspace e = interior_of(n, g);
    const int depth = n - g + 1;
    struct Case {
        Operator t;
        std::function<double(int)> w;
    };
    std::vector<Case> cases{
        {mult_op(SpaceDescriptor{1, n, 1, g}, 1), [](int) { return 1.0; }},
        {bergman_shift(n), [](int k) { return std::sqrt((k + 1.0) / (k + 2.0)); }},
        {weighted_shift(n, gap_weight), [](int k) { return 1.0 / 3.0 + std::pow(3.0, -(k + 1)); }},
    };
    for (const auto& c : cases) {
        WoldSplit s = wold_single(c.t, e, depth);
        WeightedShiftModel m = analytic_model_single(c.t, s, e, depth);
        REQUIRE(m.weights.size() == static_cast<size_t>(depth));
        for (int k = 0; k < depth; ++k) {
            REQUIRE(m.weights[k].rows() == 1);
            CHECK(std::abs(m.weights[k](0, 0) - cplx(c.w(k), 0.0)) < 1e-10);
        }
        CHECK(m.conjugation_residual < 1e-10);
        CHECK(m.upper_bound <= 1.0 + 1e-12);
    }
}

TEST_CASE("analytic model of a two-dimensional wandering subspace") {
    const int n = 16, g = 8;
    SpaceDescriptor s{1, n, 2, g};
    Operator t = mult_op(s, 1) * tensor_lift(identity(n + 1), Operator(Eigen::Vector2cd(1.0, 0.5).asDiagonal()));
    Subspace e = InteriorMask(s).subspace();
    WoldSplit split = wold_single(t, e, n - g + 1);
    CHECK(split.wandering.dim() == 2);
    WeightedShiftModel m = analytic_model_single(t, split, e, n - g + 1);
    CHECK(std::abs(m.lower_bound_c - 0.5) < 1e-10);
    CHECK(std::abs(m.upper_bound - 1.0) < 1e-10);
    CHECK(m.conjugation_residual < 1e-10);
}
