#include <doctest.h>

#include <cmath>
#include <numbers>

#include "woldlab/examples.hpp"
#include "woldlab/twisted.hpp"

using namespace woldlab;

namespace {

constexpr int kCap = 12;
constexpr int kGuard = 8;
constexpr int kDepth = kCap - kGuard + 1;

TwistedConstruction commuting_shifts() {
    TwistedConstruction c;
    c.p = 1;
    c.m = 2;
    c.n = 2;
    c.degree_cap = kCap;
    c.guard = kGuard;
    return c;
}

Operator scalar(cplx z) {
    Operator u(1, 1);
    u(0, 0) = z;
    return u;
}

long interior_total(const DecompositionResult& r) {
    long total = 0;
    for (const auto& [a, s] : r.summands) total += s.h_interior.dim();
    return total;
}

bool roles_match_membership(const DecompositionResult& r) {
    for (const auto& [a, s] : r.summands)
        for (const auto& v : s.roles) {
            if (v.member != bool(a & (1u << (v.op - 1)))) return false;
            if (v.ok && v.shift != v.member) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("subset helpers and multi-index boxes") {
    CHECK(subset_members(0b101, 3) == std::vector<int>{1, 3});
    CHECK(subset_members(0, 3).empty());
    auto box = multi_index_box(2, 2);
    REQUIRE(box.size() == 9);
    CHECK(box.front() == MultiIndex{0, 0});
    CHECK(box[1] == MultiIndex{0, 1});
    CHECK(box[3] == MultiIndex{1, 0});
    CHECK(box.back() == MultiIndex{2, 2});
    for (size_t i = 0; i < box.size(); ++i) CHECK(multi_index_position(box[i], 2) == static_cast<long>(i));
    CHECK(multi_index_box(0, 3).size() == 1);
}

TEST_CASE("power_images against explicit matrix powers") {
    TwistedTuple t = construct_twisted(construct_demo(kCap, kGuard));
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(t.dim(), 3);
    auto imgs = power_images(t, {1, 2}, 2, x);
    auto box = multi_index_box(2, 2);
    REQUIRE(imgs.size() == box.size());
    for (size_t i = 0; i < box.size(); ++i) {
        Operator p = matrix_power(t.op(1), box[i][0]) * matrix_power(t.op(2), box[i][1]);
        CHECK((imgs[i] - p * x).norm() < 1e-12);
    }
}

TEST_CASE("tuple validation") {
    TwistedTuple t;
    t.n = 2;
    t.ops = {identity(2), identity(2)};
    Operator a(2, 2), b(2, 2);
    a << 0, 1, 1, 0;
    b << 1, 0, 0, -1;
    t.twists[{1, 2}] = a;
    CHECK_NOTHROW(t.validate({}));
    CHECK((t.twist(2, 1) - a.adjoint()).norm() == 0.0);
    TwistedTuple three;
    three.n = 3;
    three.ops = {identity(2), identity(2), identity(2)};
    three.twists[{1, 2}] = a;
    three.twists[{1, 3}] = b;
    CHECK_THROWS(three.validate({}));
    t.twists[{1, 2}] = 2.0 * a;
    CHECK_THROWS_AS(t.validate({}), NotUnitary);
}

TEST_CASE("pseudo_inverse of a partial isometry is its adjoint") {
    Operator s = mult_op(SpaceDescriptor{1, 10, 1, 2}, 1);
    CHECK((pseudo_inverse(s) - s.adjoint()).norm() < 1e-12);
    Operator b = bergman_shift(10);
    Operator pb = pseudo_inverse(b);
    CHECK((b * pb * b - b).norm() < 1e-12);
    CHECK((pb * b * pb - pb).norm() < 1e-12);
}

TEST_CASE("commuting shifts: verification, wandering data and both routes") {
    PipelineInput in = constructed_input(commuting_shifts());
    SpaceDescriptor s = commuting_shifts().space();
    CHECK((in.tuple.op(1) - mult_op(s, 1)).norm() == 0.0);
    CHECK((in.tuple.op(2) - mult_op(s, 2)).norm() == 0.0);

    TwistedReport r = verify_twisted(in.tuple, in.interior, 4);
    CHECK(r.pass);
    CHECK(r.res_i <= 1e-12);
    CHECK(r.res_ii <= 1e-12);
    CHECK(r.res_iii <= 1e-12);

    WanderingPair w = wandering_subspaces(in.tuple, 0b11, kDepth);
    CHECK(w.w.dim() == 1);
    CHECK(w.d.dim() == 1);
    CHECK(std::abs(std::abs(w.w.basis(s.index_of({0, 0}), 0)) - 1.0) < 1e-12);

    DecompositionResult ind = wold_multi_induction(in.tuple, in.interior, kDepth);
    DecompositionResult proj = wold_multi_projection(in.tuple, in.interior, kDepth);
    CHECK(ind.pass);
    CHECK(proj.pass);
    for (SubsetIndex a = 0; a < 4; ++a) {
        CHECK(ind.summands.at(a).h_interior.dim() == (a == 0b11 ? in.interior.dim() : 0));
        CHECK(proj.summands.at(a).h_interior.dim() == ind.summands.at(a).h_interior.dim());
    }
    CHECK(route_agreement(ind, proj, in.interior) <= 1e-10);
    CHECK(roles_match_membership(ind));

    auto splits = per_operator_splits(in.tuple, in.interior, kDepth);
    CHECK(check_reducing_conditions(in.tuple, splits, in.interior).pass);

    LemmaReport l = lemma_suite(in.tuple, in.interior, 3, {}, kDepth);
    CHECK(l.pass);
    CHECK(l.worst() <= 1e-12);
}

TEST_CASE("scalar twist e^{i pi/4}") {
    TwistedConstruction c = commuting_shifts();
    const cplx z = std::polar(1.0, std::numbers::pi / 4);
    c.twists[{1, 2}] = scalar(z);
    PipelineInput in = constructed_input(c);
    SpaceDescriptor s = c.space();
    // M_2 = M_{z_2} D_1[U_21]
    Operator m2 = mult_op(s, 2) * diag_twist(s, 1, scalar(std::conj(z)));
    CHECK((in.tuple.op(2) - m2).norm() < 1e-13);
    const Operator& m1 = in.tuple.op(1);
    CHECK(restricted_norm(m1 * m2 - z * m2 * m1, in.interior) < 1e-12);
    CHECK(restricted_norm(m1 * m2 - m2 * m1, in.interior) > 0.5);

    TwistedReport r = verify_twisted(in.tuple, in.interior, 4);
    CHECK(r.pass);
    CHECK(std::max({r.res_i, r.res_ii, r.res_iii}) <= 1e-10);

    LemmaReport l = lemma_suite(in.tuple, in.interior, 3, {}, kDepth);
    CHECK(l.worst() <= 1e-8);
    // isometric specialization: U_12 = T_1^* T_2^* T_1 T_2 on the interior
    Operator rec = m1.adjoint() * m2.adjoint() * m1 * m2;
    CHECK(restricted_norm(rec - z * identity(rec.rows()), in.interior) < 1e-12);
}

TEST_CASE("coefficient twist diag(i, -i) with an invertible tail") {
    TwistedConstruction c = construct_demo(kCap, kGuard);
    PipelineInput in = constructed_input(c);
    SpaceDescriptor s = c.space();
    const TwistedTuple& t = in.tuple;
    const Operator& u = c.twists.at({1, 2});
    Operator lifted = tensor_lift(identity(kCap + 1), c.tails[0]);
    CHECK((t.op(2) - diag_twist(s, 1, u.adjoint()) * lifted).norm() < 1e-13);
    CHECK(std::abs(sigma_min_on(t.op(2), Subspace::full(t.dim())) - 0.8) < 1e-12);

    TwistedReport r = verify_twisted(t, in.interior, 4);
    CHECK(r.pass);
    CHECK(std::max({r.res_i, r.res_ii, r.res_iii}) <= 1e-10);

    // T_2 is surjective on W_{1}, so the intersection stabilizes at ker M_1^*
    WanderingPair w1 = wandering_subspaces(t, 0b01, in.decomposition_depth);
    CHECK(w1.w.dim() == 2);
    CHECK(subspace_distance(w1.d, kernel_of_adjoint(t.op(1))) < 1e-10);

    DecompositionResult ind = wold_multi_induction(t, in.interior, in.decomposition_depth);
    DecompositionResult proj = wold_multi_projection(t, in.interior, in.decomposition_depth);
    CHECK(ind.pass);
    CHECK(proj.pass);
    CHECK(interior_total(ind) == in.interior.dim());
    CHECK(interior_total(proj) == in.interior.dim());
    CHECK(ind.summands.at(0b01).h_interior.dim() == in.interior.dim());
    CHECK(roles_match_membership(ind));
    CHECK(roles_match_membership(proj));
    CHECK(route_agreement(ind, proj, in.interior) <= 1e-8);

    auto splits = per_operator_splits(t, in.interior, in.decomposition_depth);
    CHECK(check_reducing_conditions(t, splits, in.interior).pass);
    CHECK(lemma_suite(t, in.interior, 3, {}, in.decomposition_depth).worst() <= 1e-8);

    // uniqueness: each summand is the intersection of the per-operator parts
    for (SubsetIndex a = 0; a < 4; ++a) {
        std::vector<Subspace> parts{in.interior};
        for (int i = 1; i <= 2; ++i) {
            const Subspace& sh = splits[i - 1].shift_space;
            parts.push_back((a & (1u << (i - 1))) ? sh : complement_in(sh, Subspace::full(t.dim())));
        }
        CHECK(subspace_distance(intersect(parts), ind.summands.at(a).h_interior) <= 1e-8);
    }

    // twists map every W_A onto itself
    Operator big = t.twist(1, 2);
    for (SubsetIndex a = 0; a < 4; ++a) {
        Subspace wa = wandering_subspaces(t, a, in.decomposition_depth).w;
        CHECK(subspace_distance(apply_to_subspace(big, wa), wa) <= 1e-10);
    }
}

TEST_CASE("shift tensored with a unitary lives in one summand") {
    TwistedConstruction c;
    c.p = 2;
    c.m = 1;
    c.n = 2;
    c.degree_cap = kCap;
    c.guard = kGuard;
    Operator v(2, 2);
    v << std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4);
    c.tails.push_back(v);
    PipelineInput in = constructed_input(c);
    DecompositionResult ind = wold_multi_induction(in.tuple, in.interior, in.decomposition_depth);
    CHECK(ind.pass);
    for (SubsetIndex a = 0; a < 4; ++a)
        CHECK(ind.summands.at(a).h_interior.dim() == (a == 0b01 ? in.interior.dim() : 0));
}

TEST_CASE("Toeplitz pair fails twisting, reducing and completeness") {
    ToeplitzPair p = build_toeplitz_pair(32, 8, 0.5);
    const int depth = 32 - 8 + 1;
    TwistedReport r = verify_twisted(p.tuple, p.interior, 8);
    CHECK(r.res_i <= 1e-10);
    CHECK(r.res_iii >= 1e-3);
    CHECK_FALSE(r.pass);
    CHECK_THROWS_AS(wold_multi_induction(p.tuple, p.interior, depth), NotTwisted);

    auto splits = per_operator_splits(p.tuple, p.interior, depth);
    ReducingReport red = check_reducing_conditions(p.tuple, splits, p.interior);
    CHECK_FALSE(red.pass);
    REQUIRE(red.failing.size() == 1);
    CHECK(red.failing[0] == std::make_pair(2, 1));

    DecompositionOptions opts;
    opts.require_twisted = false;
    DecompositionResult d = wold_multi_induction(p.tuple, p.interior, depth, {}, opts);
    CHECK_FALSE(d.completeness.pass);
    CHECK_FALSE(d.pass);
}
