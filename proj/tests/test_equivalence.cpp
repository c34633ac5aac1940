#include <doctest.h>

#include <cmath>
#include <random>

#include "woldlab/equivalence.hpp"
#include "woldlab/examples.hpp"

using namespace woldlab;

namespace {

constexpr int kCap = 12;
constexpr int kGuard = 8;

Operator random_unitary(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Operator a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Operator> qr(a);
    return qr.householderQ() * Operator::Identity(n, n);
}

TwistedTuple conjugate(const TwistedTuple& t, const Operator& w) {
    TwistedTuple out = t;
    for (auto& op : out.ops) op = w * op * w.adjoint();
    for (auto& [key, u] : out.twists) u = w * u * w.adjoint();
    return out;
}

WitnessFamily identity_witnesses(const DecompositionResult& dec) {
    WitnessFamily v;
    for (const auto& [a, s] : dec.summands)
        if (s.d_interior.dim() > 0) v[a] = identity(s.d_interior.dim());
    return v;
}

}  // namespace

TEST_CASE("a tuple is equivalent to itself through identity witnesses") {
    PipelineInput in = constructed_input(construct_demo(kCap, kGuard));
    DecompositionResult dec = wold_multi_induction(in.tuple, in.interior, in.decomposition_depth);
    REQUIRE(dec.pass);
    EquivalenceReport r = verify_equivalence_witness(in.tuple, dec, in.interior, in.tuple, dec, in.interior,
                                                     identity_witnesses(dec));
    CHECK(r.pass);
    CHECK(r.dims_match);
    CHECK(r.intertwining <= 1e-10);
    CHECK(r.isometry <= 1e-10);
    CHECK(r.twist_residual <= 1e-10);
    CHECK(restricted_norm(r.u - identity(in.tuple.dim()), in.interior) <= 1e-10);
}

TEST_CASE("conjugation by a coefficient unitary is recovered by the witness") {
    PipelineInput in = constructed_input(construct_demo(kCap, kGuard));
    Operator w = tensor_lift(identity(kCap + 1), random_unitary(2, 7));
    TwistedTuple tt = conjugate(in.tuple, w);
    Subspace interior_t = apply_to_subspace(w, in.interior);
    DecompositionResult dec = wold_multi_induction(in.tuple, in.interior, in.decomposition_depth);
    DecompositionResult dec_t = wold_multi_induction(tt, interior_t, in.decomposition_depth);
    REQUIRE(dec_t.pass);

    WitnessFamily v = witnesses_from_global(w, dec, dec_t);
    EquivalenceReport r = verify_equivalence_witness(in.tuple, dec, in.interior, tt, dec_t, interior_t, v);
    CHECK(r.pass);
    CHECK(restricted_norm(r.u - w, in.interior) <= 1e-8);
    // the assembled U also carries the twists
    CHECK(r.twist_residual <= 1e-8);
    for (const auto& [key, u] : in.tuple.twists) {
        Operator lhs = r.u * u - tt.twist(key.first, key.second) * r.u;
        CHECK(restricted_norm(lhs, in.interior) <= 1e-8);
    }

    // the wandering data carries the same conjugation
    WanderingEquivalence we = check_wandering_data_equiv(in.tuple, dec, tt, dec_t);
    CHECK(we.verdict == Verdict::Equivalent);

    WanderingData d = wandering_data(in.tuple, dec, 0b01);
    WanderingData dt = wandering_data(tt, dec_t, 0b01);
    REQUIRE(d.restricted_ops.count(2));
    const Operator& vv = v.at(0b01);
    CHECK((vv * d.restricted_ops.at(2) - dt.restricted_ops.at(2) * vv).norm() <= 1e-8);
    CHECK(d.reducing_residual <= 1e-8);
}

TEST_CASE("wandering data agree but the tuples do not") {
    WanderingGapPair p = build_wandering_gap(kCap, kGuard);
    const int depth = kCap - kGuard + 1;
    DecompositionResult dec = wold_multi_induction(p.t, p.interior, depth);
    DecompositionResult dec_t = wold_multi_induction(p.tt, p.interior, depth);
    for (SubsetIndex a = 0; a < 4; ++a) {
        long expected = a == 0b11 ? 1 : 0;
        CHECK(dec.summands.at(a).d_interior.dim() == expected);
        CHECK(dec_t.summands.at(a).d_interior.dim() == expected);
    }
    CHECK(std::abs(opnorm(p.t.ops[0]) - 1.0) <= 1e-12);
    CHECK(std::abs(opnorm(p.tt.ops[0]) - 2.0 / 3.0) <= 1e-12);

    WanderingEquivalence we = check_wandering_data_equiv(p.t, dec, p.tt, dec_t);
    CHECK(we.verdict == Verdict::Equivalent);
    EquivalenceReport r =
        verify_equivalence_witness(p.t, dec, p.interior, p.tt, dec_t, p.interior, identity_witnesses(dec));
    CHECK(r.dims_match);
    CHECK_FALSE(r.pass);
    CHECK(r.intertwining > 0.1);
    CHECK(verdict_name(Verdict::NotEquivalent) == "not-equivalent");
}

TEST_CASE("multishift model of commuting shifts has identity weights") {
    TwistedConstruction c;
    c.p = 1;
    c.m = 2;
    c.n = 2;
    c.degree_cap = kCap;
    c.guard = kGuard;
    PipelineInput in = constructed_input(c);
    DecompositionResult dec = wold_multi_induction(in.tuple, in.interior, in.decomposition_depth);
    MultishiftModel m = analytic_model_multi(in.tuple, dec, in.interior);
    CHECK(m.pass);
    REQUIRE(m.blocks.size() == 1);
    const ModelBlock& b = m.blocks[0];
    CHECK(b.a == 0b11);
    for (const auto& per : b.gamma)
        for (const auto& g : per)
            if (g.size() > 0) CHECK((g - identity(1)).norm() <= 1e-10);
    CHECK(m.conjugation_residual <= 1e-10);
    CHECK(m.round_trip <= 1e-10);
}

TEST_CASE("isometric constructed tuple: weights are twist-power products") {
    PipelineInput in = constructed_input(isometric_demo(kCap, kGuard));
    DecompositionResult dec = wold_multi_induction(in.tuple, in.interior, in.decomposition_depth);
    MultishiftModel m = analytic_model_multi(in.tuple, dec, in.interior);
    CHECK(m.pass);
    REQUIRE_FALSE(m.blocks.empty());
    long checked = 0;
    for (const auto& b : m.blocks)
        for (size_t idx = 0; idx < b.ks.size(); ++idx)
            for (int s = 1; s <= in.tuple.n; ++s) {
                const Operator& g = b.gamma[idx][s - 1];
                if (g.size() == 0) continue;
                CHECK((g - predicted_isometric_weight(in.tuple, b, idx, s)).norm() <= 1e-10);
                ++checked;
            }
    CHECK(checked > 0);
}

TEST_CASE("near-isometric constructed tuple: conjugation and bounds") {
    PipelineInput in = constructed_input(construct_demo(kCap, kGuard));
    DecompositionResult dec = wold_multi_induction(in.tuple, in.interior, in.decomposition_depth);
    MultishiftModel m = analytic_model_multi(in.tuple, dec, in.interior);
    CHECK(m.pass);
    CHECK(m.conjugation_residual <= 1e-8);
    CHECK(m.round_trip <= 1e-8);
    CHECK(std::abs(m.lower_bound_c - 0.8) <= 1e-10);
    CHECK(m.upper_bound <= 1.0 + 1e-8);
    for (const auto& b : m.blocks) {
        CHECK(b.lower_bound >= m.lower_bound_c - 1e-8);
        CHECK(b.upper_bound <= 1.0 + 1e-8);
    }
}

TEST_CASE("the model refuses an incomplete decomposition") {
    ToeplitzPair p = build_toeplitz_pair(16, 8, 0.5);
    DecompositionOptions opts;
    opts.require_twisted = false;
    DecompositionResult dec = wold_multi_induction(p.tuple, p.interior, 9, {}, opts);
    REQUIRE_FALSE(dec.pass);
    CHECK_THROWS_AS(analytic_model_multi(p.tuple, dec, p.interior), DecompositionIncomplete);
}
