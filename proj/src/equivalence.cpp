#include "woldlab/equivalence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace woldlab {

namespace {

// Powers of a shift shrink geometrically, so injectivity is judged against their own norm.
Operator polar_relative(const Eigen::MatrixXcd& y, const Tolerances& tol) {
    Tolerances rel = tol;
    rel.lower_bound_min = tol.rank_rel * std::max(opnorm(y), std::numeric_limits<double>::min());
    return polar_unitary(y, rel);
}

const Subspace& summand_space(const DecompositionResult& dec, SubsetIndex a) {
    auto it = dec.summands.find(a);
    if (it == dec.summands.end()) throw PreconditionViolated("missing summand " + subset_label(a, dec.n));
    return it->second.d_interior;
}

double leakage(const Operator& x, const Subspace& s) {
    if (s.empty()) return 0.0;
    Eigen::MatrixXcd img = x * s.basis;
    return opnorm(img - s.basis * (s.basis.adjoint() * img));
}

// Pairs (X, X~) that a witness V has to intertwine: V X = X~ V. The wandering-data
// comparison leaves out the Gram operators.
std::vector<std::pair<Operator, Operator>> intertwining_pairs(const WanderingData& w, const WanderingData& wt,
                                                              bool with_gram) {
    std::vector<std::pair<Operator, Operator>> out;
    if (with_gram)
        for (size_t i = 0; i < w.gram_ops.size() && i < wt.gram_ops.size(); ++i)
            out.emplace_back(w.gram_ops[i], wt.gram_ops[i]);
    for (const auto& [j, r] : w.restricted_ops) out.emplace_back(r, wt.restricted_ops.at(j));
    for (const auto& [ij, u] : w.restricted_twists) out.emplace_back(u, wt.restricted_twists.at(ij));
    return out;
}

double max_intertwining(const Operator& v, const std::vector<std::pair<Operator, Operator>>& pairs, size_t from,
                        size_t to) {
    double worst = 0.0;
    for (size_t i = from; i < to; ++i) worst = std::max(worst, opnorm(v * pairs[i].first - pairs[i].second * v));
    return worst;
}

double frobenius_objective(const Operator& v, const std::vector<std::pair<Operator, Operator>>& pairs) {
    double s = 0.0;
    for (const auto& [x, xt] : pairs) s += (v * x - xt * v).squaredNorm();
    return std::sqrt(s);
}

Operator su2(double theta, double alpha, double beta) {
    cplx a = std::polar(std::cos(theta), alpha);
    cplx b = std::polar(std::sin(theta), beta);
    Operator v(2, 2);
    v << a, -std::conj(b), b, std::conj(a);
    return v;
}

// Smallest singular value of X -> (X A_i - B_i X)_i over unit-Frobenius X.
double least_squares_residual(const std::vector<std::pair<Operator, Operator>>& pairs, Eigen::Index d) {
    if (pairs.empty()) return 0.0;
    const Eigen::Index dd = d * d;
    Eigen::MatrixXcd big(static_cast<Eigen::Index>(pairs.size()) * dd, dd);
    const Operator id = identity(d);
    for (size_t i = 0; i < pairs.size(); ++i)
        big.middleRows(static_cast<Eigen::Index>(i) * dd, dd) =
            tensor_lift(pairs[i].first.transpose(), id) - tensor_lift(id, pairs[i].second);
    return singular_values(big).minCoeff();
}

}  // namespace

WanderingData wandering_data(const TwistedTuple& t, const DecompositionResult& dec, SubsetIndex a,
                             const Tolerances& tol) {
    (void)tol;
    WanderingData w;
    w.a = a;
    w.space = summand_space(dec, a);
    const Eigen::MatrixXcd& q = w.space.basis;
    std::vector<int> members = subset_members(a, t.n);
    w.ks = multi_index_box(static_cast<int>(members.size()), dec.depth);
    if (w.space.empty()) return w;
    for (const Eigen::MatrixXcd& y : power_images(t, members, dec.depth, q)) w.gram_ops.push_back(y.adjoint() * y);
    for (int j = 1; j <= t.n; ++j) {
        if (a & (1u << (j - 1))) continue;
        w.restricted_ops[j] = q.adjoint() * t.op(j) * q;
        w.reducing_residual = std::max({w.reducing_residual, leakage(t.op(j), w.space),
                                        leakage(t.op(j).adjoint(), w.space)});
    }
    for (int i = 1; i <= t.n; ++i)
        for (int j = i + 1; j <= t.n; ++j) {
            Operator u = t.twist(i, j);
            w.restricted_twists[{i, j}] = q.adjoint() * u * q;
            w.reducing_residual = std::max(w.reducing_residual, leakage(u, w.space));
        }
    return w;
}

WitnessFamily witnesses_from_global(const Operator& w, const DecompositionResult& dec,
                                    const DecompositionResult& dec_t) {
    WitnessFamily out;
    for (const auto& [a, s] : dec.summands) {
        auto it = dec_t.summands.find(a);
        if (it == dec_t.summands.end()) continue;
        out[a] = it->second.d_interior.basis.adjoint() * w * s.d_interior.basis;
    }
    return out;
}

EquivalenceReport verify_equivalence_witness(const TwistedTuple& t, const DecompositionResult& dec,
                                             const Subspace& interior, const TwistedTuple& tt,
                                             const DecompositionResult& dec_t, const Subspace& interior_t,
                                             const WitnessFamily& witnesses, const Tolerances& tol) {
    if (t.n != tt.n) throw DimensionMismatch("verify_equivalence_witness: tuples have different sizes");
    if (dec.depth != dec_t.depth) throw PreconditionViolated("verify_equivalence_witness: decomposition depths differ");
    EquivalenceReport rep;
    rep.dims_match = true;
    rep.witness_ok = true;
    rep.u = Operator::Zero(tt.dim(), t.dim());
    const int depth = dec.depth;

    for (const auto& [a, s] : dec.summands) {
        const Subspace& q = s.d_interior;
        const Subspace& qt = summand_space(dec_t, a);
        WitnessCheck c;
        c.a = a;
        c.dim = q.dim();
        c.dim_t = qt.dim();
        if (c.dim != c.dim_t) {
            rep.dims_match = false;
            rep.witness_ok = false;
            rep.per_summand.push_back(c);
            continue;
        }
        if (c.dim == 0) {
            c.ok = true;
            rep.per_summand.push_back(c);
            continue;
        }
        auto it = witnesses.find(a);
        if (it == witnesses.end())
            throw PreconditionViolated("verify_equivalence_witness: no witness for " + subset_label(a, t.n));
        const Operator& v = it->second;
        if (v.rows() != c.dim || v.cols() != c.dim)
            throw DimensionMismatch("verify_equivalence_witness: witness has the wrong shape");

        WanderingData w = wandering_data(t, dec, a, tol);
        WanderingData wt = wandering_data(tt, dec_t, a, tol);
        auto pairs = intertwining_pairs(w, wt, true);
        const size_t ng = w.gram_ops.size();
        const size_t nt = ng + w.restricted_ops.size();
        c.unitarity = opnorm(v.adjoint() * v - identity(c.dim));
        c.gram = max_intertwining(v, pairs, 0, ng);
        c.tails = max_intertwining(v, pairs, ng, nt);
        c.twists = max_intertwining(v, pairs, nt, pairs.size());
        c.ok = std::max({c.unitarity, c.gram, c.tails, c.twists}) <= tol.residual_abs;
        rep.witness_ok = rep.witness_ok && c.ok;
        rep.per_summand.push_back(c);

        std::vector<int> members = subset_members(a, t.n);
        auto y = power_images(t, members, depth, q.basis);
        auto yt = power_images(tt, members, depth, qt.basis);
        // U_A = sum_k Λ~_k V Λ_k^*, as one product of the stacked isometries.
        const Eigen::Index dd = c.dim;
        const Eigen::Index width = static_cast<Eigen::Index>(y.size()) * dd;
        Eigen::MatrixXcd lam(t.dim(), width), lam_tv(tt.dim(), width);
        for (size_t k = 0; k < y.size(); ++k) {
            const Eigen::Index off = static_cast<Eigen::Index>(k) * dd;
            lam.middleCols(off, dd) = k == 0 ? q.basis : polar_relative(y[k], tol);
            lam_tv.middleCols(off, dd) = (k == 0 ? qt.basis : polar_relative(yt[k], tol)) * v;
        }
        rep.u += lam_tv * lam.adjoint();
    }

    if (!rep.dims_match) return rep;
    Eigen::MatrixXcd uq = rep.u * interior.basis;
    rep.isometry = opnorm(uq.adjoint() * uq - identity(interior.dim()));
    for (int s = 1; s <= t.n; ++s)
        rep.intertwining = std::max(rep.intertwining, opnorm(rep.u * (t.op(s) * interior.basis) - tt.op(s) * uq));
    for (int i = 1; i <= t.n; ++i)
        for (int j = i + 1; j <= t.n; ++j)
            rep.twist_residual = std::max(
                rep.twist_residual, opnorm(rep.u * (t.twist(i, j) * interior.basis) - tt.twist(i, j) * uq));
    // U should also land in the other interior.
    double landing = containment_residual(numerical_range(uq, tol), interior_t);
    rep.pass = rep.witness_ok && rep.intertwining <= tol.residual_abs && rep.isometry <= tol.residual_abs &&
               rep.twist_residual <= tol.residual_abs && landing <= std::sqrt(tol.residual_abs);
    return rep;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Equivalent: return "equivalent";
        case Verdict::NotEquivalent: return "not-equivalent";
        case Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

WanderingEquivalence check_wandering_data_equiv(const TwistedTuple& t, const DecompositionResult& dec,
                                                const TwistedTuple& tt, const DecompositionResult& dec_t,
                                                const Tolerances& tol) {
    if (t.n != tt.n) throw DimensionMismatch("check_wandering_data_equiv: tuples have different sizes");
    if (dec.depth != dec_t.depth) throw PreconditionViolated("check_wandering_data_equiv: decomposition depths differ");
    WanderingEquivalence out;
    bool all_eq = true;
    bool any_neg = false;
    for (const auto& [a, s] : dec.summands) {
        SummandEquivalence r;
        r.a = a;
        const Eigen::Index d = s.d_interior.dim();
        const Eigen::Index dt = summand_space(dec_t, a).dim();
        if (d != dt) {
            r.verdict = Verdict::NotEquivalent;
            r.best_residual = std::numeric_limits<double>::infinity();
        } else if (d == 0) {
            r.verdict = Verdict::Equivalent;
        } else {
            auto pairs = intertwining_pairs(wandering_data(t, dec, a, tol), wandering_data(tt, dec_t, a, tol), false);
            if (d == 1) {
                // Scalars commute with everything, so the phase of V is irrelevant.
                r.witness = identity(1);
                r.best_residual = frobenius_objective(r.witness, pairs);
            } else if (d == 2) {
                // A global phase cancels in V X V^*, so SU(2) suffices.
                constexpr double pi = std::numbers::pi;
                const int nt = 32, na = 64;
                std::vector<std::pair<double, std::array<double, 3>>> starts;
                for (int i = 0; i <= nt; ++i)
                    for (int j = 0; j < na; ++j)
                        for (int k = 0; k < na; ++k) {
                            std::array<double, 3> x{pi / 2 * i / nt, 2 * pi * j / na, 2 * pi * k / na};
                            starts.emplace_back(frobenius_objective(su2(x[0], x[1], x[2]), pairs), x);
                        }
                const size_t keep = std::min<size_t>(8, starts.size());
                std::partial_sort(starts.begin(), starts.begin() + static_cast<long>(keep), starts.end(),
                                  [](const auto& l, const auto& rr) { return l.first < rr.first; });
                r.best_residual = std::numeric_limits<double>::infinity();
                for (size_t st = 0; st < keep; ++st) {
                    auto [f, x] = starts[st];
                    double step = 2 * pi / na;
                    while (step > 1e-14) {
                        bool moved = false;
                        for (int c = 0; c < 3; ++c)
                            for (double sign : {1.0, -1.0}) {
                                auto y = x;
                                y[c] += sign * step;
                                double fy = frobenius_objective(su2(y[0], y[1], y[2]), pairs);
                                if (fy < f) {
                                    f = fy;
                                    x = y;
                                    moved = true;
                                }
                            }
                        if (!moved) step *= 0.5;
                    }
                    if (f < r.best_residual) {
                        r.best_residual = f;
                        r.witness = su2(x[0], x[1], x[2]);
                    }
                }
            } else {
                r.best_residual = least_squares_residual(pairs, d);
            }
            if (d <= 2)
                r.verdict = r.best_residual <= tol.residual_abs ? Verdict::Equivalent : Verdict::NotEquivalent;
            else
                r.verdict = r.best_residual > tol.residual_abs ? Verdict::NotEquivalent : Verdict::Undecided;
        }
        all_eq = all_eq && r.verdict == Verdict::Equivalent;
        any_neg = any_neg || r.verdict == Verdict::NotEquivalent;
        out.per_summand.push_back(r);
    }
    out.verdict = any_neg ? Verdict::NotEquivalent : (all_eq ? Verdict::Equivalent : Verdict::Undecided);
    return out;
}

MultishiftModel analytic_model_multi(const TwistedTuple& t, const DecompositionResult& dec, const Subspace& interior,
                                     const Tolerances& tol) {
    if (!dec.pass) throw DecompositionIncomplete("analytic_model_multi: the decomposition did not pass");
    if (dec.depth < 1) throw PreconditionViolated("analytic_model_multi: depth must be at least 1");
    MultishiftModel m;
    m.lower_bound_c = std::numeric_limits<double>::infinity();
    const int cap = dec.depth;
    Eigen::Index total = 0;

    for (const auto& [a, s] : dec.summands) {
        if (s.d_interior.empty()) continue;
        ModelBlock b;
        b.a = a;
        b.members = subset_members(a, t.n);
        b.cap = cap;
        b.wandering = s.d_interior;
        const int r = static_cast<int>(b.members.size());
        const Eigen::Index dd = b.wandering.dim();
        b.ks = multi_index_box(r, cap);
        auto y = power_images(t, b.members, cap, b.wandering.basis);
        for (size_t k = 0; k < y.size(); ++k)
            b.lambdas.push_back(k == 0 ? b.wandering.basis : polar_relative(y[k], tol));

        const Eigen::Index md = static_cast<Eigen::Index>(b.ks.size()) * dd;
        b.intertwiner = Operator(md, t.dim());
        for (size_t k = 0; k < b.ks.size(); ++k)
            b.intertwiner.middleRows(static_cast<Eigen::Index>(k) * dd, dd) = b.lambdas[k].adjoint();

        b.lower_bound = std::numeric_limits<double>::infinity();
        b.gamma.assign(b.ks.size(), std::vector<Operator>(static_cast<size_t>(t.n)));
        b.model_ops.assign(static_cast<size_t>(t.n), Operator::Zero(md, md));
        std::vector<Eigen::Index> interior_cols;
        for (size_t idx = 0; idx < b.ks.size(); ++idx) {
            const MultiIndex& k = b.ks[idx];
            const bool inner = std::all_of(k.begin(), k.end(), [&](int e) { return e < cap; });
            if (inner)
                for (Eigen::Index c = 0; c < dd; ++c) interior_cols.push_back(static_cast<Eigen::Index>(idx) * dd + c);
            for (int sidx = 1; sidx <= t.n; ++sidx) {
                auto pos = std::find(b.members.begin(), b.members.end(), sidx);
                size_t target = idx;
                if (pos != b.members.end()) {
                    int i = static_cast<int>(pos - b.members.begin());
                    if (k[i] == cap) continue;
                    MultiIndex kn = k;
                    ++kn[i];
                    target = static_cast<size_t>(multi_index_position(kn, cap));
                }
                Operator g = b.lambdas[target].adjoint() * t.op(sidx) * b.lambdas[idx];
                if (inner) {
                    Eigen::VectorXd sv = singular_values(g);
                    b.lower_bound = std::min(b.lower_bound, sv.minCoeff());
                    b.upper_bound = std::max(b.upper_bound, sv.maxCoeff());
                }
                b.model_ops[sidx - 1].block(static_cast<Eigen::Index>(target) * dd, static_cast<Eigen::Index>(idx) * dd,
                                            dd, dd) = g;
                b.gamma[idx][sidx - 1] = std::move(g);
            }
        }
        for (int sidx = 1; sidx <= t.n; ++sidx) {
            Operator diff = b.intertwiner * t.op(sidx) * b.intertwiner.adjoint() - b.model_ops[sidx - 1];
            Eigen::MatrixXcd cols(md, static_cast<Eigen::Index>(interior_cols.size()));
            for (size_t c = 0; c < interior_cols.size(); ++c)
                cols.col(static_cast<Eigen::Index>(c)) = diff.col(interior_cols[c]);
            b.conjugation_residual = std::max(b.conjugation_residual, opnorm(cols));
        }
        m.conjugation_residual = std::max(m.conjugation_residual, b.conjugation_residual);
        m.lower_bound_c = std::min(m.lower_bound_c, b.lower_bound);
        m.upper_bound = std::max(m.upper_bound, b.upper_bound);
        total += md;
        m.blocks.push_back(std::move(b));
    }

    m.intertwiner = Operator::Zero(total, t.dim());
    Eigen::Index off = 0;
    for (const ModelBlock& b : m.blocks) {
        m.intertwiner.middleRows(off, b.intertwiner.rows()) = b.intertwiner;
        off += b.intertwiner.rows();
    }
    Eigen::MatrixXcd uq = m.intertwiner * interior.basis;
    for (int sidx = 1; sidx <= t.n; ++sidx) {
        Eigen::MatrixXcd mu = Eigen::MatrixXcd::Zero(total, uq.cols());
        off = 0;
        for (const ModelBlock& b : m.blocks) {
            const Eigen::Index md = b.intertwiner.rows();
            mu.middleRows(off, md) = b.model_ops[sidx - 1] * uq.middleRows(off, md);
            off += md;
        }
        m.round_trip = std::max(m.round_trip, opnorm(m.intertwiner.adjoint() * mu - t.op(sidx) * interior.basis));
    }
    if (m.blocks.empty()) m.lower_bound_c = 0.0;
    m.pass = !m.blocks.empty() && m.conjugation_residual <= tol.residual_abs && m.round_trip <= tol.residual_abs &&
             m.lower_bound_c >= tol.lower_bound_min;
    return m;
}

}  // namespace woldlab
