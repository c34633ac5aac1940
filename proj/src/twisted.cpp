#include "woldlab/twisted.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace woldlab {

std::vector<int> subset_members(SubsetIndex a, int n) {
    std::vector<int> out;
    for (int i = 1; i <= n; ++i)
        if (a & (1u << (i - 1))) out.push_back(i);
    return out;
}

std::string subset_label(SubsetIndex a, int n) {
    std::ostringstream s;
    s << "{";
    bool first = true;
    for (int i : subset_members(a, n)) {
        s << (first ? "" : ",") << i;
        first = false;
    }
    s << "}";
    return s.str();
}

Operator TwistedTuple::twist(int i, int j) const {
    if (i < 1 || j < 1 || i > n || j > n) throw IndexOutOfRange("twist index out of range");
    if (i == j) return identity(dim());
    if (i > j) return twist(j, i).adjoint();
    auto it = twists.find({i, j});
    return it == twists.end() ? identity(dim()) : it->second;
}

void TwistedTuple::validate(const Tolerances& tol) const {
    if (n < 1 || n > kMaxTupleSize) throw PreconditionViolated("tuple size must lie in [1, 16]");
    if (static_cast<int>(ops.size()) != n) throw DimensionMismatch("tuple: operator count differs from n");
    const auto d = dim();
    for (const auto& t : ops)
        if (t.rows() != d || t.cols() != d) throw DimensionMismatch("tuple: operators must share one square shape");
    for (const auto& [key, u] : twists) {
        if (key.first < 1 || key.second > n || key.first >= key.second)
            throw IndexOutOfRange("tuple: twist keys must satisfy 1 <= i < j <= n");
        if (u.rows() != d || u.cols() != d) throw DimensionMismatch("tuple: twist has the wrong shape");
        if (!is_unitary(u, tol.residual_abs))
            throw NotUnitary("tuple: twist U_" + std::to_string(key.first) + std::to_string(key.second) +
                             " is not unitary");
    }
    for (auto a = twists.begin(); a != twists.end(); ++a)
        for (auto b = std::next(a); b != twists.end(); ++b)
            if (opnorm(a->second * b->second - b->second * a->second) > tol.residual_abs)
                throw PreconditionViolated("tuple: twists do not commute");
}

namespace {

std::string pair_label(int i, int j) { return std::to_string(i) + "," + std::to_string(j); }

void track(double value, const std::string& label, double& best, std::string& where) {
    if (where.empty() || value > best) {
        best = value;
        where = label;
    }
}

}  // namespace

TwistedReport verify_twisted(const TwistedTuple& t, const Subspace& interior, int depth, const Tolerances& tol) {
    t.validate(tol);
    if (interior.ambient_dim() != t.dim()) throw DimensionMismatch("verify_twisted: interior has wrong ambient");
    const Eigen::MatrixXcd& q = interior.basis;
    const int n = t.n;
    std::vector<Eigen::MatrixXcd> tq(n), tsq(n);
    for (int k = 1; k <= n; ++k) {
        tq[k - 1] = t.op(k) * q;
        tsq[k - 1] = t.op(k).adjoint() * q;
    }
    TwistedReport rep;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (i == j) continue;
            Operator u = t.twist(i, j);
            double r1 = opnorm(t.op(i).adjoint() * tq[j - 1] - u.adjoint() * (t.op(j) * tsq[i - 1]));
            track(r1, pair_label(i, j), rep.res_i, rep.worst_i);
            double r3 = opnorm(t.op(i) * tq[j - 1] - u * (t.op(j) * tq[i - 1]));
            track(r3, pair_label(i, j), rep.res_iii, rep.worst_iii);
        }
    for (int k = 1; k <= n; ++k)
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) {
                Operator u = t.twist(i, j);
                double r2 = opnorm(t.op(k) * (u * q) - u * tq[k - 1]);
                track(r2, std::to_string(k) + ";" + pair_label(i, j), rep.res_ii, rep.worst_ii);
            }
    rep.relations_ok = rep.res_i <= tol.residual_abs && rep.res_ii <= tol.residual_abs && rep.res_iii <= tol.residual_abs;
    rep.pass = rep.relations_ok;
    for (int k = 1; k <= n; ++k) {
        rep.per_op.push_back(check_near_isometry(t.op(k), interior, depth, tol));
        rep.pass = rep.pass && rep.per_op.back().pass;
    }
    return rep;
}

TwistedTuple construct_twisted(const TwistedConstruction& c, const Tolerances& tol) {
    if (c.p < 1 || c.m < 1 || c.n < c.m || c.n > kMaxTupleSize)
        throw PreconditionViolated("construct_twisted: need 1 <= m <= n <= 16 and p >= 1");
    if (static_cast<int>(c.tails.size()) != c.n - c.m)
        throw PreconditionViolated("construct_twisted: expected n - m tail operators");
    SpaceDescriptor space = c.space();
    space.validate();
    const int p = c.p;

    TwistedTuple coeff;
    coeff.n = c.n;
    for (int i = 1; i <= c.n; ++i) coeff.ops.push_back(i <= c.m ? identity(p) : c.tails[i - c.m - 1]);
    coeff.twists = c.twists;
    for (const auto& [key, u] : c.twists) {
        if (u.rows() != p || u.cols() != p)
            throw PreconditionViolated("construct_twisted: twist U_" + pair_label(key.first, key.second) +
                                       " must act on the coefficient space");
        if (!is_unitary(u, tol.residual_abs))
            throw PreconditionViolated("construct_twisted: twist U_" + pair_label(key.first, key.second) +
                                       " is not unitary");
    }
    try {
        coeff.validate(tol);
    } catch (const Error& e) {
        throw PreconditionViolated(std::string("construct_twisted: ") + e.what());
    }
    // Tail relations on the coefficient space.
    for (int i = c.m + 1; i <= c.n; ++i) {
        const Operator& ti = coeff.op(i);
        NearIsometryReport ni = check_near_isometry(ti, Subspace::full(p), p, tol);
        if (!ni.pass) throw PreconditionViolated("construct_twisted: tail T_" + std::to_string(i) + " is not a near-isometry");
        for (int j = c.m + 1; j <= c.n; ++j) {
            if (i == j) continue;
            const Operator& tj = coeff.op(j);
            Operator u = coeff.twist(i, j);
            if (opnorm(ti * tj - u * tj * ti) > tol.residual_abs)
                throw PreconditionViolated("construct_twisted: T_iT_j = U_ijT_jT_i fails for (i,j) = (" +
                                           pair_label(i, j) + ")");
            if (opnorm(ti.adjoint() * tj - u.adjoint() * tj * ti.adjoint()) > tol.residual_abs)
                throw PreconditionViolated("construct_twisted: T_i*T_j = U_ij*T_jT_i* fails for (i,j) = (" +
                                           pair_label(i, j) + ")");
        }
        for (const auto& [key, u] : c.twists)
            if (opnorm(ti * u - u * ti) > tol.residual_abs)
                throw PreconditionViolated("construct_twisted: T_" + std::to_string(i) + " does not commute with U_" +
                                           pair_label(key.first, key.second));
    }

    const Eigen::Index blocks = space.dimension() / p;
    TwistedTuple out;
    out.n = c.n;
    for (int i = 1; i <= c.n; ++i) {
        Operator mi = i <= c.m ? mult_op(space, i) : identity(space.dimension());
        const int upto = i <= c.m ? i - 1 : c.m;
        for (int j = 1; j <= upto; ++j) mi = mi * diag_twist(space, j, coeff.twist(i, j), tol);
        if (i > c.m) mi = mi * tensor_lift(identity(blocks), coeff.op(i));
        out.ops.push_back(std::move(mi));
    }
    for (const auto& [key, u] : c.twists) out.twists[key] = tensor_lift(identity(blocks), u);
    return out;
}

namespace {

constexpr int kChunk = 4;

// Image of s under T_{q_1}^L ... T_{q_r}^L, applied in chunks of kChunk powers.
Subspace complementary_image(const TwistedTuple& t, const std::vector<int>& qs, int depth, const Subspace& s,
                             const Tolerances& tol) {
    if (qs.empty() || s.empty() || depth == 0) return s;
    Subspace cur = s;
    int done = 0;
    while (done < depth) {
        int step = std::min(kChunk, depth - done);
        Eigen::MatrixXcd y = cur.basis;
        for (auto q = qs.rbegin(); q != qs.rend(); ++q)
            for (int e = 0; e < step; ++e) y = kernels::gemm(t.op(*q), y, kernels::Exec::Serial);
        cur = numerical_range(y, tol);
        done += step;
        if (cur.empty()) break;
    }
    return cur;
}

std::vector<Subspace> adjoint_kernels(const TwistedTuple& t, const Tolerances& tol, kernels::Exec exec) {
    std::vector<Subspace> kers(t.n);
    kernels::for_each_index(t.n, exec, [&](long i) { kers[i] = kernel_of_adjoint(t.ops[i], tol); });
    return kers;
}

Subspace joint_kernel(const std::vector<Subspace>& kers, SubsetIndex a, int n, Eigen::Index d, const Tolerances& tol) {
    std::vector<Subspace> parts;
    for (int i : subset_members(a, n)) parts.push_back(kers[i - 1]);
    if (parts.empty()) return Subspace::full(d);
    return intersect(parts, tol);
}

std::vector<int> complement_members(SubsetIndex a, int n) {
    std::vector<int> out;
    for (int i = 1; i <= n; ++i)
        if (!(a & (1u << (i - 1)))) out.push_back(i);
    return out;
}

// {x in s : P x = x} for an orthogonal projection p.
Subspace fixed_part(const Operator& p, const Subspace& s, const Tolerances& tol) {
    if (s.empty()) return s;
    Eigen::MatrixXcd c = s.basis.adjoint() * (p * s.basis);
    c = (c + c.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
        if (es.eigenvalues()(i) >= 1.0 - std::sqrt(tol.rank_rel)) keep.push_back(i);
    Eigen::MatrixXcd v(c.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    return numerical_range(s.basis * v, tol);
}

}  // namespace

std::vector<MultiIndex> multi_index_box(int r, int depth) {
    std::vector<MultiIndex> out;
    MultiIndex k(r, 0);
    while (true) {
        out.push_back(k);
        int pos = r - 1;
        while (pos >= 0 && k[pos] == depth) {
            k[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++k[pos];
    }
    return out;
}

long multi_index_position(const MultiIndex& k, int depth) {
    long idx = 0;
    for (int e : k) idx = idx * (depth + 1) + e;
    return idx;
}

std::vector<Eigen::MatrixXcd> power_images(const TwistedTuple& t, const std::vector<int>& members, int depth,
                                           const Eigen::MatrixXcd& x) {
    const int r = static_cast<int>(members.size());
    std::vector<MultiIndex> ks = multi_index_box(r, depth);
    std::vector<Eigen::MatrixXcd> imgs(ks.size());
    for (size_t idx = 0; idx < ks.size(); ++idx) {
        const MultiIndex& k = ks[idx];
        int lead = -1;
        for (int c = 0; c < r; ++c)
            if (k[c] > 0) {
                lead = c;
                break;
            }
        if (lead < 0) {
            imgs[idx] = x;
            continue;
        }
        MultiIndex prev = k;
        --prev[lead];
        imgs[idx] = kernels::gemm(t.op(members[lead]), imgs[multi_index_position(prev, depth)], kernels::Exec::Serial);
    }
    return imgs;
}

namespace {

double directional_wandering_residual(const std::vector<Subspace>& blocks, int r, int depth, int dir) {
    std::vector<MultiIndex> ks = multi_index_box(r, depth);
    double worst = 0.0;
    for (size_t a = 0; a < ks.size(); ++a)
        for (int step = 1; ks[a][dir] + step <= depth; ++step) {
            MultiIndex b = ks[a];
            b[dir] += step;
            worst = std::max(worst, principal_cosine(blocks[a], blocks[multi_index_position(b, depth)]));
        }
    return worst;
}

void invertible_roles(const TwistedTuple& t, Summand& s, const Tolerances& tol) {
    for (int i : complement_members(s.a, t.n)) {
        RoleVerdict v;
        v.op = i;
        v.member = false;
        double lb = sigma_min_on(t.op(i), s.h_interior);
        v.residual = std::isfinite(lb) ? lb : 0.0;
        v.invertible = !std::isfinite(lb) || lb >= tol.lower_bound_min;
        v.ok = v.invertible;
        s.roles.push_back(v);
    }
}

void finish(DecompositionResult& res, const Subspace& interior, const Tolerances& tol) {
    std::vector<Subspace> parts;
    res.roles_ok = true;
    for (auto& [a, s] : res.summands) {
        parts.push_back(s.h_interior);
        for (const auto& v : s.roles) res.roles_ok = res.roles_ok && v.ok;
    }
    res.completeness = orthogonal_direct_sum_check(parts, interior, tol);
    res.pass = res.completeness.pass && res.roles_ok;
}

// Returns ker T_i^* for every i, reusing the near-isometry checks when they ran.
std::vector<Subspace> require_twisted(const TwistedTuple& t, const Subspace& interior, const Tolerances& tol,
                                     const DecompositionOptions& opts) {
    if (!opts.require_twisted) {
        if (static_cast<int>(opts.adjoint_kernels.size()) == t.n) return opts.adjoint_kernels;
        return adjoint_kernels(t, tol, opts.exec);
    }
    TwistedReport rep = verify_twisted(t, interior, opts.check_depth, tol);
    if (!rep.pass) {
        std::ostringstream msg;
        msg << "tuple is not a doubly twisted near-isometry (res_i=" << rep.res_i << ", res_ii=" << rep.res_ii
            << ", res_iii=" << rep.res_iii << ")";
        throw NotTwisted(msg.str());
    }
    std::vector<Subspace> kers;
    for (auto& r : rep.per_op) kers.push_back(std::move(r.wandering));
    return kers;
}

}  // namespace

WanderingPair wandering_subspaces(const TwistedTuple& t, SubsetIndex a, int depth, const Tolerances& tol) {
    t.validate(tol);
    std::vector<Subspace> kers = adjoint_kernels(t, tol, kernels::Exec::Serial);
    WanderingPair wp;
    wp.w = joint_kernel(kers, a, t.n, t.dim(), tol);
    wp.d = complementary_image(t, complement_members(a, t.n), depth, wp.w, tol);
    return wp;
}

Operator DecompositionResult::summand_projector(SubsetIndex a) const {
    const Summand& s = summands.at(a);
    if (s.projector.size() > 0) return s.projector;
    return s.h.projector();
}

DecompositionResult wold_multi_induction(const TwistedTuple& t, const Subspace& interior, int depth,
                                         const Tolerances& tol, const DecompositionOptions& opts) {
    t.validate(tol);
    if (interior.ambient_dim() != t.dim()) throw DimensionMismatch("wold_multi_induction: interior has wrong ambient");
    const int n = t.n;
    std::vector<Subspace> kers = require_twisted(t, interior, tol, opts);
    const long count = 1L << n;
    std::vector<Summand> out(count);

    kernels::for_each_index(count, opts.exec, [&](long ai) {
        Summand& s = out[ai];
        s.a = static_cast<SubsetIndex>(ai);
        std::vector<int> members = subset_members(s.a, n);
        s.w = joint_kernel(kers, s.a, n, t.dim(), tol);
        s.d = complementary_image(t, complement_members(s.a, n), depth + 1, s.w, tol);
        s.d_interior = s.d.empty() ? s.d : intersect({s.d, interior}, tol);
        const int r = static_cast<int>(members.size());
        if (s.d.empty()) {
            s.h = s.d;
        } else if (r == 0) {
            s.h = s.d;
        } else {
            std::vector<Eigen::MatrixXcd> imgs = power_images(t, members, depth, s.d.basis);
            std::vector<Subspace> blocks;
            blocks.reserve(imgs.size());
            for (const auto& y : imgs) blocks.push_back(numerical_range(y, tol));
            s.h = sum_of(blocks, tol);
            for (int c = 0; c < r; ++c) {
                RoleVerdict v;
                v.op = members[c];
                v.member = true;
                v.residual = directional_wandering_residual(blocks, r, depth, c);
                v.shift = v.residual <= tol.residual_abs;
                v.ok = v.shift;
                s.roles.push_back(v);
            }
        }
        if (s.d.empty())
            for (int i : members) s.roles.push_back(RoleVerdict{i, true, true, false, 0.0, true});
        s.h_interior = s.h.empty() ? s.h : intersect({s.h, interior}, tol);
        invertible_roles(t, s, tol);
    });

    DecompositionResult res;
    res.n = n;
    res.depth = depth;
    for (auto& s : out) res.summands.emplace(s.a, std::move(s));
    finish(res, interior, tol);
    return res;
}

DecompositionResult wold_multi_projection(const TwistedTuple& t, const Subspace& interior, int depth,
                                          const Tolerances& tol, const DecompositionOptions& opts) {
    t.validate(tol);
    if (interior.ambient_dim() != t.dim()) throw DimensionMismatch("wold_multi_projection: interior has wrong ambient");
    if (opts.require_twisted) require_twisted(t, interior, tol, opts);
    const int n = t.n;
    std::vector<WoldSplit> splits(n);
    kernels::for_each_index(n, opts.exec, [&](long i) { splits[i] = wold_projection_route(t.ops[i], interior, depth, tol); });

    DecompositionResult res;
    res.n = n;
    res.depth = depth;
    const Eigen::MatrixXcd& q = interior.basis;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            const Operator& pi = splits[i - 1].p_shift;
            const Operator& pj = splits[j - 1].p_shift;
            double c = opnorm(pi * (pj * q) - pj * (pi * q));
            if (c > res.commutation_residual || res.commutation_pair.empty()) {
                res.commutation_residual = std::max(res.commutation_residual, c);
                res.commutation_pair = pair_label(i, j);
            }
        }
    if (opts.require_twisted && res.commutation_residual > tol.residual_abs)
        throw NonCommutingProjections("shift projections of operators (" + res.commutation_pair +
                                      ") do not commute on the interior");

    const long count = 1L << n;
    std::vector<Summand> out(count);
    kernels::for_each_index(count, opts.exec, [&](long ai) {
        Summand& s = out[ai];
        s.a = static_cast<SubsetIndex>(ai);
        std::vector<int> members = subset_members(s.a, n);
        Operator p = identity(t.dim());
        for (int i : complement_members(s.a, n)) p = p * splits[i - 1].p_invertible;
        for (int k : members) p = p * splits[k - 1].p_shift;
        s.projector = (p + p.adjoint()) * 0.5;
        s.h = fixed_part(s.projector, Subspace::full(t.dim()), tol);
        s.h_interior = fixed_part(s.projector, interior, tol);
        std::vector<Subspace> ws;
        for (int k : members) ws.push_back(splits[k - 1].wandering);
        s.w = ws.empty() ? Subspace::full(t.dim()) : intersect(ws, tol);
        s.d = ws.empty() ? s.h : fixed_part(s.projector, s.w, tol);
        s.d_interior = s.d.empty() ? s.d : intersect({s.d, interior}, tol);
        for (int k : members) {
            RoleVerdict v;
            v.op = k;
            v.member = true;
            // Wandering subspace of T_k on H_A, pushed forward level by level.
            Subspace e = fixed_part(s.projector, splits[k - 1].wandering, tol);
            std::vector<Eigen::MatrixXcd> levels{e.basis};
            Subspace cur = e;
            for (int a = 1; a <= depth && !cur.empty(); ++a) {
                cur = apply_to_subspace(t.op(k), cur, tol);
                levels.push_back(cur.basis);
            }
            v.residual = kernels::max_pairwise_cosine(levels, kernels::Exec::Serial);
            v.shift = v.residual <= tol.residual_abs;
            v.ok = v.shift;
            s.roles.push_back(v);
        }
        invertible_roles(t, s, tol);
    });
    for (auto& s : out) res.summands.emplace(s.a, std::move(s));
    finish(res, interior, tol);
    return res;
}

double route_agreement(const DecompositionResult& x, const DecompositionResult& y, const Subspace& interior) {
    double worst = 0.0;
    const Eigen::MatrixXcd& q = interior.basis;
    auto apply = [&](const Summand& s) -> Eigen::MatrixXcd {
        if (s.projector.size() > 0) return s.projector * q;
        if (s.h.empty()) return Eigen::MatrixXcd::Zero(q.rows(), q.cols());
        return s.h.basis * (s.h.basis.adjoint() * q);
    };
    for (const auto& [a, sx] : x.summands) {
        auto it = y.summands.find(a);
        if (it == y.summands.end()) return 1.0;
        worst = std::max(worst, opnorm(apply(sx) - apply(it->second)));
    }
    return worst;
}

std::vector<WoldSplit> per_operator_splits(const TwistedTuple& t, const Subspace& interior, int depth,
                                           const Tolerances& tol) {
    std::vector<WoldSplit> out(t.n);
    kernels::for_each_index(t.n, kernels::default_exec(),
                            [&](long i) { out[i] = wold_single(t.ops[i], interior, depth, tol); });
    return out;
}

ReducingReport check_reducing_conditions(const TwistedTuple& t, const std::vector<WoldSplit>& splits,
                                         const Subspace& interior, const Tolerances& tol) {
    if (static_cast<int>(splits.size()) != t.n) throw DimensionMismatch("check_reducing_conditions: one split per operator");
    ReducingReport rep;
    rep.residuals = Eigen::MatrixXd::Zero(t.n, t.n);
    const Eigen::MatrixXcd& q = interior.basis;
    for (int i = 1; i <= t.n; ++i)
        for (int k = 1; k <= t.n; ++k) {
            const Operator& p = splits[i - 1].p_shift;
            const Operator& tk = t.op(k);
            double r = opnorm(p * (tk * q) - tk * (p * q));
            rep.residuals(i - 1, k - 1) = r;
            if (r > tol.residual_abs) rep.failing.emplace_back(i, k);
        }
    rep.pass = rep.failing.empty();
    return rep;
}

Operator pseudo_inverse(const Operator& t, const Tolerances& tol) {
    if (t.size() == 0) return Operator::Zero(t.cols(), t.rows());
    Svd f = svd(t, SvdVectors::Thin);
    const Eigen::VectorXd& s = f.s;
    Eigen::Index r = 0;
    if (s.size() > 0 && s(0) > 0.0)
        while (r < s.size() && s(r) > tol.rank_rel * s(0)) ++r;
    return f.v.leftCols(r) * s.head(r).cwiseInverse().asDiagonal() * f.u.leftCols(r).adjoint();
}

double LemmaReport::worst() const {
    return std::max({sharp_twist_commute, twist_recovery, range_projections, kernel_intersection, wandering_step,
                     reducing_gram});
}

namespace {

// ||[P_a, P_b] Q||. Swapping a projection for its complement only flips the sign of
// the commutator, so the smaller basis of each split is used.
double projection_commutator(const RangeSplit& a, const RangeSplit& b, const Eigen::MatrixXcd& q) {
    auto smaller = [](const RangeSplit& s) -> const Eigen::MatrixXcd& {
        return s.range.dim() <= s.complement.dim() ? s.range.basis : s.complement.basis;
    };
    const Eigen::MatrixXcd& x = smaller(a);
    const Eigen::MatrixXcd& y = smaller(b);
    if (x.cols() == 0 || y.cols() == 0) return 0.0;
    Eigen::MatrixXcd m = x.adjoint() * y;
    Eigen::MatrixXcd xy = x * (m * (y.adjoint() * q));
    Eigen::MatrixXcd yx = y * (m.adjoint() * (x.adjoint() * q));
    return opnorm(xy - yx);
}

}  // namespace

LemmaReport lemma_suite(const TwistedTuple& t, const Subspace& interior, int depth, const Tolerances& tol,
                        int decomposition_depth) {
    t.validate(tol);
    if (interior.ambient_dim() != t.dim()) throw DimensionMismatch("lemma_suite: interior has wrong ambient");
    const int n = t.n;
    const Eigen::Index d = t.dim();
    const Eigen::MatrixXcd& q = interior.basis;
    const auto exec = kernels::default_exec();
    if (decomposition_depth < 0) decomposition_depth = depth;
    LemmaReport rep;

    std::vector<Operator> sharp(n);
    kernels::for_each_index(n, exec, [&](long i) { sharp[i] = pseudo_inverse(t.ops[i], tol); });

    // (a) and (b)
    for (int k = 1; k <= n; ++k)
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) {
                Operator u = t.twist(i, j);
                rep.sharp_twist_commute = std::max(
                    rep.sharp_twist_commute, opnorm(sharp[k - 1] * (u * q) - u * (sharp[k - 1] * q)));
            }
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (i == j) continue;
            Eigen::MatrixXcd x = sharp[i - 1] * (sharp[j - 1] * (t.op(i) * (t.op(j) * q)));
            rep.twist_recovery = std::max(rep.twist_recovery, opnorm(t.twist(i, j) * q - x));
        }

    // (c) range projections of powers commute
    std::vector<std::vector<RangeSplit>> ranges(n);
    kernels::for_each_index(n, exec, [&](long i) {
        Eigen::MatrixXcd cur = t.ops[i];
        for (int k = 1; k <= depth; ++k) {
            ranges[i].push_back(range_split(cur, tol));
            if (k < depth) cur = kernels::gemm(t.ops[i], ranges[i].back().range.basis, kernels::Exec::Serial);
        }
    });
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < depth; ++k)
                for (int l = 0; l < depth; ++l)
                    rep.range_projections =
                        std::max(rep.range_projections, projection_commutator(ranges[i][k], ranges[j][l], q));

    // (d) kernel intersection lemma
    std::vector<Subspace> kers = adjoint_kernels(t, tol, exec);
    std::vector<std::vector<Subspace>> kerpow(n);
    for (int i = 0; i < n; ++i) {
        kerpow[i].push_back(kers[i]);
        for (int k = 1; k <= depth; ++k) kerpow[i].push_back(apply_to_subspace(t.ops[i], kerpow[i].back(), tol));
    }
    {
        const SubsetIndex all = (n >= 32) ? ~0u : ((1u << n) - 1u);
        Subspace w = joint_kernel(kers, all, n, d, tol);
        std::vector<MultiIndex> ks = multi_index_box(n, depth);
        std::vector<Subspace> rhs(ks.size());
        std::vector<int> everyone(n);
        for (int i = 0; i < n; ++i) everyone[i] = i + 1;
        for (size_t idx = 0; idx < ks.size(); ++idx) {
            const MultiIndex& k = ks[idx];
            int lead = -1;
            for (int c = 0; c < n; ++c)
                if (k[c] > 0) {
                    lead = c;
                    break;
                }
            if (lead < 0) {
                rhs[idx] = w;
            } else {
                MultiIndex prev = k;
                --prev[lead];
                rhs[idx] = apply_to_subspace(t.ops[lead], rhs[multi_index_position(prev, depth)], tol);
            }
            std::vector<Subspace> parts;
            for (int c = 0; c < n; ++c) parts.push_back(kerpow[c][k[c]]);
            Subspace lhs = intersect(parts, tol);
            double r = (lhs.empty() && rhs[idx].empty()) ? 0.0 : subspace_distance(lhs, rhs[idx]);
            rep.kernel_intersection = std::max(rep.kernel_intersection, r);
        }
    }

    // (e) W_A ⊖ T_j W_A = W_{A ∪ {j}}
    const long count = 1L << n;
    std::vector<Subspace> ws(count);
    for (long a = 0; a < count; ++a) ws[a] = joint_kernel(kers, static_cast<SubsetIndex>(a), n, d, tol);
    for (long a = 0; a < count; ++a)
        for (int j = 1; j <= n; ++j) {
            if (a & (1L << (j - 1))) continue;
            Subspace img = apply_to_subspace(t.op(j), ws[a], tol);
            Subspace diff = complement_in(img, ws[a], tol);
            const Subspace& target = ws[a | (1L << (j - 1))];
            double r = (diff.empty() && target.empty()) ? 0.0 : subspace_distance(diff, target);
            rep.wandering_step = std::max(rep.wandering_step, r);
        }

    // (f) T_A^{*k} T_A^k D_A = D_A on the interior part of D_A
    for (long a = 1; a < count; ++a) {
        std::vector<int> members = subset_members(static_cast<SubsetIndex>(a), n);
        Subspace dA = complementary_image(t, complement_members(static_cast<SubsetIndex>(a), n),
                                          decomposition_depth + 1, ws[a], tol);
        if (dA.empty()) continue;
        Subspace di = intersect({dA, interior}, tol);
        if (di.empty()) continue;
        const int r = static_cast<int>(members.size());
        std::vector<Eigen::MatrixXcd> imgs = power_images(t, members, depth, di.basis);
        std::vector<MultiIndex> ks = multi_index_box(r, depth);
        for (size_t idx = 0; idx < ks.size(); ++idx) {
            Eigen::MatrixXcd y = imgs[idx];
            // (T_{a_1}^{k_1} ... T_{a_r}^{k_r})^* applies T_{a_1}^* first.
            for (int c = 0; c < r; ++c)
                for (int e = 0; e < ks[idx][c]; ++e) y = t.op(members[c]).adjoint() * y;
            Subspace img = numerical_range(y, tol);
            rep.reducing_gram = std::max(rep.reducing_gram, subspace_distance(img, di));
        }
    }

    rep.pass = rep.worst() <= tol.residual_abs;
    return rep;
}

}  // namespace woldlab
