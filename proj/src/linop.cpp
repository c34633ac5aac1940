#include "woldlab/linop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "woldlab/kernels.hpp"

namespace woldlab {

void Tolerances::validate() const {
    if (!(rank_rel > 0.0 && rank_rel < 1.0)) throw PreconditionViolated("rank_rel must lie in (0, 1)");
    if (!(residual_abs > 0.0)) throw PreconditionViolated("residual_abs must be positive");
    if (!(lower_bound_min > 0.0)) throw PreconditionViolated("lower_bound_min must be positive");
}

Subspace Subspace::zero(Eigen::Index ambient) { return Subspace(Eigen::MatrixXcd::Zero(ambient, 0)); }

Subspace Subspace::full(Eigen::Index ambient) { return Subspace(Eigen::MatrixXcd::Identity(ambient, ambient)); }

Subspace Subspace::coordinates(Eigen::Index ambient, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(ambient, static_cast<Eigen::Index>(idx.size()));
    for (size_t c = 0; c < idx.size(); ++c) {
        if (idx[c] < 0 || idx[c] >= ambient) throw IndexOutOfRange("coordinate index out of range");
        b(idx[c], static_cast<Eigen::Index>(c)) = 1.0;
    }
    return Subspace(std::move(b));
}

double Subspace::orthonormality_residual() const {
    if (empty()) return 0.0;
    return opnorm(basis.adjoint() * basis - Eigen::MatrixXcd::Identity(dim(), dim()));
}

Operator identity(Eigen::Index n) { return Operator::Identity(n, n); }

Operator adjoint(const Operator& a) { return a.adjoint(); }

Operator matrix_power(const Operator& t, int k) {
    if (t.rows() != t.cols()) throw DimensionMismatch("matrix_power needs a square operator");
    if (k < 0) throw PreconditionViolated("negative power");
    Operator r = identity(t.rows());
    Operator base = t;
    const auto exec = kernels::default_exec();
    while (k > 0) {
        if (k & 1) r = kernels::gemm(base, r, exec);
        k >>= 1;
        if (k > 0) base = kernels::gemm(base, base, exec);
    }
    return r;
}

double opnorm(const Eigen::MatrixXcd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::MatrixXcd g = a.cols() <= a.rows() ? Eigen::MatrixXcd(a.adjoint() * a) : Eigen::MatrixXcd(a * a.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double restricted_norm(const Operator& x, const Subspace& s) {
    if (x.cols() != s.ambient_dim()) throw DimensionMismatch("restricted_norm: dimension mismatch");
    if (s.empty()) return 0.0;
    return opnorm(x * s.basis);
}

Svd svd(const Eigen::MatrixXcd& a, SvdVectors vectors) {
    const lapack_int m = static_cast<lapack_int>(a.rows()), n = static_cast<lapack_int>(a.cols());
    const lapack_int k = std::min(m, n);
    Svd out;
    if (k == 0) {
        out.s = Eigen::VectorXd();
        out.u = Eigen::MatrixXcd::Identity(m, vectors == SvdVectors::Full ? m : 0);
        out.v = Eigen::MatrixXcd::Identity(n, vectors == SvdVectors::Full ? n : 0);
        return out;
    }
    char jobz = vectors == SvdVectors::None ? 'N' : vectors == SvdVectors::Thin ? 'S' : 'A';
    const lapack_int ucols = jobz == 'A' ? m : jobz == 'S' ? k : 1;
    const lapack_int vtrows = jobz == 'A' ? n : jobz == 'S' ? k : 1;
    Eigen::MatrixXcd work = a;
    Eigen::MatrixXcd u(jobz == 'N' ? 1 : m, ucols), vt(vtrows, n);
    out.s.resize(k);
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, jobz, m, n, work.data(), m, out.s.data(), u.data(),
                                     static_cast<lapack_int>(u.rows()), vt.data(), vtrows);
    if (info == 0) {
        if (jobz != 'N') {
            out.u = std::move(u);
            out.v = vt.adjoint();
        }
        return out;
    }
    if (info < 0) throw Error("zgesdd: invalid argument " + std::to_string(-info));
    unsigned opts = vectors == SvdVectors::None   ? 0u
                    : vectors == SvdVectors::Thin ? unsigned(Eigen::ComputeThinU | Eigen::ComputeThinV)
                                                  : unsigned(Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::JacobiSVD<Eigen::MatrixXcd> j(a, opts);
    out.s = j.singularValues();
    if (vectors != SvdVectors::None) {
        out.u = j.matrixU();
        out.v = j.matrixV();
    }
    return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXcd& a) {
    if (a.size() == 0) return Eigen::VectorXd();
    return svd(a, SvdVectors::None).s;
}

double sigma_min_on(const Operator& t, const Subspace& s) {
    if (s.empty()) return std::numeric_limits<double>::infinity();
    Eigen::VectorXd sv = singular_values(t * s.basis);
    if (sv.size() < s.dim()) return 0.0;
    return sv.minCoeff();
}

double sigma_max_on(const Operator& t, const Subspace& s) {
    if (s.empty()) return 0.0;
    return singular_values(t * s.basis).maxCoeff();
}

bool is_unitary(const Operator& u, double tol) {
    if (u.rows() != u.cols()) return false;
    const auto n = u.rows();
    return opnorm(u.adjoint() * u - identity(n)) <= tol && opnorm(u * u.adjoint() - identity(n)) <= tol;
}

namespace {

Svd bounded_below_svd(const Operator& t, const Tolerances& tol, const char* what) {
    if (t.cols() == 0) return {Eigen::MatrixXcd::Zero(t.rows(), 0), Eigen::MatrixXcd::Zero(0, 0), Eigen::VectorXd()};
    if (t.cols() > t.rows()) throw NotBoundedBelow(std::string(what) + ": more columns than rows");
    Svd f = svd(t, SvdVectors::Thin);
    double smin = f.s.minCoeff();
    if (!(smin >= tol.lower_bound_min))
        throw NotBoundedBelow(std::string(what) + ": smallest singular value " + std::to_string(smin) +
                              " below lower_bound_min");
    return f;
}

}  // namespace

Operator left_inverse_sharp(const Operator& t, const Tolerances& tol) {
    Svd f = bounded_below_svd(t, tol, "left_inverse_sharp");
    // (T*T)^{-1} T* = V S^{-1} U*
    return f.v * f.s.cwiseInverse().asDiagonal() * f.u.adjoint();
}

Operator range_projection(const Operator& t, const Tolerances& tol) {
    Svd f = bounded_below_svd(t, tol, "range_projection");
    return f.u * f.u.adjoint();
}

namespace {

// Column-pivoted QR with the rank read off |R_ii| relative to |R_00|.
Eigen::Index pivoted_rank(const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>& qr, double rank_rel) {
    const Eigen::MatrixXcd& r = qr.matrixQR();
    const Eigen::Index k = std::min(r.rows(), r.cols());
    if (k == 0) return 0;
    const double top = std::abs(r(0, 0));
    if (!(top > 0.0)) return 0;
    Eigen::Index rank = 0;
    while (rank < k && std::abs(r(rank, rank)) > rank_rel * top) ++rank;
    return rank;
}

}  // namespace

Subspace numerical_range(const Eigen::MatrixXcd& cols, const Tolerances& tol) {
    if (cols.cols() == 0 || cols.rows() == 0) return Subspace::zero(cols.rows());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(cols);
    const Eigen::Index r = pivoted_rank(qr, tol.rank_rel);
    if (r == 0) return Subspace::zero(cols.rows());
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(cols.rows(), r);
    return Subspace(std::move(q), tol.rank_rel);
}

RangeSplit range_split(const Eigen::MatrixXcd& cols, const Tolerances& tol) {
    const auto d = cols.rows();
    if (cols.cols() == 0) return {Subspace::zero(d), Subspace::full(d)};
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(cols);
    const Eigen::Index r = pivoted_rank(qr, tol.rank_rel);
    Eigen::MatrixXcd q = qr.householderQ();
    return {Subspace(q.leftCols(r), tol.rank_rel), Subspace(q.rightCols(d - r), tol.rank_rel)};
}

Subspace kernel_of_adjoint(const Operator& t, const Tolerances& tol) { return range_split(t, tol).complement; }

Operator polar_unitary(const Operator& t, const Tolerances& tol) {
    Svd f = bounded_below_svd(t, tol, "polar_unitary");
    return f.u * f.v.adjoint();
}

Subspace intersect(const std::vector<Subspace>& spaces, const Tolerances& tol) {
    if (spaces.empty()) throw PreconditionViolated("intersect of an empty list");
    const auto d = spaces.front().ambient_dim();
    Eigen::Index total = 0;
    for (const auto& s : spaces) {
        if (s.ambient_dim() != d) throw DimensionMismatch("intersect: ambient dimensions differ");
        total += s.dim();
    }
    for (const auto& s : spaces)
        if (s.empty()) return Subspace::zero(d);
    if (spaces.size() == 1) return spaces.front();

    const double n = static_cast<double>(spaces.size());
    const double cut = 1.0 - tol.rank_rel;
    if (spaces.size() == 2) {
        // Eigenvalues of (P_1 + P_2)/2 are (1 ± cos θ)/2 over the principal angles θ.
        const Subspace& x = spaces[0];
        const Subspace& y = spaces[1];
        Svd f = svd(x.basis.adjoint() * y.basis, SvdVectors::Thin);
        Eigen::Index r = 0;
        while (r < f.s.size() && (1.0 + f.s(r)) * 0.5 >= cut) ++r;
        if (r == 0) return Subspace::zero(d);
        return numerical_range(x.basis * f.u.leftCols(r), tol);
    }
    Eigen::MatrixXcd g(d, total);
    Eigen::Index c = 0;
    for (const auto& s : spaces) {
        g.middleCols(c, s.dim()) = s.basis;
        c += s.dim();
    }
    if (total <= d) {
        // Nonzero spectrum of (1/n) G G* equals that of (1/n) G* G; eigenvectors map through G.
        Eigen::MatrixXcd m = kernels::gram(g, kernels::default_exec()) / n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
            if (es.eigenvalues()(i) >= cut) keep.push_back(i);
        Eigen::MatrixXcd out(d, static_cast<Eigen::Index>(keep.size()));
        for (size_t k = 0; k < keep.size(); ++k) {
            double lam = es.eigenvalues()(keep[k]);
            out.col(static_cast<Eigen::Index>(k)) = g * es.eigenvectors().col(keep[k]) / std::sqrt(n * lam);
        }
        // Re-orthonormalize to clean up rounding in the lift.
        if (out.cols() > 0) {
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(out);
            Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, out.cols());
            return Subspace(q, tol.rank_rel);
        }
        return Subspace::zero(d);
    }
    Eigen::MatrixXcd p = (g * g.adjoint()) / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
        if (es.eigenvalues()(i) >= cut) keep.push_back(i);
    Eigen::MatrixXcd out(d, static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    return Subspace(out, tol.rank_rel);
}

Subspace apply_to_subspace(const Operator& t, const Subspace& s, const Tolerances& tol) {
    if (t.cols() != s.ambient_dim()) throw DimensionMismatch("apply_to_subspace: dimension mismatch");
    if (s.empty()) return Subspace::zero(t.rows());
    return numerical_range(kernels::gemm(t, s.basis, kernels::default_exec()), tol);
}

Subspace sum_of(const std::vector<Subspace>& spaces, const Tolerances& tol) {
    if (spaces.empty()) throw PreconditionViolated("sum_of an empty list");
    const auto d = spaces.front().ambient_dim();
    Eigen::Index total = 0;
    for (const auto& s : spaces) {
        if (s.ambient_dim() != d) throw DimensionMismatch("sum_of: ambient dimensions differ");
        total += s.dim();
    }
    Eigen::MatrixXcd g(d, total);
    Eigen::Index c = 0;
    for (const auto& s : spaces) {
        g.middleCols(c, s.dim()) = s.basis;
        c += s.dim();
    }
    return numerical_range(g, tol);
}

Subspace complement_in(const Subspace& s, const Subspace& within, const Tolerances& tol) {
    if (s.ambient_dim() != within.ambient_dim()) throw DimensionMismatch("complement_in: ambient dimensions differ");
    if (within.empty() || s.empty()) return within;
    if (within.dim() == within.ambient_dim()) return range_split(s.basis, tol).complement;
    Eigen::MatrixXcd c = s.basis.adjoint() * within.basis;
    Svd f = svd(c, SvdVectors::Full);
    const Eigen::VectorXd& sv = f.s;
    // Directions of `within` whose cosine with s is below sqrt(rank_rel) count as orthogonal.
    const double cut = std::sqrt(tol.rank_rel);
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    Eigen::MatrixXcd v = f.v.rightCols(within.dim() - r);
    return numerical_range(within.basis * v, tol);
}

double principal_cosine(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw DimensionMismatch("principal_cosine: ambient dimensions differ");
    if (a.empty() || b.empty()) return 0.0;
    return opnorm(a.basis.adjoint() * b.basis);
}

double containment_residual(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw DimensionMismatch("containment_residual: ambient dimensions differ");
    if (a.empty()) return 0.0;
    if (b.empty()) return 1.0;
    return opnorm(a.basis - b.basis * (b.basis.adjoint() * a.basis));
}

double subspace_distance(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return 1.0;
    return std::max(containment_residual(a, b), containment_residual(b, a));
}

DirectSumReport orthogonal_direct_sum_check(const std::vector<Subspace>& parts, const Subspace& whole,
                                            const Tolerances& tol) {
    DirectSumReport rep;
    std::vector<Eigen::MatrixXcd> blocks;
    long total = 0;
    for (const auto& p : parts) {
        if (p.ambient_dim() != whole.ambient_dim()) throw DimensionMismatch("direct sum: ambient dimensions differ");
        blocks.push_back(p.basis);
        total += p.dim();
    }
    rep.max_overlap = kernels::max_pairwise_cosine(blocks, kernels::default_exec());
    rep.dim_deficit = static_cast<long>(whole.dim()) - total;
    if (!whole.empty()) {
        Eigen::MatrixXcd r = whole.basis;
        for (const auto& p : parts)
            if (!p.empty()) r -= p.basis * (p.basis.adjoint() * whole.basis);
        rep.coverage_residual = opnorm(r);
    }
    rep.pass = rep.dim_deficit == 0 && rep.max_overlap <= tol.residual_abs && rep.coverage_residual <= tol.residual_abs;
    return rep;
}

}  // namespace woldlab
