#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace woldlab {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Tolerances {
    double rank_rel = 1e-10;
    double residual_abs = 1e-8;
    double lower_bound_min = 1e-6;

    void validate() const;
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotBoundedBelow : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct PointOutsideDisc : Error { using Error::Error; };
struct PreconditionViolated : Error { using Error::Error; };

// Orthonormal columns in a fixed ambient space. Zero columns is the zero subspace.
struct Subspace {
    Eigen::MatrixXcd basis;
    double tol = 1e-10;

    Subspace() = default;
    Subspace(Eigen::MatrixXcd b, double t = 1e-10) : basis(std::move(b)), tol(t) {}

    static Subspace zero(Eigen::Index ambient);
    static Subspace full(Eigen::Index ambient);
    // Span of selected coordinate vectors.
    static Subspace coordinates(Eigen::Index ambient, const std::vector<Eigen::Index>& idx);

    Eigen::Index ambient_dim() const { return basis.rows(); }
    Eigen::Index dim() const { return basis.cols(); }
    bool empty() const { return basis.cols() == 0; }
    Operator projector() const { return basis * basis.adjoint(); }
    double orthonormality_residual() const;
};

Operator identity(Eigen::Index n);
Operator adjoint(const Operator& a);
Operator matrix_power(const Operator& t, int k);

// Spectral norm, computed from the eigenvalues of the smaller Gram matrix.
double opnorm(const Eigen::MatrixXcd& a);
// ||X Q|| for the basis Q of s.
double restricted_norm(const Operator& x, const Subspace& s);

enum class SvdVectors { None, Thin, Full };

struct Svd {
    Eigen::MatrixXcd u, v;  // a = u diag(s) v^*
    Eigen::VectorXd s;      // descending
};

// LAPACK divide and conquer (zgesdd); falls back to Jacobi if it does not converge.
Svd svd(const Eigen::MatrixXcd& a, SvdVectors vectors);
Eigen::VectorXd singular_values(const Eigen::MatrixXcd& a);
double sigma_min_on(const Operator& t, const Subspace& s);
double sigma_max_on(const Operator& t, const Subspace& s);

bool is_unitary(const Operator& u, double tol);

Operator left_inverse_sharp(const Operator& t, const Tolerances& tol = {});
Operator range_projection(const Operator& t, const Tolerances& tol = {});
// Numerical range via column-pivoted QR with a relative cutoff on the diagonal of R.
Subspace numerical_range(const Eigen::MatrixXcd& cols, const Tolerances& tol = {});
Subspace kernel_of_adjoint(const Operator& t, const Tolerances& tol = {});

struct RangeSplit {
    Subspace range;
    Subspace complement;  // orthogonal complement of range in the ambient space
};

// Numerical range and its orthogonal complement from one pivoted QR.
RangeSplit range_split(const Eigen::MatrixXcd& cols, const Tolerances& tol = {});
Operator polar_unitary(const Operator& t, const Tolerances& tol = {});

Subspace intersect(const std::vector<Subspace>& spaces, const Tolerances& tol = {});
Subspace apply_to_subspace(const Operator& t, const Subspace& s, const Tolerances& tol = {});
Subspace sum_of(const std::vector<Subspace>& spaces, const Tolerances& tol = {});
// within ⊖ s
Subspace complement_in(const Subspace& s, const Subspace& within, const Tolerances& tol = {});

// Largest cosine of the principal angles between a and b (0 if either is zero).
double principal_cosine(const Subspace& a, const Subspace& b);
// Two-sided containment gap max(||(I-P_b)Q_a||, ||(I-P_a)Q_b||), or 1 on a dimension mismatch.
double subspace_distance(const Subspace& a, const Subspace& b);
// ||(I - P_b) Q_a||
double containment_residual(const Subspace& a, const Subspace& b);

struct DirectSumReport {
    double max_overlap = 0.0;
    long dim_deficit = 0;
    double coverage_residual = 0.0;
    bool pass = false;
};

DirectSumReport orthogonal_direct_sum_check(const std::vector<Subspace>& parts, const Subspace& whole,
                                            const Tolerances& tol = {});

}  // namespace woldlab
