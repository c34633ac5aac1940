#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "woldlab/linop.hpp"

namespace woldlab {

using MultiIndex = std::vector<int>;

// Box truncation of H^2_{C^p}(D^m): exponents 0..N in every variable.
// Basis order is lexicographic in (k_1, ..., k_m), then the coefficient index,
// so that tensor_lift (Kronecker product) matches the enumeration.
struct SpaceDescriptor {
    int vars = 1;
    int degree_cap = 8;
    int coeff_dim = 1;
    int guard = 0;

    static int default_guard(int degree_cap);

    void validate() const;
    Eigen::Index dimension() const;
    int interior_cap() const { return degree_cap - guard; }
    Eigen::Index index_of(const MultiIndex& k, int j = 0) const;
    std::pair<MultiIndex, int> address(Eigen::Index i) const;
};

struct InteriorMask {
    SpaceDescriptor space;

    explicit InteriorMask(SpaceDescriptor s) : space(s) {}
    bool contains(Eigen::Index i) const;
    Eigen::Index dimension() const;
    Subspace subspace() const;
};

// Variables are numbered from 1.
Operator mult_op(const SpaceDescriptor& space, int i);
Operator diag_twist(const SpaceDescriptor& space, int j, const Operator& u, const Tolerances& tol = {});
// Lower-triangular Toeplitz matrix of an analytic symbol given by power-series coefficients.
Operator toeplitz_analytic(const SpaceDescriptor& space, const std::vector<cplx>& coeffs);
// e_n -> w(n) e_{n+1} for n < N, e_N -> 0.
Operator weighted_shift(int degree_cap, const std::function<double(int)>& weight);
Operator bergman_shift(int degree_cap);
// Coefficients of k_w in the orthonormal basis sqrt(n+1) z^n.
Vector bergman_kernel_vector(int degree_cap, cplx w);
Subspace zero_set_subspace(int degree_cap, cplx w, const Tolerances& tol = {});
Operator tensor_lift(const Operator& a, const Operator& b);

// Closed-form power-series coefficients of the rational symbols used by the examples.
std::vector<cplx> coeffs_inverse_linear(cplx a, cplx b, int degree_cap);  // 1/(a + b z)
std::vector<cplx> coeffs_geometric(cplx scale, cplx r, int degree_cap);   // scale/(1 - r z)

}  // namespace woldlab
