#include "woldlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace woldlab {

int SpaceDescriptor::default_guard(int degree_cap) { return std::max(8, degree_cap / 4); }

void SpaceDescriptor::validate() const {
    if (vars < 1) throw PreconditionViolated("space: vars must be positive");
    if (degree_cap < 1) throw PreconditionViolated("space: degree cap must be positive");
    if (coeff_dim < 1) throw PreconditionViolated("space: coefficient dimension must be positive");
    if (guard < 0 || guard >= degree_cap) throw PreconditionViolated("space: guard must lie in [0, N)");
}

Eigen::Index SpaceDescriptor::dimension() const {
    Eigen::Index d = coeff_dim;
    for (int v = 0; v < vars; ++v) d *= (degree_cap + 1);
    return d;
}

Eigen::Index SpaceDescriptor::index_of(const MultiIndex& k, int j) const {
    if (static_cast<int>(k.size()) != vars) throw IndexOutOfRange("multi-index has the wrong length");
    if (j < 0 || j >= coeff_dim) throw IndexOutOfRange("coefficient index out of range");
    Eigen::Index idx = 0;
    for (int v = 0; v < vars; ++v) {
        if (k[v] < 0 || k[v] > degree_cap) throw IndexOutOfRange("exponent out of range");
        idx = idx * (degree_cap + 1) + k[v];
    }
    return idx * coeff_dim + j;
}

std::pair<MultiIndex, int> SpaceDescriptor::address(Eigen::Index i) const {
    if (i < 0 || i >= dimension()) throw IndexOutOfRange("basis index out of range");
    int j = static_cast<int>(i % coeff_dim);
    Eigen::Index rest = i / coeff_dim;
    MultiIndex k(vars);
    for (int v = vars - 1; v >= 0; --v) {
        k[v] = static_cast<int>(rest % (degree_cap + 1));
        rest /= (degree_cap + 1);
    }
    return {k, j};
}

bool InteriorMask::contains(Eigen::Index i) const {
    auto [k, j] = space.address(i);
    (void)j;
    return std::all_of(k.begin(), k.end(), [&](int e) { return e <= space.interior_cap(); });
}

Eigen::Index InteriorMask::dimension() const {
    Eigen::Index d = space.coeff_dim;
    for (int v = 0; v < space.vars; ++v) d *= (space.interior_cap() + 1);
    return d;
}

Subspace InteriorMask::subspace() const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < space.dimension(); ++i)
        if (contains(i)) idx.push_back(i);
    return Subspace::coordinates(space.dimension(), idx);
}

Operator mult_op(const SpaceDescriptor& space, int i) {
    space.validate();
    if (i < 1 || i > space.vars) throw IndexOutOfRange("mult_op: variable index " + std::to_string(i));
    const auto d = space.dimension();
    Operator m = Operator::Zero(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        auto [k, j] = space.address(c);
        if (k[i - 1] == space.degree_cap) continue;
        k[i - 1] += 1;
        m(space.index_of(k, j), c) = 1.0;
    }
    return m;
}

Operator diag_twist(const SpaceDescriptor& space, int j, const Operator& u, const Tolerances& tol) {
    space.validate();
    if (j < 1 || j > space.vars) throw IndexOutOfRange("diag_twist: variable index " + std::to_string(j));
    if (u.rows() != space.coeff_dim || u.cols() != space.coeff_dim)
        throw DimensionMismatch("diag_twist: twist must act on the coefficient space");
    if (!is_unitary(u, tol.residual_abs)) throw NotUnitary("diag_twist: U is not unitary");
    const int p = space.coeff_dim;
    std::vector<Operator> powers(space.degree_cap + 1);
    powers[0] = identity(p);
    for (int e = 1; e <= space.degree_cap; ++e) powers[e] = u * powers[e - 1];
    const auto d = space.dimension();
    Operator out = Operator::Zero(d, d);
    for (Eigen::Index b = 0; b < d; b += p) {
        auto [k, jj] = space.address(b);
        (void)jj;
        out.block(b, b, p, p) = powers[k[j - 1]];
    }
    return out;
}

Operator toeplitz_analytic(const SpaceDescriptor& space, const std::vector<cplx>& coeffs) {
    space.validate();
    if (space.vars != 1) throw PreconditionViolated("toeplitz_analytic: one variable only");
    const int n = space.degree_cap + 1;
    Operator t = Operator::Zero(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = c; r < n; ++r) {
            size_t lag = static_cast<size_t>(r - c);
            if (lag < coeffs.size()) t(r, c) = coeffs[lag];
        }
    if (space.coeff_dim == 1) return t;
    return tensor_lift(t, identity(space.coeff_dim));
}

Operator weighted_shift(int degree_cap, const std::function<double(int)>& weight) {
    if (degree_cap < 1) throw PreconditionViolated("weighted_shift: degree cap must be positive");
    Operator s = Operator::Zero(degree_cap + 1, degree_cap + 1);
    for (int n = 0; n < degree_cap; ++n) s(n + 1, n) = weight(n);
    return s;
}

Operator bergman_shift(int degree_cap) {
    if (degree_cap < 2) throw PreconditionViolated("bergman_shift: N must be at least 2");
    return weighted_shift(degree_cap, [](int n) { return std::sqrt((n + 1.0) / (n + 2.0)); });
}

Vector bergman_kernel_vector(int degree_cap, cplx w) {
    if (!(std::abs(w) < 1.0)) throw PointOutsideDisc("bergman kernel: point outside the unit disc");
    Vector k(degree_cap + 1);
    cplx wb = std::conj(w);
    cplx pw = 1.0;
    for (int n = 0; n <= degree_cap; ++n) {
        k(n) = std::sqrt(n + 1.0) * pw;
        pw *= wb;
    }
    return k;
}

Subspace zero_set_subspace(int degree_cap, cplx w, const Tolerances& tol) {
    Vector k = bergman_kernel_vector(degree_cap, w);
    return kernel_of_adjoint(Operator(k), tol);
}

Operator tensor_lift(const Operator& a, const Operator& b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

std::vector<cplx> coeffs_inverse_linear(cplx a, cplx b, int degree_cap) {
    // 1/(a + b z) = (1/a) sum (-b/a)^k z^k
    std::vector<cplx> c(degree_cap + 1);
    cplx ratio = -b / a;
    cplx term = 1.0 / a;
    for (int k = 0; k <= degree_cap; ++k) {
        c[k] = term;
        term *= ratio;
    }
    return c;
}

std::vector<cplx> coeffs_geometric(cplx scale, cplx r, int degree_cap) {
    std::vector<cplx> c(degree_cap + 1);
    cplx term = scale;
    for (int k = 0; k <= degree_cap; ++k) {
        c[k] = term;
        term *= r;
    }
    return c;
}

}  // namespace woldlab
