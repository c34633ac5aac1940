#pragma once

#include <vector>

#include "woldlab/linop.hpp"

namespace woldlab {

struct NotNearIsometry : Error { using Error::Error; };
struct NotPureShift : Error { using Error::Error; };

struct NearIsometryReport {
    double delta = 0.0;
    double upper_excess = 0.0;
    // Entry n: largest |<u, v>| over unit u in T^n(ker T*), v in T^{n+1}(interior).
    std::vector<double> ortho_residuals;
    long wandering_dim = 0;
    Subspace wandering;  // ker T*
    int first_failing_order = -1;
    bool bounded_below = false;
    bool contraction = false;
    bool orthogonality = false;
    bool pass = false;
};

NearIsometryReport check_near_isometry(const Operator& t, const Subspace& interior, int depth,
                                       const Tolerances& tol = {});

// Levels 0..depth of the shift part. Callers covering an interior of degree cap s
// should use depth >= s + 1 so that the invertible remainder misses the interior.
struct WoldSplit {
    Operator p_shift;
    Operator p_invertible;
    Subspace wandering;
    Subspace shift_space;
    int depth = 0;
    // sigma_min of T on range(P_invertible) ∩ interior (infinity when that is zero).
    double invertible_lower_bound = 0.0;
    bool invertible_ok = false;
};

WoldSplit wold_single(const Operator& t, const Subspace& interior, int depth, const Tolerances& tol = {});
// P_invertible is the range projection of T^{depth+1}; P_shift is the telescoping
// sum of T^k(T^k)^# - T^{k+1}(T^{k+1})^# for k = 0..depth.
WoldSplit wold_projection_route(const Operator& t, const Subspace& interior, int depth, const Tolerances& tol = {});
// Orthogonal projection onto range(T^k), k >= 0.
Operator power_range_projector(const Operator& t, int k, const Tolerances& tol = {});

struct WeightedShiftModel {
    std::vector<Operator> weights;  // T_n = Λ_{n+1}^* T Λ_n, n = 0..depth-1
    std::vector<Operator> lambdas;  // Λ_n, n = 0..depth
    Operator intertwiner;           // stacked Λ_n^*
    Operator model;                 // block weighted shift on levels 0..depth
    double lower_bound_c = 0.0;
    double upper_bound = 0.0;
    double conjugation_residual = 0.0;
};

WeightedShiftModel analytic_model_single(const Operator& t, const WoldSplit& split, const Subspace& interior,
                                         int depth, const Tolerances& tol = {});

}  // namespace woldlab
