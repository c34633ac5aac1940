#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "woldlab/kernels.hpp"
#include "woldlab/linop.hpp"
#include "woldlab/near_isometry.hpp"
#include "woldlab/spaces.hpp"

namespace woldlab {

struct NotTwisted : Error { using Error::Error; };
struct NonCommutingProjections : Error { using Error::Error; };

// Bit i-1 set means operator i belongs to A.
using SubsetIndex = unsigned;
constexpr int kMaxTupleSize = 16;

std::vector<int> subset_members(SubsetIndex a, int n);
std::string subset_label(SubsetIndex a, int n);

struct TwistedTuple {
    int n = 0;
    std::vector<Operator> ops;
    // Keyed by (i, j) with 1 <= i < j <= n; missing pairs mean the identity.
    std::map<std::pair<int, int>, Operator> twists;

    Eigen::Index dim() const { return ops.empty() ? 0 : ops.front().rows(); }
    // U_ij for any i != j, with U_ji = U_ij^*.
    Operator twist(int i, int j) const;
    const Operator& op(int i) const { return ops.at(static_cast<size_t>(i - 1)); }
    // Dimensions, unitarity and mutual commutation of the twists.
    void validate(const Tolerances& tol) const;
};

struct TwistedReport {
    double res_i = 0.0;
    double res_ii = 0.0;
    double res_iii = 0.0;
    std::string worst_i, worst_ii, worst_iii;
    std::vector<NearIsometryReport> per_op;
    bool relations_ok = false;
    bool pass = false;
};

TwistedReport verify_twisted(const TwistedTuple& t, const Subspace& interior, int depth, const Tolerances& tol = {});

// Recipe for tuples on H^2_{C^p}(D^m): coordinate shifts twisted by diagonal operators,
// followed by lifted tails. Twists and tails act on the coefficient space.
struct TwistedConstruction {
    int p = 1;
    int m = 1;
    int n = 1;
    std::map<std::pair<int, int>, Operator> twists;
    std::vector<Operator> tails;  // T_{m+1}, ..., T_n
    int degree_cap = 8;
    int guard = 2;

    SpaceDescriptor space() const { return SpaceDescriptor{m, degree_cap, p, guard}; }
};

TwistedTuple construct_twisted(const TwistedConstruction& c, const Tolerances& tol = {});

struct WanderingPair {
    Subspace w;
    Subspace d;
};

// D_A is the common image of W_A under T_{I∖A}^ℓ with every entry of ℓ equal to depth;
// the images are nested in ℓ, so this is the intersection over the box.
WanderingPair wandering_subspaces(const TwistedTuple& t, SubsetIndex a, int depth, const Tolerances& tol = {});

struct RoleVerdict {
    int op = 0;
    bool member = false;
    bool shift = false;
    bool invertible = false;
    double residual = 0.0;
    bool ok = false;
};

struct Summand {
    SubsetIndex a = 0;
    Subspace w;
    Subspace d;
    Subspace d_interior;
    Subspace h;
    Subspace h_interior;
    Operator projector;  // projection route only
    std::vector<RoleVerdict> roles;
};

struct DecompositionOptions {
    bool require_twisted = true;
    int check_depth = 8;
    // ker T_i^* for every i; computed when empty.
    std::vector<Subspace> adjoint_kernels;
    kernels::Exec exec = kernels::default_exec();
};

struct DecompositionResult {
    int n = 0;
    int depth = 0;
    std::map<SubsetIndex, Summand> summands;
    DirectSumReport completeness;
    double commutation_residual = 0.0;
    std::string commutation_pair;
    bool roles_ok = false;
    bool pass = false;

    Operator summand_projector(SubsetIndex a) const;
};

// Shift-direction sums run over {0..depth}^{|A|}; invertible-direction images use depth+1.
DecompositionResult wold_multi_induction(const TwistedTuple& t, const Subspace& interior, int depth,
                                         const Tolerances& tol = {}, const DecompositionOptions& opts = {});
DecompositionResult wold_multi_projection(const TwistedTuple& t, const Subspace& interior, int depth,
                                          const Tolerances& tol = {}, const DecompositionOptions& opts = {});
// Largest interior-restricted difference of summand projections over all A.
double route_agreement(const DecompositionResult& x, const DecompositionResult& y, const Subspace& interior);

std::vector<WoldSplit> per_operator_splits(const TwistedTuple& t, const Subspace& interior, int depth,
                                           const Tolerances& tol = {});

struct ReducingReport {
    Eigen::MatrixXd residuals;  // (i-1, k-1) -> ||P_{T_i,S} T_k - T_k P_{T_i,S}|| on the interior
    std::vector<std::pair<int, int>> failing;
    bool pass = false;
};

ReducingReport check_reducing_conditions(const TwistedTuple& t, const std::vector<WoldSplit>& splits,
                                         const Subspace& interior, const Tolerances& tol = {});

struct LemmaReport {
    double sharp_twist_commute = 0.0;   // T_k^# U_ij = U_ij T_k^#
    double twist_recovery = 0.0;        // U_ij = T_i^# T_j^# T_i T_j
    double range_projections = 0.0;     // power range projections commute
    double kernel_intersection = 0.0;   // ∩ T_i^{k_i} ker T_i^* = T^k ∩ ker T_i^*
    double wandering_step = 0.0;        // W_A ⊖ T_j W_A = W_{A∪{j}}
    double reducing_gram = 0.0;         // T_A^{*k} T_A^k D_A = D_A
    bool pass = false;

    double worst() const;
};

// The pseudo-inverse stands in for T^#; the two agree whenever T is bounded below.
LemmaReport lemma_suite(const TwistedTuple& t, const Subspace& interior, int depth, const Tolerances& tol = {},
                        int decomposition_depth = -1);

// Moore-Penrose inverse with the relative rank cutoff.
Operator pseudo_inverse(const Operator& t, const Tolerances& tol = {});

// The box {0..depth}^r in lexicographic order, and the position of k in it.
std::vector<MultiIndex> multi_index_box(int r, int depth);
long multi_index_position(const MultiIndex& k, int depth);
// Unnormalized T_A^k x for every k in the box, with T_A^k = T_{a_1}^{k_1} ... T_{a_r}^{k_r}.
std::vector<Eigen::MatrixXcd> power_images(const TwistedTuple& t, const std::vector<int>& members, int depth,
                                           const Eigen::MatrixXcd& x);

}  // namespace woldlab
