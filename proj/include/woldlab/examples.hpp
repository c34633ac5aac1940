#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "woldlab/equivalence.hpp"
#include "woldlab/near_isometry.hpp"
#include "woldlab/spaces.hpp"
#include "woldlab/twisted.hpp"

namespace woldlab {

struct ConfigInvalid : Error { using Error::Error; };

struct RunConfig {
    int degree_cap = 32;
    int guard = -1;  // -1 selects SpaceDescriptor::default_guard
    int depth = 8;
    Tolerances tol;
    double r = 0.5;
    std::uint64_t seed = 42;
    std::string source = "construct-demo";
    std::string file;
    int random_n = 3;
    int random_m = 2;
    int random_p = 2;

    int effective_guard() const;
    int interior_cap() const { return degree_cap - effective_guard(); }
    // Level range of the decompositions: one past the interior cap.
    int decomposition_depth() const { return interior_cap() + 1; }
    // Throws ConfigInvalid; the command name selects command-specific limits.
    void validate(const std::string& command) const;
};

// Coordinates {0..cap} of a space of dimension dim.
Subspace leading_coordinates(Eigen::Index dim, Eigen::Index count);

// The Bergman shift B on the truncated Bergman space and its compression to
// M = {f : f(w) = 0}, written in an orthonormal basis of M. The compression is
// taken after cutting the top degree, matching the boundary rule of B itself.
struct BergmanRestriction {
    int degree_cap = 0;
    Operator shift;
    Subspace interior;        // E_{N-g}
    Subspace m;               // M in the full coordinates
    Operator compressed;      // on M, in the basis m.basis
    Subspace interior_m;      // M ∩ E_{N-g}, in M coordinates
};

BergmanRestriction build_bergman_restriction(int degree_cap, int guard, cplx w, const Tolerances& tol = {});

struct BergmanReport {
    NearIsometryReport full;
    NearIsometryReport compressed;
    double delta_expected = 0.0;
    std::array<cplx, 3> coeffs{};  // T^*(z^3 - z^2/2) in {z^2, z, k̂_{1/2}}
    double fit_residual = 0.0;
    cplx constant_coeff;           // constant coefficient of T^*T^2 f
    bool reproduced = false;
};

BergmanReport run_bergman_restriction(const RunConfig& cfg);

// T_1 = [[r, 0], [f, M_phi^*]], T_2 = [[r, 0], [0, M_z]] on C ⊕ H^2, with
// phi = 1/(6+3z) and f = 1/(2(1-rz)).
struct ToeplitzPair {
    TwistedTuple tuple;
    Subspace interior;
    int degree_cap = 0;
};

ToeplitzPair build_toeplitz_pair(int degree_cap, int guard, double r);

struct ToeplitzReport {
    double adjoint_commutator = 0.0;  // ||T_1^*T_2 - T_2T_1^*|| on the interior
    double commutator = 0.0;          // ||T_1T_2 - T_2T_1|| on the interior
    NearIsometryReport t1, t2;
    long invertible_t2_dim = 0;            // dim H_{T_2,I} ∩ interior
    double invertible_t2_distance = 0.0;   // distance of that space to C ⊕ 0
    std::vector<cplx> image_head;          // leading coordinates of T_1(1 ⊕ 0)
    double f_norm = 0.0;
    double f_norm_expected = 0.0;
    ReducingReport reducing;
    DecompositionResult decomposition;
    bool reproduced = false;
};

ToeplitzReport run_toeplitz_pair(const RunConfig& cfg);

struct WanderingGapPair {
    TwistedTuple t, tt;
    Subspace interior;
    SpaceDescriptor space;
};

// w_n = 1/3 + 1/3^{n+1}
double gap_weight(int n);
WanderingGapPair build_wandering_gap(int degree_cap, int guard);

struct WanderingGapReport {
    double norm_t1 = 0.0, norm_tt1 = 0.0;
    std::array<long, 4> dims{}, dims_t{};  // over A = {}, {1}, {2}, {1,2}
    WanderingEquivalence wandering;
    EquivalenceReport witness;
    bool reproduced = false;
};

WanderingGapReport run_wandering_gap(const RunConfig& cfg);

TwistedConstruction construct_demo(int degree_cap, int guard);
TwistedConstruction random_demo(int degree_cap, int guard, std::uint64_t seed, int n = 3, int m = 2, int p = 2);
// Two twisted coordinate shifts with the scalar twist e^{i pi/4}; both are isometries.
TwistedConstruction isometric_demo(int degree_cap, int guard);

struct PipelineReport {
    TwistedReport twisted;
    LemmaReport lemmas;
    DecompositionResult induction;
    DecompositionResult projection;
    double route_agreement = 0.0;
    MultishiftModel model;
    long interior_dim = 0;
    long summand_dim_total = 0;
    bool model_ran = false;
    bool pass = false;
};

struct PipelineInput {
    TwistedTuple tuple;
    Subspace interior;
    int decomposition_depth = 0;
};

// Resolves cfg.source. A tuple file may carry a "space" descriptor; without one the
// whole space is the interior and cfg.depth is the decomposition depth.
PipelineInput pipeline_source(const RunConfig& cfg);
PipelineInput constructed_input(const TwistedConstruction& c, const Tolerances& tol = {});
PipelineReport run_pipeline(const PipelineInput& in, const RunConfig& cfg);

// The corollary's prediction for an isometric constructed tuple: the weight of T_s at
// box position idx of the summand, written in the wandering basis.
Operator predicted_isometric_weight(const TwistedTuple& t, const ModelBlock& b, size_t idx, int s);

}  // namespace woldlab
