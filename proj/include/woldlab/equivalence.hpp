#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "woldlab/twisted.hpp"

namespace woldlab {

struct DecompositionIncomplete : Error { using Error::Error; };

// Data attached to one summand, all expressed in an orthonormal basis Q of D_A ∩ interior.
struct WanderingData {
    SubsetIndex a = 0;
    Subspace space;
    std::map<int, Operator> restricted_ops;                     // j not in A: Q^* T_j Q
    std::map<std::pair<int, int>, Operator> restricted_twists;  // i < j: Q^* U_ij Q
    std::vector<MultiIndex> ks;                                 // box {0..depth}^{|A|}
    std::vector<Operator> gram_ops;                             // Q^* T_A^{*k} T_A^k Q
    double reducing_residual = 0.0;                             // leakage of T_j, T_j^*, U_ij out of the space
};

WanderingData wandering_data(const TwistedTuple& t, const DecompositionResult& dec, SubsetIndex a,
                             const Tolerances& tol = {});

using WitnessFamily = std::map<SubsetIndex, Operator>;

// V_A = Q~^* W Q for a global unitary W that is expected to carry one tuple onto the other.
WitnessFamily witnesses_from_global(const Operator& w, const DecompositionResult& dec,
                                    const DecompositionResult& dec_t);

struct WitnessCheck {
    SubsetIndex a = 0;
    long dim = 0;
    long dim_t = 0;
    double unitarity = 0.0;
    double gram = 0.0;
    double tails = 0.0;
    double twists = 0.0;
    bool ok = false;
};

struct EquivalenceReport {
    std::vector<WitnessCheck> per_summand;
    bool dims_match = false;
    // Assembled U = sum over A and k of Λ~_{A,k} V_A Λ_{A,k}^*.
    Operator u;
    double intertwining = 0.0;    // max_s ||(U T_s - T~_s U) on interior||
    double isometry = 0.0;        // ||Q_I^* U^* U Q_I - I||
    double twist_residual = 0.0;  // max ||(U U_ij - U~_ij U) on interior||
    bool witness_ok = false;
    bool pass = false;
};

EquivalenceReport verify_equivalence_witness(const TwistedTuple& t, const DecompositionResult& dec,
                                             const Subspace& interior, const TwistedTuple& tt,
                                             const DecompositionResult& dec_t, const Subspace& interior_t,
                                             const WitnessFamily& witnesses, const Tolerances& tol = {});

enum class Verdict { Equivalent, NotEquivalent, Undecided };
std::string verdict_name(Verdict v);

struct SummandEquivalence {
    SubsetIndex a = 0;
    Verdict verdict = Verdict::Undecided;
    double best_residual = 0.0;
    Operator witness;
};

struct WanderingEquivalence {
    std::vector<SummandEquivalence> per_summand;
    Verdict verdict = Verdict::Undecided;
};

// Searches U(d) for d <= 2 (grid then local polish); larger blocks are reported undecided
// with the least-squares residual of the linear intertwining system.
WanderingEquivalence check_wandering_data_equiv(const TwistedTuple& t, const DecompositionResult& dec,
                                                const TwistedTuple& tt, const DecompositionResult& dec_t,
                                                const Tolerances& tol = {});

struct ModelBlock {
    SubsetIndex a = 0;
    std::vector<int> members;
    int cap = 0;  // model box {0..cap}^{|A|}; interior is {0..cap-1}^{|A|}
    Subspace wandering;
    std::vector<MultiIndex> ks;
    std::vector<Operator> lambdas;
    // gamma[idx][s-1]: the weight of T_s at box position idx; empty when k+e_s leaves the box.
    std::vector<std::vector<Operator>> gamma;
    Operator intertwiner;  // stacked Λ_k^*
    std::vector<Operator> model_ops;
    double conjugation_residual = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
};

struct MultishiftModel {
    std::vector<ModelBlock> blocks;
    Operator intertwiner;  // all blocks stacked
    double conjugation_residual = 0.0;
    double round_trip = 0.0;  // max_s ||(U^* M_s U - T_s) on interior||
    double lower_bound_c = 0.0;
    double upper_bound = 0.0;
    bool pass = false;
};

MultishiftModel analytic_model_multi(const TwistedTuple& t, const DecompositionResult& dec, const Subspace& interior,
                                     const Tolerances& tol = {});

}  // namespace woldlab
