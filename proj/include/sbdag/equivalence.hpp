#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "sbdag/linalg.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

// Population projection coefficients of node j onto the variables in S.
struct SemCoefficients {
    int node = 0;
    IndexSet neighbourhood;       // S
    Vector beta;                  // ambient length p, zero off S
    double residual_variance = 0;  // omega_j^2(S)
    IndexSet support;             // m_j(S) = supp(beta)
};

// (B(pi), Omega(pi)) from the factorization of the permuted precision matrix.
std::pair<WeightedDag, DiagonalVariances> dag_for_permutation(const CovarianceMatrix& sigma,
                                                              const Permutation& pi);

// S_j(pi) = {k : pi^{-1}(k) > pi^{-1}(j)}, the candidate parents of j.
IndexSet candidate_parents(const Permutation& pi, int j);

SemCoefficients sem_coefficients(const CovarianceMatrix& sigma, int j, const IndexSet& s);

// m_j(S), the maximal invariant set M_j(S), and (for small p) the full
// collection N_j(S) of invariant sets.
struct InvariantSets {
    IndexSet m;                       // support of beta_j(S)
    IndexSet maximal;                 // M_j(S)
    std::set<IndexSet> collection;    // N_j(S); filled when enumerated
    bool enumerated = false;
};
InvariantSets invariant_set_collection(const CovarianceMatrix& sigma, int j, const IndexSet& s,
                                       int enumeration_cap = 14);

// A_j(Sigma) = {m_j(S) : S in 2^{[p] \ j}} and the matching maximal sets.
struct SupportCollections {
    std::set<IndexSet> supports;     // A_j
    std::set<IndexSet> maximal_sets; // M_j
};
SupportCollections support_collections(const CovarianceMatrix& sigma, int j,
                                       int enumeration_cap = 14);

struct ClassMember {
    WeightedDag dag;
    DiagonalVariances omega;
    Permutation representative;
    double trace;
};

struct EquivalenceClassSummary {
    std::vector<ClassMember> dags;
    int d_sigma = 0;
    double betamin_sigma = 0.0;      // +inf sentinel when no edges anywhere
    double sigma_max_sq = 0.0;
    bool exact = true;               // false in sampled-permutation mode
};

struct ClassOptions {
    int permutation_cap = 9;   // exact enumeration up to cap!
    int support_cap = 14;      // 2^{p-1} enumeration cap for d and beta_min
    // sampled mode (p above permutation_cap): this many random permutations
    int sample_size = 0;
    std::uint64_t seed = 0;
    // sampled mode also covers all orderings of a reference DAG
    const WeightedDag* reference = nullptr;
    std::size_t reference_sort_cap = 10000;
};

EquivalenceClassSummary class_summary(const CovarianceMatrix& sigma, const ClassOptions& opts = {});

struct MinTraceResult {
    Permutation permutation;
    double trace = 0.0;
    bool unique = true;  // single DAG attains the minimum trace within 1e-9
    WeightedDag dag;
    DiagonalVariances omega;
    bool exact = true;   // false when only a permutation sample was scanned
};

MinTraceResult min_trace_permutation(const CovarianceMatrix& sigma, const ClassOptions& opts = {});

// d(Sigma) and beta_min(Sigma) over every beta_j(S), via the support
// collections. Returns {d, betamin} with betamin = +inf when no support is
// nonempty.
std::pair<int, double> sparsity_parameters(const CovarianceMatrix& sigma,
                                           int enumeration_cap = 14);

// deterministic enumeration helpers (parallelizable by chunking the stream)
std::uint64_t factorial(int p);
Permutation permutation_from_index(int p, std::uint64_t index);

}  // namespace sbdag
