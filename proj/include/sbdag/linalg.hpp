#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "sbdag/types.hpp"

namespace sbdag {

struct LdltResult {
    Matrix l_strict;  // strictly lower triangular L
    Vector d;         // positive diagonal D
};

// Factor a symmetric positive definite A as A = (I - L) D^{-1} (I - L)^T with
// L strictly lower triangular and D positive diagonal. Applied to a permuted
// precision matrix this is the factorization behind dag_for_permutation.
// Throws NotPositiveDefinite when a pivot falls at or below
// kPdTol * max diagonal entry.
LdltResult ldlt_decompose(const Matrix& a);

// (P_pi A)(i, j) = A(pi(i), pi(j))
Matrix permute_matrix(const Permutation& pi, const Matrix& a);

// Covariance of the linear SEM x = B^T x + eps: (I-B)^{-T} Omega (I-B)^{-1}.
CovarianceMatrix sigma_of(const WeightedDag& b, const DiagonalVariances& omega);

struct DagCheck {
    bool is_dag = false;
    // filled when is_dag; nodes listed before their parents
    std::vector<int> order;
};

// Acyclicity of the support {(i,j): |w(i,j)| > kSupportTol}. The returned
// order is the lexicographically smallest sequence placing each node before
// its parents (sources last).
DagCheck is_dag(const Matrix& weights);

// n i.i.d. rows from N(0, Sigma); deterministic in (seed).
DataMatrix sample_gaussian(const CovarianceMatrix& sigma, int n, std::uint64_t seed);

// All sequences consistent with the support of b (nodes before parents),
// stopping after limit sequences. Used for estimated-permutation checks.
std::vector<std::vector<int>> topological_sorts(const WeightedDag& b, std::size_t limit);

// Number of such sequences, saturating at cap.
struct SortCount {
    std::uint64_t count = 0;
    bool capped = false;
};
SortCount count_topological_sorts(const WeightedDag& b, std::uint64_t cap);

}  // namespace sbdag
