#pragma once

#include <set>
#include <vector>

#include "sbdag/dag_search.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

// Pairwise conditional-independence triplet (i, j, S) with i < j canonical.
struct CiRelation {
    int i = 0;
    int j = 0;
    IndexSet cond;

    CiRelation() = default;
    CiRelation(int a, int b, IndexSet s);

    bool operator<(const CiRelation& o) const {
        if (i != o.i) return i < o.i;
        if (j != o.j) return j < o.j;
        return cond < o.cond;
    }
    bool operator==(const CiRelation& o) const {
        return i == o.i && j == o.j && cond == o.cond;
    }
};

using CiSet = std::set<CiRelation>;

// d-separation of i and j given S, via moralization of the ancestral
// subgraph and undirected reachability.
bool d_separated(const WeightedDag& g, int i, int j, const IndexSet& s);

// All (i, j, S) with i and j d-separated given S; p <= 12.
CiSet pairwise_ci_set(const WeightedDag& g, int max_p = 12);

// Gaussian ground truth: (i, j, S) is included iff the (i, j) entry of the
// inverse of Sigma restricted to {i, j} union S vanishes within 1e-9.
CiSet true_ci_set(const CovarianceMatrix& sigma, int max_p = 12);

// Union over a permutation collection of the CI sets of B(pi) (population
// mode) or of fitted restricted minimizers (sample mode).
CiSet union_ci_population(const CovarianceMatrix& sigma, const std::vector<Permutation>& k);
CiSet union_ci_sample(const DataMatrix& x, const std::vector<Permutation>& k,
                      const PenaltySpec& penalty, const SearchOptions& opts = {});

std::vector<Permutation> all_permutations(int p, int cap = 9);

// I-map plus edge-minimality: every single-edge deletion must break the
// inclusion I(G) within I(Sigma).
bool minimal_imap_check(const WeightedDag& g, const CovarianceMatrix& sigma, int max_p = 10);

}  // namespace sbdag
