#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sbdag/pls.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

struct FitResult {
    explicit FitResult(WeightedDag b) : b_hat(std::move(b)) {}

    WeightedDag b_hat;
    double objective = 0.0;                 // total PLS score at b_hat
    std::vector<double> column_objectives;  // per-node pieces, sums to objective
    Vector variances_hat;                   // ||x_j - X beta_j||^2 / n
    std::vector<int> canonical_order;       // smallest sequence consistent with b_hat
    std::uint64_t permutation_count = 0;    // number of consistent sequences
    bool permutation_count_capped = false;
    PenaltySpec penalty;
    std::string mode;  // "restricted", "dp-exact", "exhaustive"
    bool converged = true;
    bool ridge_stabilized = false;
};

struct SearchOptions {
    PlsOptions pls;
    int dp_cap = 18;
    int dp_restarts = 3;  // fixed-support restarts for nonconvex families in table mode
    std::uint64_t sort_count_cap = 1000000;
    int threads = 0;  // 0 means use global_threads()
};

// matrix PLS score (1/2n)||X - X B||_F^2 + rho(B)
double pls_score(const DataMatrix& x, const Matrix& b, const PenaltySpec& penalty);

// One neighbourhood regression per column over the candidate sets of pi.
FitResult restricted_minimizer(const DataMatrix& x, const Permutation& pi,
                               const PenaltySpec& penalty, const SearchOptions& opts = {});

// Exact global minimizer over all DAGs: per-node local score tables over
// candidate subsets, then dynamic programming over orderings.
FitResult global_minimizer_dp(const DataMatrix& x, const PenaltySpec& penalty,
                              const SearchOptions& opts = {});

// Test oracle: direct minimization over every labeled DAG, p <= 4.
FitResult exhaustive_global(const DataMatrix& x, const PenaltySpec& penalty,
                            const SearchOptions& opts = {});

struct EstimatedPermutations {
    std::vector<int> canonical_order;
    std::uint64_t count = 0;
    bool capped = false;
};
EstimatedPermutations estimated_permutations(const WeightedDag& b_hat,
                                             std::uint64_t cap = 1000000);

}  // namespace sbdag
