#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbdag/dag_search.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

enum class VarianceMode { Equal, Random };
enum class LambdaRule { Fixed, Scaled };

struct SimConfig {
    int p = 6;
    int n = 1000;
    int d_target = 2;               // max parents per node
    double weight_lo = 0.5;         // magnitudes drawn from [lo, hi], signs random
    double weight_hi = 1.5;
    VarianceMode variance_mode = VarianceMode::Equal;
    double equal_variance = 1.0;    // omega_0^2 in equal mode
    double var_lo = 0.5;            // range in random mode
    double var_hi = 1.5;
    PenaltyFamily penalty_family = PenaltyFamily::MCP;
    double penalty_gamma = 3.0;
    LambdaRule lambda_rule = LambdaRule::Scaled;
    double lambda_value = 0.0;      // fixed rule
    double lambda_c = 1.0;          // scaled rule: c * sqrt((d+1) log p / n)
    int replicates = 100;
    std::uint64_t seed = 0;

    double lambda() const;
    PenaltySpec penalty() const;
    void validate() const;
};

struct SemInstance {
    WeightedDag b0;
    DiagonalVariances omega0;
    CovarianceMatrix sigma;
};

SemInstance random_dag_instance(const SimConfig& config, std::uint64_t replicate = 0);

struct ReplicateRecord {
    int replicate = 0;
    bool support_recovered = false;
    int hamming = 0;        // directed-edge mismatches
    double l1_err = 0.0;
    double l2_err = 0.0;
    double objective = 0.0;
    double tr_omega_hat = 0.0;
};

struct ExperimentReport {
    SimConfig config;
    std::vector<ReplicateRecord> records;
    double recovery_rate = 0.0;
    double mean_l1 = 0.0;
    double mean_l2 = 0.0;
    double mean_hamming = 0.0;
};

// Per replicate: draw an instance, sample, fit with the dynamic-programming
// estimator, and score against the target. Equal-variance mode compares
// against supp(B0); random-variance mode accepts a match with B(pi) for any
// consistent ordering pi of the fitted graph (orderings enumerated up to a
// cap).
ExperimentReport run_experiment(const SimConfig& config, const SearchOptions& opts = {});

// Least-squares slope of log mean l2 error against log n across swept runs
// (about -1/2 when the error scales like 1/sqrt(n)).
double error_vs_n_slope(const std::vector<ExperimentReport>& sweep);

}  // namespace sbdag
