#pragma once

#include <cstdint>
#include <vector>

#include "sbdag/penalty.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

enum class SolverMode { Exact, CoordinateDescent };

struct PlsOptions {
    SolverMode mode = SolverMode::Exact;
    int exact_cap = 20;     // max |S| for support enumeration
    int restarts = 5;       // multi-start count for nonconvex cd
    double tol = 1e-10;     // relative objective change per sweep
    int max_sweeps = 10000;
    std::uint64_t seed = 0;  // random restarts
};

struct PlsSolution {
    Vector theta;            // ambient length m, supp(theta) inside S
    double objective = 0.0;  // (1/2n)||y - Z theta||^2 + rho(theta)
    IndexSet support;        // indices with |theta_i| > kSupportTol
    std::string solver;      // "exact-enumeration" or "coordinate-descent"
    bool converged = true;
    int restarts_used = 0;
    bool ridge_stabilized = false;  // rank-deficient Gram, ridge fallback used
    bool multiple_optima = false;   // exact mode found distinct tied optima
};

// Least squares data reduced to inner products. All solver arithmetic runs on
// (G, c, yy) so the cost per sweep is independent of n.
struct GramProblem {
    Matrix g;    // Z^T Z / n
    Vector c;    // Z^T y / n
    double yy;   // y^T y / n
    int m = 0;
    GramProblem() = default;
    GramProblem(const Vector& y, const Matrix& z);
};

// Minimize (1/2n)||y - Z theta||^2 + rho(theta) over supp(theta) inside the
// exact coordinate set T. L0 reduces to least squares on T; other families
// run coordinate descent from the least-squares start.
PlsSolution fixed_support_solve(const Vector& y, const Matrix& z, const IndexSet& t,
                                const PenaltySpec& penalty, const PlsOptions& opts = {});

// Support-restricted PLS: exact mode enumerates supports T inside S via the
// subset recursion and certifies a global minimizer; cd mode returns the best
// stationary point over multi-start coordinate descent.
PlsSolution restricted_pls(const Vector& y, const Matrix& z, const IndexSet& s,
                           const PenaltySpec& penalty, const PlsOptions& opts = {});

// Neighbourhood regression of node j on candidate set S (which must exclude
// j); coefficient j is structurally zero.
PlsSolution neighbourhood_fit(const DataMatrix& x, int j, const IndexSet& s,
                              const PenaltySpec& penalty, const PlsOptions& opts = {});

namespace detail {

struct FixedFit {
    Vector theta;      // local coordinates, aligned with t
    double objective;  // gram-form objective
    bool ridge = false;
    bool converged = true;
};

// workhorse shared by the public entry points and the subset scans
FixedFit fit_fixed_support_gram(const GramProblem& gp, const std::vector<int>& t,
                                const PenaltySpec& penalty, const PlsOptions& opts,
                                int restarts, std::uint64_t seed);

// exact scalar minimizer of  0.5*a*t^2 - zhat*t + rho(|t|)
double scalar_penalized_minimum(double a, double zhat, const PenaltySpec& penalty);

// Tables over all subsets of the local index set: value[T] is the
// fixed-support optimum on T, best[T] = min over supports inside T (the
// recursion best(C) = min(value(C), min_i best(C\{i}))), best_t[T] the
// achieving support, actual_supp[T] the support of value[T]'s solution after
// thresholding.
struct SubsetScan {
    std::vector<double> value;
    std::vector<double> best;
    std::vector<std::uint32_t> best_t;
    std::vector<std::uint32_t> actual_supp;
};
SubsetScan scan_subsets(const GramProblem& gp, const std::vector<int>& local_index,
                        const PenaltySpec& penalty, const PlsOptions& opts, int restarts,
                        std::uint64_t seed);

// lexicographic order on index sets encoded as bitmasks
bool support_less(std::uint32_t a, std::uint32_t b);

double gram_objective(const GramProblem& gp, const std::vector<int>& t, const Vector& theta,
                      const PenaltySpec& penalty);

}  // namespace detail

}  // namespace sbdag
