#include "sbdag/dag_search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbdag/equivalence.hpp"
#include "sbdag/linalg.hpp"
#include "sbdag/parallel.hpp"
#include "sbdag/rng.hpp"

namespace sbdag {

namespace {

int effective_threads(const SearchOptions& opts) {
    return opts.threads > 0 ? opts.threads : global_threads();
}

int table_restarts(const PenaltySpec& penalty, const SearchOptions& opts) {
    switch (penalty.family) {
        case PenaltyFamily::MCP:
        case PenaltyFamily::SCAD:
        case PenaltyFamily::CappedL1:
            return std::max(1, opts.dp_restarts);
        default:
            return 1;
    }
}

// re-solve column j on the exact support t and fill the result slots
void fill_column(const DataMatrix& x, int j, const IndexSet& t, const PenaltySpec& penalty,
                 const PlsOptions& popts, int restarts, std::uint64_t seed, Matrix& b,
                 std::vector<double>& col_obj, Vector& var_hat, bool& ridge, bool& converged) {
    const GramProblem gp(x.column(j), x.matrix());
    detail::FixedFit fit = detail::fit_fixed_support_gram(gp, t, penalty, popts, restarts, seed);
    Vector theta = Vector::Zero(x.dim());
    for (std::size_t a = 0; a < t.size(); ++a) theta[t[a]] = fit.theta[static_cast<int>(a)];
    const Vector resid = x.column(j) - x.matrix() * theta;
    col_obj[j] = resid.squaredNorm() / (2.0 * x.n()) + penalty_vector(penalty, theta);
    var_hat[j] = resid.squaredNorm() / x.n();
    b.col(j) = theta;
    ridge = ridge || fit.ridge;
    converged = converged && fit.converged;
}

FitResult assemble(Matrix b, std::vector<double> col_obj, Vector var_hat,
                   const PenaltySpec& penalty, const std::string& mode, bool converged,
                   bool ridge, std::uint64_t sort_cap) {
    FitResult res(WeightedDag(std::move(b)));
    res.column_objectives = std::move(col_obj);
    res.objective = 0.0;
    for (double v : res.column_objectives) res.objective += v;
    res.variances_hat = std::move(var_hat);
    res.penalty = penalty;
    res.mode = mode;
    res.converged = converged;
    res.ridge_stabilized = ridge;
    EstimatedPermutations est = estimated_permutations(res.b_hat, sort_cap);
    res.canonical_order = std::move(est.canonical_order);
    res.permutation_count = est.count;
    res.permutation_count_capped = est.capped;
    return res;
}

}  // namespace

double pls_score(const DataMatrix& x, const Matrix& b, const PenaltySpec& penalty) {
    if (b.rows() != x.dim() || b.cols() != x.dim())
        throw DimensionMismatch("score matrix dimension mismatch");
    const double n = static_cast<double>(x.n());
    return (x.matrix() - x.matrix() * b).squaredNorm() / (2.0 * n) + penalty_matrix(penalty, b);
}

FitResult restricted_minimizer(const DataMatrix& x, const Permutation& pi,
                               const PenaltySpec& penalty, const SearchOptions& opts) {
    const int p = x.dim();
    if (pi.size() != p) throw DimensionMismatch("permutation size does not match data");
    Matrix b = Matrix::Zero(p, p);
    std::vector<double> col_obj(p, 0.0);
    Vector var_hat(p);
    bool ridge = false, converged = true;

    std::vector<PlsSolution> sols(p);
    const int threads = effective_threads(opts);
    parallel_for_index(static_cast<std::uint64_t>(p), threads, [&](std::uint64_t j) {
        IndexSet s = candidate_parents(pi, static_cast<int>(j));
        sols[j] = neighbourhood_fit(x, static_cast<int>(j), s, penalty, opts.pls);
    });
    for (int j = 0; j < p; ++j) {
        b.col(j) = sols[j].theta;
        col_obj[j] = sols[j].objective;
        const Vector resid = x.column(j) - x.matrix() * sols[j].theta;
        var_hat[j] = resid.squaredNorm() / x.n();
        ridge = ridge || sols[j].ridge_stabilized;
        converged = converged && sols[j].converged;
    }
    return assemble(std::move(b), std::move(col_obj), std::move(var_hat), penalty,
                    "restricted", converged, ridge, opts.sort_count_cap);
}

FitResult global_minimizer_dp(const DataMatrix& x, const PenaltySpec& penalty,
                              const SearchOptions& opts) {
    const int p = x.dim();
    if (p > opts.dp_cap) {
        std::ostringstream os;
        os << "dp mode supports p <= " << opts.dp_cap << ", got " << p;
        throw DpCapExceeded(os.str());
    }
    if (p - 1 > opts.pls.exact_cap) {
        throw ExactCapExceeded("dp local scores need |S| <= exact cap");
    }
    const std::size_t full = (std::size_t{1} << p) - 1;
    const int restarts = table_restarts(penalty, opts);

    // local score tables: best_j[C] = optimal restricted value of node j on
    // candidate set C, best_t_j[C] the achieving support; masks use p bits
    // and entries with bit j set stay unused
    std::vector<std::vector<double>> best(p);
    std::vector<std::vector<std::uint32_t>> best_t(p);
    const int threads = effective_threads(opts);
    std::vector<int> all_nodes(p);
    for (int j = 0; j < p; ++j) all_nodes[j] = j;

    parallel_for_index(static_cast<std::uint64_t>(p), threads, [&](std::uint64_t ju) {
        const int j = static_cast<int>(ju);
        const GramProblem gp(x.column(j), x.matrix());
        std::vector<int> local;  // ambient indices of the p-1 candidates
        for (int i = 0; i < p; ++i)
            if (i != j) local.push_back(i);
        detail::SubsetScan scan = detail::scan_subsets(gp, local, penalty, opts.pls, restarts,
                                                       splitmix64(opts.pls.seed) ^ (ju + 1));
        // re-index local masks to ambient p-bit masks
        best[j].assign(std::size_t{1} << p, 0.0);
        best_t[j].assign(std::size_t{1} << p, 0);
        const std::size_t nlocal = scan.best.size();
        for (std::size_t lm = 0; lm < nlocal; ++lm) {
            std::size_t am = 0;
            for (std::size_t a = 0; a < local.size(); ++a)
                if (lm & (std::size_t{1} << a)) am |= (std::size_t{1} << local[a]);
            best[j][am] = scan.best[lm];
            std::uint32_t bt = 0;
            for (std::size_t a = 0; a < local.size(); ++a)
                if (scan.best_t[lm] & (1u << a)) bt |= (1u << local[a]);
            best_t[j][am] = bt;
        }
    });

    // order dynamic programming: M(W) = min_j [ best_j(W \ j) + M(W \ j) ];
    // the chosen j is a sink of the sub-DAG on W, smallest index wins ties
    std::vector<double> m(full + 1, 0.0);
    std::vector<int> choice(full + 1, -1);
    for (std::size_t w = 1; w <= full; ++w) {
        double bestval = std::numeric_limits<double>::infinity();
        int bestj = -1;
        for (int j = 0; j < p; ++j) {
            if (!(w & (std::size_t{1} << j))) continue;
            const std::size_t rest = w & ~(std::size_t{1} << j);
            const double v = best[j][rest] + m[rest];
            if (v < bestval) {
                bestval = v;
                bestj = j;
            }
        }
        m[w] = bestval;
        choice[w] = bestj;
    }

    // backtrack: chosen node at each step precedes the remaining ones
    Matrix b = Matrix::Zero(p, p);
    std::vector<double> col_obj(p, 0.0);
    Vector var_hat(p);
    bool ridge = false, converged = true;
    std::size_t w = full;
    while (w != 0) {
        const int j = choice[w];
        const std::size_t rest = w & ~(std::size_t{1} << j);
        const std::uint32_t tmask = best_t[j][rest];
        IndexSet t;
        std::size_t local_mask = 0;
        for (int i = 0; i < p; ++i) {
            if (i == j || !(tmask & (1u << i))) continue;
            t.push_back(i);
            local_mask |= (std::size_t{1} << (i < j ? i : i - 1));
        }
        // same per-support seed the table solve used, so the refit reproduces it
        const std::uint64_t scan_seed =
            splitmix64(opts.pls.seed) ^ (static_cast<std::uint64_t>(j) + 1);
        fill_column(x, j, t, penalty, opts.pls, restarts, splitmix64(scan_seed) ^ local_mask, b,
                    col_obj, var_hat, ridge, converged);
        w = rest;
    }
    return assemble(std::move(b), std::move(col_obj), std::move(var_hat), penalty, "dp-exact",
                    converged, ridge, opts.sort_count_cap);
}

FitResult exhaustive_global(const DataMatrix& x, const PenaltySpec& penalty,
                            const SearchOptions& opts) {
    const int p = x.dim();
    if (p > 4) throw TooLarge("exhaustive search supports p <= 4");
    const int restarts = table_restarts(penalty, opts);

    // cache fixed-support values per (node, parent mask)
    std::vector<std::vector<double>> value(p);
    for (int j = 0; j < p; ++j) {
        const GramProblem gp(x.column(j), x.matrix());
        value[j].assign(std::size_t{1} << p, std::numeric_limits<double>::infinity());
        for (std::size_t mask = 0; mask < (std::size_t{1} << p); ++mask) {
            if (mask & (std::size_t{1} << j)) continue;
            IndexSet t;
            for (int i = 0; i < p; ++i)
                if (mask & (std::size_t{1} << i)) t.push_back(i);
            detail::FixedFit fit = detail::fit_fixed_support_gram(
                gp, t, penalty, opts.pls, restarts, splitmix64(opts.pls.seed) ^ mask);
            value[j][mask] = fit.objective;
        }
    }

    // enumerate every off-diagonal support pattern and keep the acyclic ones
    const int ncells = p * (p - 1);
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j) cells.emplace_back(i, j);

    double bestval = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_parents(p, 0);
    for (std::size_t pat = 0; pat < (std::size_t{1} << ncells); ++pat) {
        std::vector<std::size_t> parents(p, 0);
        Matrix support = Matrix::Zero(p, p);
        for (int cidx = 0; cidx < ncells; ++cidx) {
            if (pat & (std::size_t{1} << cidx)) {
                auto [i, j] = cells[static_cast<std::size_t>(cidx)];
                parents[j] |= (std::size_t{1} << i);
                support(i, j) = 1.0;
            }
        }
        if (!is_dag(support).is_dag) continue;
        double total = 0.0;
        for (int j = 0; j < p; ++j) total += value[j][parents[j]];
        if (total < bestval) {
            bestval = total;
            best_parents = parents;
        }
    }

    Matrix b = Matrix::Zero(p, p);
    std::vector<double> col_obj(p, 0.0);
    Vector var_hat(p);
    bool ridge = false, converged = true;
    for (int j = 0; j < p; ++j) {
        IndexSet t;
        for (int i = 0; i < p; ++i)
            if (best_parents[j] & (std::size_t{1} << i)) t.push_back(i);
        fill_column(x, j, t, penalty, opts.pls, restarts,
                    splitmix64(opts.pls.seed) ^ best_parents[j], b, col_obj, var_hat, ridge,
                    converged);
    }
    return assemble(std::move(b), std::move(col_obj), std::move(var_hat), penalty,
                    "exhaustive", converged, ridge, opts.sort_count_cap);
}

EstimatedPermutations estimated_permutations(const WeightedDag& b_hat, std::uint64_t cap) {
    EstimatedPermutations out;
    out.canonical_order = b_hat.reverse_topological_order();
    SortCount sc = count_topological_sorts(b_hat, cap);
    out.count = sc.count;
    out.capped = sc.capped;
    return out;
}

}  // namespace sbdag
