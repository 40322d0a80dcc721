#include "sbdag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbdag/equivalence.hpp"
#include "sbdag/linalg.hpp"
#include "sbdag/pls.hpp"
#include "sbdag/rng.hpp"

namespace sbdag {

namespace {

const double* scale_grid(int& count) {
    // log grid from 1e-3 to 1e3, 25 points
    static double grid[25];
    static bool init = false;
    if (!init) {
        for (int k = 0; k < 25; ++k) grid[k] = std::pow(10.0, -3.0 + 6.0 * k / 24.0);
        init = true;
    }
    count = 25;
    return grid;
}

}  // namespace

GwResult gw_check(const Vector& w, const Matrix& z, const PenaltySpec& penalty, double delta,
                  int directions, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (w.size() != z.rows()) throw DimensionMismatch("noise length != design rows");
    const int m = static_cast<int>(z.cols());
    const double n = static_cast<double>(z.rows());

    double min_margin = std::numeric_limits<double>::infinity();
    auto probe = [&](const Vector& u) {
        if (u.cwiseAbs().maxCoeff() <= 0.0) return;
        const Vector zu = z * u;
        const double margin =
            delta * (zu.squaredNorm() / (2.0 * n) + penalty_vector(penalty, u)) -
            std::abs(w.dot(zu)) / n;
        min_margin = std::min(min_margin, margin);
    };

    int nscale = 0;
    const double* scales = scale_grid(nscale);

    // signed coordinate rays over the scale grid
    for (int i = 0; i < m; ++i) {
        Vector u = Vector::Zero(m);
        for (int k = 0; k < nscale; ++k) {
            u[i] = scales[k];
            probe(u);
            u[i] = -scales[k];
            probe(u);
        }
    }
    // correlation direction u = c Z^T w, where the inner product peaks
    const Vector ztw = z.transpose() * w / n;
    if (ztw.cwiseAbs().maxCoeff() > 0.0) {
        const Vector dir = ztw / ztw.cwiseAbs().maxCoeff();
        for (int k = 0; k < nscale; ++k) probe(dir * scales[k]);
    }
    // random sparse directions, each scanned over scales
    Rng rng(seed, 0x6111);
    for (int r = 0; r < directions; ++r) {
        Vector u = Vector::Zero(m);
        const int nnz = rng.uniform_int(1, std::max(1, std::min(m, 4)));
        for (int t = 0; t < nnz; ++t) u[rng.uniform_int(0, m - 1)] = rng.normal();
        const double norm = u.cwiseAbs().maxCoeff();
        if (norm <= 0.0) continue;
        u /= norm;
        for (int k = 0; k < nscale; ++k) probe(u * scales[k]);
    }

    GwResult res;
    res.min_margin = min_margin;
    res.holds_on_sample = (min_margin >= 0.0);
    return res;
}

ReEstimate re_estimate(const Matrix& z, const IndexSet& a, double xi, int directions,
                       std::uint64_t seed) {
    const int m = static_cast<int>(z.cols());
    if (a.empty()) throw InvalidArgument("restricted set A must be nonempty");
    for (int idx : a)
        if (idx < 0 || idx >= m) throw IndexError("restricted set index out of range");
    const double n = static_cast<double>(z.rows());
    const Matrix g = z.transpose() * z / n;

    std::vector<bool> in_a(m, false);
    for (int idx : a) in_a[idx] = true;
    std::vector<int> ac;
    for (int i = 0; i < m; ++i)
        if (!in_a[i]) ac.push_back(i);

    auto in_cone = [&](const Vector& u) {
        double na = 0.0, nac = 0.0;
        for (int i = 0; i < m; ++i) (in_a[i] ? na : nac) += std::abs(u[i]);
        return nac <= xi * na * (1.0 + 1e-12) + 1e-300;
    };
    double kappa = std::numeric_limits<double>::infinity();
    auto probe = [&](const Vector& u) {
        const double nu = u.squaredNorm();
        if (nu <= 0.0) return;
        kappa = std::min(kappa, u.dot(g * u) / nu);
    };

    // coordinate rays inside A
    for (int idx : a) {
        Vector u = Vector::Zero(m);
        u[idx] = 1.0;
        probe(u);
    }
    // spectral directions that happen to fall in the cone
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    for (int k = 0; k < m; ++k) {
        const Vector v = eig.eigenvectors().col(k);
        if (in_cone(v)) probe(v);
    }
    // boundary rays with single-coordinate off-A mass
    Rng rng(seed, 0x4e57);
    for (int idx : ac) {
        for (int rep = 0; rep < 8; ++rep) {
            Vector u = Vector::Zero(m);
            double na = 0.0;
            for (int ai : a) {
                u[ai] = rng.normal();
                na += std::abs(u[ai]);
            }
            u[idx] = (rng.bernoulli(0.5) ? 1.0 : -1.0) * xi * na;
            probe(u);
        }
    }
    // random rays: interior and boundary
    for (int r = 0; r < directions; ++r) {
        Vector u = Vector::Zero(m);
        double na = 0.0;
        for (int ai : a) {
            u[ai] = rng.normal();
            na += std::abs(u[ai]);
        }
        if (!ac.empty()) {
            Vector mass(static_cast<int>(ac.size()));
            double total = 0.0;
            for (int t = 0; t < mass.size(); ++t) {
                mass[t] = rng.uniform();
                total += mass[t];
            }
            const double frac = rng.bernoulli(0.5) ? 1.0 : rng.uniform();  // boundary half the time
            const double budget = frac * xi * na;
            if (total > 0.0) {
                for (std::size_t t = 0; t < ac.size(); ++t) {
                    u[ac[t]] = (rng.bernoulli(0.5) ? 1.0 : -1.0) * budget * mass[static_cast<int>(t)] / total;
                }
            }
        }
        probe(u);
    }

    ReEstimate out;
    out.kappa_sq = kappa;
    return out;
}

MsExponent empirical_ms_exponent(const Matrix& z, const Vector& theta, double sigma_sq,
                                 const PenaltySpec& penalty, int replicates,
                                 std::uint64_t seed) {
    if (replicates < 1) throw InvalidArgument("replicates must be positive");
    if (theta.size() != z.cols()) throw DimensionMismatch("theta length != design columns");
    if (sigma_sq < 0.0) throw NegativeInput("noise variance must be nonnegative");
    const int m = static_cast<int>(z.cols());
    const int n = static_cast<int>(z.rows());

    PlsOptions popts;
    popts.mode = SolverMode::Exact;
    if (m > popts.exact_cap) throw ExactCapExceeded("design has more columns than the exact cap");

    IndexSet truth;
    for (int i = 0; i < m; ++i)
        if (std::abs(theta[i]) > kSupportTol) truth.push_back(i);
    IndexSet full;
    for (int i = 0; i < m; ++i) full.push_back(i);

    const double sd = std::sqrt(sigma_sq);
    const Vector mean = z * theta;
    MsExponent out;
    out.replicates = replicates;
    for (int r = 0; r < replicates; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r) + 17);
        Vector y = mean;
        for (int i = 0; i < n; ++i) y[i] += sd * rng.normal();
        popts.seed = splitmix64(seed) ^ static_cast<std::uint64_t>(r);
        PlsSolution sol = restricted_pls(y, z, full, penalty, popts);
        const bool fail = sol.multiple_optima || sol.support != truth;
        if (fail) ++out.failures;
    }
    out.failure_rate = static_cast<double>(out.failures) / replicates;
    double rate = out.failure_rate;
    if (out.failures == 0) {
        rate = 1.0 / replicates;
        out.rate_floored = true;
    }
    out.neg_log_rate = -std::log(rate);
    return out;
}

MsExponent empirical_ms_exponent(const CovarianceMatrix& sigma, int n, const Vector& theta,
                                 double sigma_sq, const PenaltySpec& penalty, int replicates,
                                 std::uint64_t seed) {
    const DataMatrix z = sample_gaussian(sigma, n, splitmix64(seed) ^ 0xde516eULL);
    return empirical_ms_exponent(z.matrix(), theta, sigma_sq, penalty, replicates, seed);
}

Envelope concentration_envelope(int n, double u) {
    if (!(u > 0.0)) throw InvalidArgument("u must be positive");
    if (n < 1) throw InvalidArgument("n must be positive");
    Envelope e;
    const double nd = static_cast<double>(n);
    e.h = -u * u / nd + 2.0 * u / std::sqrt(nd + 1.0) + 1.0 / (nd + 1.0);
    e.big_h = u * u / nd + 2.0 * u / std::sqrt(nd);
    return e;
}

ConditionReport condition_report(const CovarianceMatrix& sigma, const PenaltySpec& penalty,
                                 int n, std::uint64_t seed) {
    const int p = sigma.dim();
    ConditionReport rep;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma.matrix());
    rep.lambda_min_sigma = eig.eigenvalues().minCoeff();

    auto [d, betamin] = sparsity_parameters(sigma);
    rep.d_sigma = d;
    rep.betamin_sigma = betamin;

    const TheoryConstants tc = theory_constants(penalty);
    if (tc.rho_prime0_defined && tc.rho_prime0 > 0.0 && std::isfinite(betamin)) {
        rep.betamin_ratio = penalty_value(penalty, betamin) * rep.lambda_min_sigma /
                            (tc.rho_prime0 * tc.rho_prime0);
    }

    MinTraceResult mt = min_trace_permutation(sigma);
    rep.mintrace_degenerate = (mt.dag.edge_count() == 0);
    const double rate = std::sqrt((d + 1.0) * std::log(static_cast<double>(p)) / n);
    if (!rep.mintrace_degenerate && rate > 0.0) {
        rep.mintrace_ratio =
            penalty_matrix(penalty, mt.dag.weights()) / mt.trace / rate;
    }

    // worst-case trace ratio over the enumerated orderings with a different trace
    double worst = 0.0;
    const std::uint64_t total = factorial(p);
    if (p <= 9) {
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            auto [b, om] = dag_for_permutation(sigma, permutation_from_index(p, idx));
            const double tr = om.trace();
            if (std::abs(tr - mt.trace) > 1e-9) worst = std::max(worst, mt.trace / tr);
        }
    } else {
        throw EnumerationTooLarge("condition report needs p <= 9");
    }
    rep.mintrace_gap = (worst > 0.0) ? (1.0 - worst) : 1.0;

    // sampled width and restricted-eigenvalue evidence on one draw per node,
    // at the full candidate sets
    const DataMatrix x = sample_gaussian(sigma, std::max(n, 2), seed);
    bool holds = true;
    double margin = std::numeric_limits<double>::infinity();
    double kappa = std::numeric_limits<double>::infinity();
    std::string method;
    for (int j = 0; j < p; ++j) {
        IndexSet s;
        for (int i = 0; i < p; ++i)
            if (i != j) s.push_back(i);
        const SemCoefficients sem = sem_coefficients(sigma, j, s);
        Matrix zs(x.n(), p - 1);
        for (std::size_t a = 0; a < s.size(); ++a) zs.col(static_cast<int>(a)) = x.column(s[a]);
        const Vector w = x.column(j) - x.matrix() * sem.beta;
        GwResult gw = gw_check(w, zs, penalty, 0.5, 100, splitmix64(seed) ^ (j + 1));
        holds = holds && gw.holds_on_sample;
        margin = std::min(margin, gw.min_margin);
        if (!sem.support.empty()) {
            IndexSet a_local;
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (std::find(sem.support.begin(), sem.support.end(), s[t]) != sem.support.end())
                    a_local.push_back(static_cast<int>(t));
            }
            ReEstimate re = re_estimate(zs, a_local, 3.0, 2000, splitmix64(seed) ^ (j + 31));
            kappa = std::min(kappa, re.kappa_sq);
            method = re.method;
        }
    }
    rep.gw_holds = holds;
    rep.gw_margin = margin;
    rep.re_kappa_sq = std::isfinite(kappa) ? kappa : rep.lambda_min_sigma;
    rep.re_method = method.empty() ? "population-eigenvalue" : method;
    return rep;
}

}  // namespace sbdag
