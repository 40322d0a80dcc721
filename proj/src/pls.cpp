#include "sbdag/pls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sbdag/rng.hpp"

namespace sbdag {

GramProblem::GramProblem(const Vector& y, const Matrix& z) {
    if (y.size() != z.rows()) throw DimensionMismatch("response length != design rows");
    const double n = static_cast<double>(z.rows());
    g = (z.transpose() * z) / n;
    c = (z.transpose() * y) / n;
    yy = y.squaredNorm() / n;
    m = static_cast<int>(z.cols());
}

namespace detail {

bool support_less(std::uint32_t a, std::uint32_t b) {
    // compare as ascending index lists; {0,2} < {1}
    while (a != 0 || b != 0) {
        if (a == 0) return true;   // a is a strict prefix
        if (b == 0) return false;
        const int ia = __builtin_ctz(a), ib = __builtin_ctz(b);
        if (ia != ib) return ia < ib;
        a &= a - 1;
        b &= b - 1;
    }
    return false;
}

double gram_objective(const GramProblem& gp, const std::vector<int>& t, const Vector& theta,
                      const PenaltySpec& penalty) {
    const int k = static_cast<int>(t.size());
    double quad = 0.0, lin = 0.0, pen = 0.0;
    for (int a = 0; a < k; ++a) {
        lin += theta[a] * gp.c[t[a]];
        pen += penalty_value(penalty, std::abs(theta[a]));
        for (int b = 0; b < k; ++b) quad += theta[a] * gp.g(t[a], t[b]) * theta[b];
    }
    return 0.5 * gp.yy - lin + 0.5 * quad + pen;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Piece {
    double lo, hi;
    double aq;  // quadratic coefficient minus curvature relief from the penalty
    double bq;  // effective linear coefficient
};

// Exact minimum of q(t) = 0.5*a*t^2 - z*t + rho(t) over t >= 0. Every family
// is piecewise quadratic in t, so on each piece [lo, hi] the objective is
// 0.5*aq*t^2 - bq*t + const and the minimum sits at the clamped stationary
// point bq/aq (when aq > 0) or at an endpoint:
//   mcp       [0, g*l]    aq = a - 1/g        bq = z - l
//             [g*l, inf)  aq = a              bq = z
//   scad      [0, l]      aq = a              bq = z - l
//             [l, g*l]    aq = a - 1/(g-1)    bq = z - g*l/(g-1)
//             [g*l, inf)  aq = a              bq = z
//   l1        [0, inf)    aq = a              bq = z - l
//   l0        split at the support tolerance, constant penalty either side
//   capped-l1 [0, g*l/2]  aq = a              bq = z - l
//             [g*l/2,inf) aq = a              bq = z
// Evaluating q exactly at each candidate keeps every sweep a true descent
// step even when a piece is concave (aq <= 0).
double nonneg_minimum(double a, double z, const PenaltySpec& s, double& best_val) {
    const double lam = s.lambda, gam = s.gamma;
    Piece pieces[3];
    int np = 0;
    switch (s.family) {
        case PenaltyFamily::MCP:
            pieces[np++] = {0.0, gam * lam, a - 1.0 / gam, z - lam};
            pieces[np++] = {gam * lam, kInf, a, z};
            break;
        case PenaltyFamily::SCAD:
            pieces[np++] = {0.0, lam, a, z - lam};
            pieces[np++] = {lam, gam * lam, a - 1.0 / (gam - 1.0), z - gam * lam / (gam - 1.0)};
            pieces[np++] = {gam * lam, kInf, a, z};
            break;
        case PenaltyFamily::L1:
            pieces[np++] = {0.0, kInf, a, z - lam};
            break;
        case PenaltyFamily::L0:
            pieces[np++] = {0.0, kSupportTol, a, z};
            pieces[np++] = {kSupportTol, kInf, a, z};
            break;
        case PenaltyFamily::CappedL1:
            pieces[np++] = {0.0, 0.5 * gam * lam, a, z - lam};
            pieces[np++] = {0.5 * gam * lam, kInf, a, z};
            break;
    }

    auto eval = [&](double t) { return 0.5 * a * t * t - z * t + penalty_value(s, t); };
    double best_t = 0.0;
    best_val = 0.0;  // q(0) = 0
    auto consider = [&](double t) {
        if (!(t >= 0.0) || !std::isfinite(t)) return;
        const double v = eval(t);
        if (v < best_val) {
            best_val = v;
            best_t = t;
        }
    };
    for (int k = 0; k < np; ++k) {
        const Piece& pc = pieces[k];
        if (pc.lo >= pc.hi) continue;
        consider(pc.lo);
        if (std::isfinite(pc.hi)) consider(pc.hi);
        if (pc.aq > 0.0) {
            const double st = pc.bq / pc.aq;
            consider(std::clamp(st, pc.lo, std::isfinite(pc.hi) ? pc.hi : st));
        }
    }
    return best_t;
}

}  // namespace

double scalar_penalized_minimum(double a, double zhat, const PenaltySpec& penalty) {
    if (!(a > 1e-300)) return 0.0;  // all-zero design column
    double vp, vm;
    const double tp = nonneg_minimum(a, zhat, penalty, vp);
    const double tm = nonneg_minimum(a, -zhat, penalty, vm);
    if (vm < vp) return -tm;
    return tp;
}

namespace {

// least squares on T with ridge fallback when the sub-Gram is rank deficient
Vector gram_ols(const GramProblem& gp, const std::vector<int>& t, bool& ridge) {
    const int k = static_cast<int>(t.size());
    Matrix gtt(k, k);
    Vector ct(k);
    for (int a = 0; a < k; ++a) {
        ct[a] = gp.c[t[a]];
        for (int b = 0; b < k; ++b) gtt(a, b) = gp.g(t[a], t[b]);
    }
    Eigen::LDLT<Matrix> ldlt(gtt);
    bool bad = (ldlt.info() != Eigen::Success);
    if (!bad) {
        const Vector dv = ldlt.vectorD();
        const double dmax = dv.cwiseAbs().maxCoeff();
        const double dmin = dv.minCoeff();
        bad = !(dmin > 1e-12 * std::max(dmax, 1e-300));
    }
    if (bad) {
        ridge = true;
        const double r = 1e-10 * gp.g.trace() / std::max(gp.m, 1);
        gtt.diagonal().array() += std::max(r, 1e-300);
        ldlt.compute(gtt);
    }
    return ldlt.solve(ct);
}

struct CdResult {
    Vector theta;
    double objective;
    bool converged;
};

CdResult coordinate_descent(const GramProblem& gp, const std::vector<int>& t, Vector theta,
                            const PenaltySpec& penalty, double tol, int max_sweeps) {
    const int k = static_cast<int>(t.size());
    Vector gtheta = Vector::Zero(k);  // (G_TT theta)
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) gtheta[a] += gp.g(t[a], t[b]) * theta[b];

    double prev = gram_objective(gp, t, theta, penalty);
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int a = 0; a < k; ++a) {
            const double aii = gp.g(t[a], t[a]);
            const double zhat = gp.c[t[a]] - gtheta[a] + aii * theta[a];
            const double tnew = scalar_penalized_minimum(aii, zhat, penalty);
            const double delta = tnew - theta[a];
            if (delta != 0.0) {
                for (int b = 0; b < k; ++b) gtheta[b] += gp.g(t[b], t[a]) * delta;
                theta[a] = tnew;
            }
        }
        const double cur = gram_objective(gp, t, theta, penalty);
        if (cur > prev + 1e-9 * std::max(1.0, std::abs(prev))) {
            throw std::logic_error("coordinate descent objective increased");
        }
        if (std::abs(prev - cur) <= tol * std::max(1.0, std::abs(prev))) {
            prev = cur;
            converged = true;
            break;
        }
        prev = cur;
    }
    return {std::move(theta), prev, converged};
}

std::uint32_t local_support_mask(const Vector& theta) {
    std::uint32_t m = 0;
    for (int a = 0; a < theta.size(); ++a)
        if (std::abs(theta[a]) > kSupportTol) m |= (1u << a);
    return m;
}

}  // namespace

FixedFit fit_fixed_support_gram(const GramProblem& gp, const std::vector<int>& t,
                                const PenaltySpec& penalty, const PlsOptions& opts, int restarts,
                                std::uint64_t seed) {
    FixedFit out;
    const int k = static_cast<int>(t.size());
    if (k == 0) {
        out.theta = Vector();
        out.objective = 0.5 * gp.yy;
        return out;
    }
    Vector ols = gram_ols(gp, t, out.ridge);

    if (penalty.family == PenaltyFamily::L0) {
        out.theta = ols;
        out.objective = gram_objective(gp, t, ols, penalty);
        return out;
    }

    const bool convex = (penalty.family == PenaltyFamily::L1);
    const int nstarts = convex ? 1 : std::max(1, restarts);
    const double scale = std::max(1e-3, ols.cwiseAbs().maxCoeff());
    Rng rng(seed, 0x9d5f);

    bool have = false;
    double best_obj = 0.0;
    std::uint32_t best_supp = 0;
    for (int r = 0; r < nstarts; ++r) {
        Vector start;
        if (r == 0) {
            start = ols;
        } else if (r == 1) {
            start = Vector::Zero(k);
        } else {
            start = Vector(k);
            for (int a = 0; a < k; ++a) start[a] = scale * rng.normal();
        }
        CdResult res = coordinate_descent(gp, t, std::move(start), penalty, opts.tol,
                                          opts.max_sweeps);
        const std::uint32_t supp = local_support_mask(res.theta);
        const bool better =
            !have || res.objective < best_obj ||
            (res.objective == best_obj && support_less(supp, best_supp));
        if (better) {
            have = true;
            best_obj = res.objective;
            best_supp = supp;
            out.theta = std::move(res.theta);
            out.objective = res.objective;
            out.converged = res.converged;
        }
    }
    return out;
}

SubsetScan scan_subsets(const GramProblem& gp, const std::vector<int>& local_index,
                        const PenaltySpec& penalty, const PlsOptions& opts, int restarts,
                        std::uint64_t seed) {
    const int k = static_cast<int>(local_index.size());
    if (k > 25) throw ExactCapExceeded("subset scan over more than 25 coordinates");
    const std::size_t nmask = std::size_t{1} << k;
    SubsetScan scan;
    scan.value.assign(nmask, 0.0);
    scan.best.assign(nmask, 0.0);
    scan.best_t.assign(nmask, 0);
    scan.actual_supp.assign(nmask, 0);

    std::vector<int> t;
    t.reserve(k);
    for (std::size_t mask = 0; mask < nmask; ++mask) {
        t.clear();
        for (int a = 0; a < k; ++a)
            if (mask & (std::size_t{1} << a)) t.push_back(local_index[a]);
        FixedFit fit = fit_fixed_support_gram(gp, t, penalty, opts, restarts,
                                              splitmix64(seed) ^ mask);
        scan.value[mask] = fit.objective;
        // actual support in local bit positions
        std::uint32_t supp = 0;
        for (std::size_t a = 0, b = 0; a < static_cast<std::size_t>(k); ++a) {
            if (!(mask & (std::size_t{1} << a))) continue;
            if (std::abs(fit.theta[static_cast<int>(b)]) > kSupportTol)
                supp |= (1u << a);
            ++b;
        }
        scan.actual_supp[mask] = supp;

        // best over supports inside mask
        double best = fit.objective;
        std::uint32_t best_t = static_cast<std::uint32_t>(mask);
        for (int a = 0; a < k; ++a) {
            if (!(mask & (std::size_t{1} << a))) continue;
            const std::size_t child = mask & ~(std::size_t{1} << a);
            const double cv = scan.best[child];
            if (cv < best || (cv == best && support_less(scan.best_t[child], best_t))) {
                best = cv;
                best_t = scan.best_t[child];
            }
        }
        scan.best[mask] = best;
        scan.best_t[mask] = best_t;
    }
    return scan;
}

}  // namespace detail

namespace {

void check_support_set(const IndexSet& s, int m) {
    int prev = -1;
    for (int idx : s) {
        if (idx < 0 || idx >= m) throw IndexError("support index out of range");
        if (idx <= prev) throw InvalidArgument("support set must be sorted and distinct");
        prev = idx;
    }
}

PlsSolution finalize(const Vector& y, const Matrix& z, const std::vector<int>& t,
                     const Vector& theta_local, const PenaltySpec& penalty) {
    PlsSolution sol;
    sol.theta = Vector::Zero(z.cols());
    for (std::size_t a = 0; a < t.size(); ++a)
        sol.theta[t[a]] = theta_local[static_cast<int>(a)];
    const double n = static_cast<double>(z.rows());
    sol.objective = (y - z * sol.theta).squaredNorm() / (2.0 * n) +
                    penalty_vector(penalty, sol.theta);
    for (int i = 0; i < sol.theta.size(); ++i)
        if (std::abs(sol.theta[i]) > kSupportTol) sol.support.push_back(i);
    return sol;
}

}  // namespace

PlsSolution fixed_support_solve(const Vector& y, const Matrix& z, const IndexSet& t,
                                const PenaltySpec& penalty, const PlsOptions& opts) {
    check_support_set(t, static_cast<int>(z.cols()));
    const GramProblem gp(y, z);
    detail::FixedFit fit = detail::fit_fixed_support_gram(gp, t, penalty, opts, 1, opts.seed);
    PlsSolution sol = finalize(y, z, t, fit.theta, penalty);
    sol.solver = (penalty.family == PenaltyFamily::L0) ? "exact-enumeration"
                                                       : "coordinate-descent";
    sol.converged = fit.converged;
    sol.ridge_stabilized = fit.ridge;
    sol.restarts_used = 1;
    return sol;
}

PlsSolution restricted_pls(const Vector& y, const Matrix& z, const IndexSet& s,
                           const PenaltySpec& penalty, const PlsOptions& opts) {
    const int m = static_cast<int>(z.cols());
    check_support_set(s, m);
    const int k = static_cast<int>(s.size());

    const bool exact = (opts.mode == SolverMode::Exact) ||
                       (penalty.family == PenaltyFamily::L0 && k <= opts.exact_cap);
    if (exact) {
        if (k > opts.exact_cap) {
            std::ostringstream os;
            os << "exact mode supports |S| <= " << opts.exact_cap << ", got " << k;
            throw ExactCapExceeded(os.str());
        }
        const GramProblem gp(y, z);
        const int table_restarts =
            (penalty.family == PenaltyFamily::MCP || penalty.family == PenaltyFamily::SCAD ||
             penalty.family == PenaltyFamily::CappedL1)
                ? std::max(1, opts.restarts)
                : 1;
        detail::SubsetScan scan =
            detail::scan_subsets(gp, s, penalty, opts, table_restarts, opts.seed);

        const std::size_t nmask = scan.value.size();
        std::size_t winner = 0;
        for (std::size_t mask = 1; mask < nmask; ++mask) {
            if (scan.value[mask] < scan.value[winner] ||
                (scan.value[mask] == scan.value[winner] &&
                 detail::support_less(scan.actual_supp[mask], scan.actual_supp[winner]))) {
                winner = mask;
            }
        }
        // distinct realized supports within 1e-10 of the optimum
        bool multi = false;
        for (std::size_t mask = 0; mask < nmask && !multi; ++mask) {
            if (scan.value[mask] <= scan.value[winner] + 1e-10 &&
                scan.actual_supp[mask] != scan.actual_supp[winner]) {
                multi = true;
            }
        }

        std::vector<int> t;
        for (int a = 0; a < k; ++a)
            if (winner & (std::size_t{1} << a)) t.push_back(s[a]);
        detail::FixedFit fit =
            detail::fit_fixed_support_gram(gp, t, penalty, opts, table_restarts,
                                           splitmix64(opts.seed) ^ winner);
        PlsSolution sol = finalize(y, z, t, fit.theta, penalty);
        sol.solver = "exact-enumeration";
        sol.converged = fit.converged;
        sol.ridge_stabilized = fit.ridge;
        sol.multiple_optima = multi;
        sol.restarts_used = table_restarts;
        return sol;
    }

    // stationary-point mode: multi-start coordinate descent over all of S
    const GramProblem gp(y, z);
    const int nstarts = (penalty.family == PenaltyFamily::L1) ? 1 : std::max(1, opts.restarts);
    detail::FixedFit fit =
        detail::fit_fixed_support_gram(gp, s, penalty, opts, nstarts, opts.seed);
    PlsSolution sol = finalize(y, z, s, fit.theta, penalty);
    sol.solver = "coordinate-descent";
    sol.converged = fit.converged;
    sol.ridge_stabilized = fit.ridge;
    sol.restarts_used = nstarts;
    return sol;
}

PlsSolution neighbourhood_fit(const DataMatrix& x, int j, const IndexSet& s,
                              const PenaltySpec& penalty, const PlsOptions& opts) {
    if (j < 0 || j >= x.dim()) throw IndexError("node index out of range");
    for (int idx : s)
        if (idx == j) throw IndexError("candidate set must exclude the response node");
    return restricted_pls(x.column(j), x.matrix(), s, penalty, opts);
}

}  // namespace sbdag
