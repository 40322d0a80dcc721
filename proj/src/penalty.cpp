#include "sbdag/penalty.hpp"

#include <algorithm>
#include <cmath>

namespace sbdag {

std::string family_name(PenaltyFamily f) {
    switch (f) {
        case PenaltyFamily::MCP: return "mcp";
        case PenaltyFamily::SCAD: return "scad";
        case PenaltyFamily::L1: return "l1";
        case PenaltyFamily::L0: return "l0";
        case PenaltyFamily::CappedL1: return "cappedl1";
    }
    return "?";
}

PenaltyFamily family_from_name(const std::string& name) {
    if (name == "mcp") return PenaltyFamily::MCP;
    if (name == "scad") return PenaltyFamily::SCAD;
    if (name == "l1") return PenaltyFamily::L1;
    if (name == "l0") return PenaltyFamily::L0;
    if (name == "cappedl1") return PenaltyFamily::CappedL1;
    throw InvalidArgument("unknown penalty family: " + name);
}

PenaltySpec::PenaltySpec(PenaltyFamily f, double lam, double gam)
    : family(f), lambda(lam), gamma(gam) {
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
    if (family == PenaltyFamily::MCP && !(gamma > 1.0))
        throw InvalidArgument("MCP requires gamma > 1");
    if (family == PenaltyFamily::SCAD && !(gamma > 2.0))
        throw InvalidArgument("SCAD requires gamma > 2");
    if (family == PenaltyFamily::CappedL1 && !(gamma > 0.0))
        throw InvalidArgument("capped-l1 requires gamma > 0");
}

double penalty_value(const PenaltySpec& s, double x) {
    if (x < 0.0) throw NegativeInput("penalty argument must be nonnegative");
    const double lam = s.lambda, gam = s.gamma;
    switch (s.family) {
        case PenaltyFamily::MCP:
            if (x < lam * gam) return lam * x - x * x / (2.0 * gam);
            return 0.5 * lam * lam * gam;
        case PenaltyFamily::SCAD:
            if (x <= lam) return lam * x;
            if (x <= gam * lam)
                return (2.0 * gam * lam * x - x * x - lam * lam) / (2.0 * (gam - 1.0));
            return 0.5 * lam * lam * (gam + 1.0);
        case PenaltyFamily::L1:
            return lam * x;
        case PenaltyFamily::L0:
            return x > kSupportTol ? 0.5 * lam * lam : 0.0;
        case PenaltyFamily::CappedL1:
            return std::min(lam * x, 0.5 * lam * lam * gam);
    }
    return 0.0;
}

double penalty_matrix(const PenaltySpec& s, const Matrix& b) {
    double total = 0.0;
    for (int j = 0; j < b.cols(); ++j)
        for (int i = 0; i < b.rows(); ++i) total += penalty_value(s, std::abs(b(i, j)));
    return total;
}

double penalty_vector(const PenaltySpec& s, const Vector& v) {
    double total = 0.0;
    for (int i = 0; i < v.size(); ++i) total += penalty_value(s, std::abs(v[i]));
    return total;
}

std::vector<double> penalty_grid() {
    std::vector<double> g;
    g.push_back(0.0);
    const int npts = 200;
    const double lo = std::log10(1e-6), hi = std::log10(1e3);
    for (int k = 0; k < npts; ++k) {
        g.push_back(std::pow(10.0, lo + (hi - lo) * k / (npts - 1)));
    }
    return g;
}

TheoryConstants theory_constants(const PenaltySpec& s) {
    TheoryConstants c;
    const double lam = s.lambda, gam = s.gamma;
    switch (s.family) {
        case PenaltyFamily::MCP:
            c.rho_prime0 = lam;
            c.mu1 = 0.5;
            c.mu2 = 0.5 * gam;
            c.l0_compatible = true;
            c.mu3 = 0.5 * gam;
            break;
        case PenaltyFamily::L1:
            c.rho_prime0 = lam;
            c.mu1 = 1.0;
            c.mu2 = 1.0;  // any finite value works for the l1 penalty
            c.mu2_free = true;
            break;
        case PenaltyFamily::L0:
            c.rho_prime0_defined = false;
            c.mu1 = 1.0;  // free
            c.mu1_free = true;
            c.mu2 = 0.5;
            c.l0_compatible = true;
            c.mu3 = 0.5;
            break;
        case PenaltyFamily::CappedL1:
            c.rho_prime0 = lam;
            c.mu1 = 1.0;
            c.mu2 = 0.5 * gam;
            c.l0_compatible = true;
            c.mu3 = 0.5 * gam;
            break;
        case PenaltyFamily::SCAD: {
            // derived on the grid: mu2 = mu3 = plateau / lambda^2, mu1 from
            // the chord between 0 and the saturation point
            c.rho_prime0 = lam;
            if (lam <= 0.0) {
                c.mu1 = 1.0;
                c.mu2 = c.mu3 = 0.0;
                c.l0_compatible = true;
                break;
            }
            double rho_max = 0.0;
            for (double x : penalty_grid()) rho_max = std::max(rho_max, penalty_value(s, x * lam));
            c.mu2 = rho_max / (lam * lam);
            c.mu3 = c.mu2;
            c.l0_compatible = true;
            double mu1 = std::numeric_limits<double>::infinity();
            for (double x : penalty_grid()) {
                const double xl = x * lam;
                if (xl <= 0.0) continue;
                const double r = penalty_value(s, xl);
                if (r < rho_max * (1.0 - 1e-12)) mu1 = std::min(mu1, r / (lam * xl));
            }
            c.mu1 = std::isfinite(mu1) ? mu1 : 1.0;
            break;
        }
    }
    return c;
}

PenaltyGridReport penalty_grid_check(const PenaltySpec& s) {
    PenaltyGridReport rep;
    const auto grid = penalty_grid();
    const auto c = theory_constants(s);
    const double lam = s.lambda;

    rep.nondecreasing = true;
    rep.midpoint_concave = true;
    rep.lower_bound = true;
    rep.upper_bound = true;
    rep.ratio_nonincreasing = true;
    rep.subadditive = true;

    std::vector<double> val(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) val[k] = penalty_value(s, grid[k]);

    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (val[k] < val[k - 1] - 1e-12) {
            rep.nondecreasing = false;
            ++rep.violations;
        }
    }
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double ratio = val[k] / grid[k];
        if (ratio > prev_ratio * (1.0 + 1e-12) + 1e-15) {
            rep.ratio_nonincreasing = false;
            ++rep.violations;
        }
        prev_ratio = ratio;
    }
    for (std::size_t a = 0; a < grid.size(); ++a) {
        for (std::size_t b = a; b < grid.size(); ++b) {
            const double mid = penalty_value(s, 0.5 * (grid[a] + grid[b]));
            if (mid < 0.5 * (val[a] + val[b]) - 1e-12) {
                rep.midpoint_concave = false;
                ++rep.violations;
            }
            if (penalty_value(s, grid[a] + grid[b]) > val[a] + val[b] + 1e-12) {
                rep.subadditive = false;
                ++rep.violations;
            }
        }
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double lower = std::min(c.mu1 * lam * grid[k], c.mu2 * lam * lam);
        if (val[k] < lower - 1e-12) {
            rep.lower_bound = false;
            ++rep.violations;
        }
        if (c.l0_compatible && val[k] > c.mu3 * lam * lam + 1e-12) {
            rep.upper_bound = false;
            ++rep.violations;
        }
    }
    return rep;
}

}  // namespace sbdag
