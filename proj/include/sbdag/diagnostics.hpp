#pragma once

#include <cstdint>
#include <string>

#include "sbdag/penalty.hpp"
#include "sbdag/types.hpp"

namespace sbdag {

// Evidence for the noise-design width inequality
//   (1/n) |<w, Zu>| <= delta [ (1/2n)||Zu||^2 + rho(u) ]
// over a structured direction set. A negative margin certifies a violation;
// a nonnegative margin over the sample is evidence only.
struct GwResult {
    bool holds_on_sample = false;
    double min_margin = 0.0;
};
GwResult gw_check(const Vector& w, const Matrix& z, const PenaltySpec& penalty, double delta,
                  int directions = 200, std::uint64_t seed = 0);

// Sampled upper bound on the restricted eigenvalue
//   min ||Zu||^2 / (n ||u||^2) over the l1 cone C1(A, xi),
// probing random interior and boundary rays, coordinate rays, and spectral
// directions that fall inside the cone.
struct ReEstimate {
    double kappa_sq = 0.0;
    std::string method = "sampled+eigen";
};
ReEstimate re_estimate(const Matrix& z, const IndexSet& a, double xi, int directions = 10000,
                       std::uint64_t seed = 0);

// Monte Carlo estimate of the support-recovery failure rate for the exact
// solver on y = Z theta + eps with eps ~ N(0, sigma^2 I).
struct MsExponent {
    int failures = 0;
    int replicates = 0;
    double failure_rate = 0.0;
    bool rate_floored = false;  // zero failures reported as < 1/replicates
    double neg_log_rate = 0.0;
};
MsExponent empirical_ms_exponent(const Matrix& z, const Vector& theta, double sigma_sq,
                                 const PenaltySpec& penalty, int replicates = 200,
                                 std::uint64_t seed = 0);

// Covariance form: draws one design Z ~ N(0, Sigma) with n rows and reports
// the rate conditional on that draw.
MsExponent empirical_ms_exponent(const CovarianceMatrix& sigma, int n, const Vector& theta,
                                 double sigma_sq, const PenaltySpec& penalty,
                                 int replicates = 200, std::uint64_t seed = 0);

struct Envelope {
    double h = 0.0;
    double big_h = 0.0;
};
// h_n(u) = -u^2/n + 2u/sqrt(n+1) + 1/(n+1),  H_n(u) = u^2/n + 2u/sqrt(n)
Envelope concentration_envelope(int n, double u);

struct ConditionReport {
    bool gw_holds = false;
    double gw_margin = 0.0;
    double re_kappa_sq = 0.0;
    std::string re_method;
    // rho(beta_min) * lambda_min(Sigma) / rho'(0+)^2, to be compared with the
    // required level (> 2)
    double betamin_ratio = 0.0;
    // [rho(B(pi0)) / tr Omega(pi0)] / sqrt((d+1) log p / n)
    double mintrace_ratio = 0.0;
    // 1 - max over non-minimal pi of tr Omega(pi0) / tr Omega(pi)
    double mintrace_gap = 0.0;
    bool mintrace_degenerate = false;  // minimum-trace DAG is the empty graph
    int d_sigma = 0;
    double betamin_sigma = 0.0;
    double lambda_min_sigma = 0.0;
};
ConditionReport condition_report(const CovarianceMatrix& sigma, const PenaltySpec& penalty,
                                 int n, std::uint64_t seed = 0);

}  // namespace sbdag
