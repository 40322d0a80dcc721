#include <doctest.h>

#include <sbdag/linalg.hpp>
#include <sbdag/pls.hpp>
#include <sbdag/rng.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace sbdag;

namespace {

// y = Z theta + sigma * noise with a standard normal design
struct Problem {
    Matrix z;
    Vector y;
};

Problem make_problem(int n, int m, const Vector& theta, double sigma, Rng& rng) {
    Problem pr;
    pr.z = Matrix(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) pr.z(i, j) = rng.normal();
    pr.y = pr.z * theta;
    for (int i = 0; i < n; ++i) pr.y[i] += sigma * rng.normal();
    return pr;
}

IndexSet all_of(int m) {
    IndexSet s(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
}

}  // namespace

TEST_CASE("empty support gives the zero fit") {
    Rng rng(1);
    const Problem pr = make_problem(30, 4, Vector::Zero(4), 1.0, rng);
    const PlsSolution sol = fixed_support_solve(pr.y, pr.z, {}, PenaltySpec::l1(0.3));
    CHECK(sol.theta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.objective == doctest::Approx(pr.y.squaredNorm() / (2.0 * pr.z.rows())));
}

TEST_CASE("noiseless single column with l0 penalty") {
    Rng rng(2);
    Vector theta = Vector::Zero(5);
    theta[0] = 1.0;
    const Problem pr = make_problem(40, 5, theta, 0.0, rng);
    const PlsSolution sol = fixed_support_solve(pr.y, pr.z, {0}, PenaltySpec::l0(0.4));
    CHECK(sol.theta[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.objective == doctest::Approx(0.5 * 0.4 * 0.4));
    CHECK(sol.support == IndexSet({0}));
}

TEST_CASE("fixed support l1 matches a long proximal gradient run") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Vector theta = Vector::Zero(5);
        theta[1] = 1.2;
        theta[4] = -0.7;
        const Problem pr = make_problem(50, 5, theta, 0.5, rng);
        const double lambda = 0.2;
        const IndexSet keep = all_of(5);
        const PlsSolution sol =
            restricted_pls(pr.y, pr.z, keep, PenaltySpec::l1(lambda),
                           {.mode = SolverMode::CoordinateDescent});
        const Vector ref = oracles::prox_gradient_l1(pr.y, pr.z, lambda, keep);
        const double obj_ref = oracles::l1_objective(pr.y, pr.z, lambda, ref);
        CHECK(sol.objective <= obj_ref + 1e-8);
        CHECK(std::abs(sol.objective - obj_ref) <= 1e-8);
    }
}

TEST_CASE("exact enumeration certifies the global minimum") {
    Rng rng(4);
    const std::vector<PenaltySpec> penalties = {PenaltySpec::l0(0.3), PenaltySpec::l1(0.15),
                                                PenaltySpec::mcp(0.2, 3.0)};
    int cd_matches = 0, mcp_total = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const PenaltySpec& pen = penalties[static_cast<std::size_t>(trial % 3)];
        Vector theta = Vector::Zero(6);
        theta[1] = 1.5;
        theta[3] = -0.9;
        const Problem pr = make_problem(50, 6, theta, 0.7, rng);
        const IndexSet s = all_of(6);

        const PlsSolution ex = restricted_pls(pr.y, pr.z, s, pen, {.mode = SolverMode::Exact});
        const PlsSolution cd = restricted_pls(
            pr.y, pr.z, s, pen, {.mode = SolverMode::CoordinateDescent, .seed = 11});

        // cd can never beat a certified global optimum
        CHECK(cd.objective >= ex.objective - 1e-9);
        if (pen.family == PenaltyFamily::MCP) {
            ++mcp_total;
            if (cd.objective <= ex.objective + 1e-8) ++cd_matches;
        } else {
            CHECK(cd.objective <= ex.objective + 1e-8);
        }
    }
    // nonconvexity allowance: stationary points occasionally miss the optimum
    INFO("mcp cd matched exact ", cd_matches, "/", mcp_total);
    CHECK(cd_matches >= (mcp_total * 95) / 100);
}

TEST_CASE("exact mode on a small support set") {
    Rng rng(5);
    Vector theta = Vector::Zero(6);
    theta[0] = 2.0;
    theta[2] = -1.5;
    const Problem pr = make_problem(200, 6, theta, 1.0, rng);
    const PlsSolution sol = restricted_pls(pr.y, pr.z, all_of(6), PenaltySpec::mcp(0.2, 3.0),
                                           {.mode = SolverMode::Exact});
    CHECK(sol.support == IndexSet({0, 2}));
    CHECK(sol.solver == "exact-enumeration");

    // S = empty set: zero solution
    const PlsSolution empty = restricted_pls(pr.y, pr.z, {}, PenaltySpec::mcp(0.2, 3.0));
    CHECK(empty.theta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("large l0 penalty keeps the zero model") {
    Rng rng(6);
    Vector theta = Vector::Zero(4);
    theta[0] = 0.5;
    const Problem pr = make_problem(60, 4, theta, 1.0, rng);
    const double ynorm_sq = pr.y.squaredNorm() / pr.z.rows();
    const PlsSolution sol =
        restricted_pls(pr.y, pr.z, all_of(4), PenaltySpec::l0(2.0 * std::sqrt(ynorm_sq)));
    CHECK(sol.support.empty());
    CHECK(sol.theta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact cap is enforced") {
    Rng rng(7);
    const Problem pr = make_problem(30, 6, Vector::Zero(6), 1.0, rng);
    PlsOptions opts;
    opts.mode = SolverMode::Exact;
    opts.exact_cap = 4;
    CHECK_THROWS_AS(restricted_pls(pr.y, pr.z, all_of(6), PenaltySpec::l1(0.1), opts),
                    ExactCapExceeded);
}

TEST_CASE("restriction monotonicity on a constructed instance") {
    // when the true support sits inside S inside U and the U-problem selects
    // it, the S-problem must select it too
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        Vector theta = Vector::Zero(6);
        theta[1] = 2.0;
        theta[2] = -1.4;
        const Problem pr = make_problem(150, 6, theta, 0.5, rng);
        const PenaltySpec pen = PenaltySpec::mcp(0.25, 3.0);
        const PlsSolution on_u = restricted_pls(pr.y, pr.z, all_of(6), pen);
        if (on_u.support != IndexSet({1, 2})) continue;  // U failed, nothing to check
        const PlsSolution on_s = restricted_pls(pr.y, pr.z, {1, 2, 4}, pen);
        CHECK(on_s.support == IndexSet({1, 2}));
    }
}

TEST_CASE("neighbourhood fit forces the response coefficient to zero") {
    Rng rng(9);
    const CovarianceMatrix sigma = fixtures::example4_sigma();
    const DataMatrix x = sample_gaussian(sigma, 500, 99);
    const PlsSolution sol = neighbourhood_fit(x, 3, {0, 1, 2}, PenaltySpec::mcp(0.3, 3.0));
    CHECK(sol.theta[3] == 0.0);
    CHECK_THROWS_AS(neighbourhood_fit(x, 3, {0, 3}, PenaltySpec::l1(0.1)), IndexError);

    const PlsSolution empty = neighbourhood_fit(x, 0, {}, PenaltySpec::l1(0.1));
    CHECK(empty.theta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("neighbourhood fit recovers the worked-example column") {
    const CovarianceMatrix sigma = fixtures::example4_sigma();
    const DataMatrix x = sample_gaussian(sigma, 2000, 1234);
    // lambda scaled to the data: coefficients on {X1, X3} are 4 and 9
    const PlsSolution sol = neighbourhood_fit(x, 3, {0, 1, 2}, PenaltySpec::mcp(0.35, 3.0));
    CHECK(sol.support == IndexSet({0, 2}));
    CHECK(sol.theta[0] == doctest::Approx(4.0).epsilon(0.075));
    CHECK(sol.theta[2] == doctest::Approx(9.0).epsilon(0.034));
}

TEST_CASE("null model keeps the empty support almost always") {
    Rng rng(10);
    int empty_count = 0;
    const int reps = 100;
    for (int rep = 0; rep < reps; ++rep) {
        const CovarianceMatrix eye(Matrix::Identity(4, 4));
        const DataMatrix x = sample_gaussian(eye, 5000, 7000 + static_cast<std::uint64_t>(rep));
        const PlsSolution sol = neighbourhood_fit(x, 0, {1, 2, 3}, PenaltySpec::mcp(0.2, 3.0));
        if (sol.support.empty()) ++empty_count;
    }
    CHECK(empty_count >= 95);
}

TEST_CASE("rank deficiency falls back to ridge with a flag") {
    Rng rng(11);
    Matrix z(40, 3);
    for (int i = 0; i < 40; ++i) {
        z(i, 0) = rng.normal();
        z(i, 1) = z(i, 0);  // duplicated column
        z(i, 2) = rng.normal();
    }
    const Vector y = z.col(0) + z.col(2);
    const PlsSolution sol = fixed_support_solve(y, z, {0, 1, 2}, PenaltySpec::l0(0.1));
    CHECK(sol.ridge_stabilized);
    CHECK(std::isfinite(sol.objective));
}

TEST_CASE("ties between distinct supports are flagged") {
    // two identical columns make {0} and {1} interchangeable
    Rng rng(12);
    Matrix z(50, 2);
    for (int i = 0; i < 50; ++i) {
        z(i, 0) = rng.normal();
        z(i, 1) = z(i, 0);
    }
    const Vector y = z.col(0);
    const PlsSolution sol =
        restricted_pls(y, z, {0, 1}, PenaltySpec::l0(0.05), {.mode = SolverMode::Exact});
    CHECK(sol.multiple_optima);
}

TEST_CASE("support sets must be sorted, distinct and in range") {
    Rng rng(14);
    const Problem pr = make_problem(20, 3, Vector::Zero(3), 1.0, rng);
    CHECK_THROWS_AS(restricted_pls(pr.y, pr.z, {2, 1}, PenaltySpec::l1(0.1)), InvalidArgument);
    CHECK_THROWS_AS(restricted_pls(pr.y, pr.z, {1, 1}, PenaltySpec::l1(0.1)), InvalidArgument);
    CHECK_THROWS_AS(restricted_pls(pr.y, pr.z, {3}, PenaltySpec::l1(0.1)), IndexError);
    Vector short_y(5);
    short_y.setZero();
    CHECK_THROWS_AS(restricted_pls(short_y, pr.z, {0}, PenaltySpec::l1(0.1)),
                    DimensionMismatch);
}

TEST_CASE("solution objective never exceeds the zero-model objective") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = 2 + rng.uniform_int(0, 4);
        Vector theta = Vector::Zero(m);
        if (rng.bernoulli(0.7)) theta[rng.uniform_int(0, m - 1)] = rng.normal();
        const Problem pr = make_problem(40, m, theta, 1.0, rng);
        const PenaltySpec pen =
            (trial % 2 == 0) ? PenaltySpec::mcp(0.3, 2.5) : PenaltySpec::l1(0.2);
        const PlsSolution sol = restricted_pls(
            pr.y, pr.z, all_of(m), pen,
            {.mode = trial % 3 == 0 ? SolverMode::CoordinateDescent : SolverMode::Exact});
        CHECK(sol.objective <= pr.y.squaredNorm() / (2.0 * pr.z.rows()) + 1e-12);
        for (int idx : sol.support) CHECK(std::abs(sol.theta[idx]) > kSupportTol);
    }
}
