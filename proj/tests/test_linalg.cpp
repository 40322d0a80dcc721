#include <doctest.h>

#include <sbdag/linalg.hpp>
#include <sbdag/rng.hpp>

#include "fixtures.hpp"

using namespace sbdag;

TEST_CASE("ldlt of the identity is trivial") {
    const Matrix a = Matrix::Identity(4, 4);
    const LdltResult f = ldlt_decompose(a);
    CHECK(f.l_strict.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK((f.d - Vector::Ones(4)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("ldlt reconstructs random spd matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 2 + rng.uniform_int(0, 10);  // p <= 12
        const CovarianceMatrix a = fixtures::random_spd(p, rng);
        const LdltResult f = ldlt_decompose(a.matrix());
        const Matrix il = Matrix::Identity(p, p) - f.l_strict;
        const Matrix back = il * f.d.cwiseInverse().asDiagonal() * il.transpose();
        const double rel = (back - a.matrix()).norm() / a.matrix().norm();
        CHECK(rel <= 1e-10);
    }
}

TEST_CASE("ldlt rejects indefinite input") {
    Matrix a(2, 2);
    a << 1, 2, 2, 1;  // eigenvalues 3 and -1
    CHECK_THROWS_AS(ldlt_decompose(a), NotPositiveDefinite);
}

TEST_CASE("permute_matrix definition and round trip") {
    const Permutation id = Permutation::identity(3);
    Matrix a(3, 3);
    a << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    CHECK((permute_matrix(id, a) - a).cwiseAbs().maxCoeff() == 0.0);

    Matrix b(2, 2);
    b << 1, 2, 3, 4;  // [[a,b],[c,d]]
    const Permutation swap({1, 0});
    const Matrix pb = permute_matrix(swap, b);
    CHECK(pb(0, 0) == 4.0);
    CHECK(pb(0, 1) == 3.0);
    CHECK(pb(1, 0) == 2.0);
    CHECK(pb(1, 1) == 1.0);

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int p = 2 + rng.uniform_int(0, 6);
        Matrix m(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
        const Permutation pi = fixtures::random_permutation(p, rng);
        CHECK((permute_matrix(pi.inverse(), permute_matrix(pi, m)) - m).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("permutation composition acts elementwise") {
    Rng rng(11);
    const int p = 5;
    Matrix m(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
    const Permutation pi = fixtures::random_permutation(p, rng);
    const Permutation sg = fixtures::random_permutation(p, rng);
    // P_sigma (P_pi A) = P_tau A with tau(i) = pi(sigma(i))
    std::vector<int> tau(p);
    for (int i = 0; i < p; ++i) tau[i] = pi(sg(i));
    const Matrix lhs = permute_matrix(sg, permute_matrix(pi, m));
    const Matrix rhs = permute_matrix(Permutation(tau), m);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sigma_of with no edges is the variance matrix") {
    const WeightedDag b = WeightedDag::zero(3);
    const DiagonalVariances om = DiagonalVariances::ones(3);
    const CovarianceMatrix s = sigma_of(b, om);
    CHECK((s.matrix() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("sigma_of reproduces the worked example from both parameterizations") {
    const Matrix expected = fixtures::example4_sigma().matrix();
    {
        const CovarianceMatrix s = sigma_of(WeightedDag(fixtures::example4_b1()),
                                            DiagonalVariances(fixtures::example4_omega1()));
        CHECK((s.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-9);
    }
    {
        const CovarianceMatrix s = sigma_of(WeightedDag(fixtures::example4_b2()),
                                            DiagonalVariances(fixtures::example4_omega2()));
        CHECK((s.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("is_dag basics") {
    CHECK(is_dag(Matrix::Zero(4, 4)).is_dag);

    Matrix cyc = Matrix::Zero(2, 2);
    cyc(0, 1) = 1.0;
    cyc(1, 0) = -0.5;
    CHECK_FALSE(is_dag(cyc).is_dag);

    const DagCheck chk = is_dag(fixtures::example4_b1());
    REQUIRE(chk.is_dag);
    // children come before parents in the returned sequence
    std::vector<int> pos(4);
    for (int i = 0; i < 4; ++i) pos[chk.order[static_cast<std::size_t>(i)]] = i;
    const Matrix b = fixtures::example4_b1();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (std::abs(b(i, j)) > kSupportTol) CHECK(pos[j] < pos[i]);
}

TEST_CASE("entries below the support tolerance are not edges") {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = 0.5e-8;
    w(1, 0) = 0.9e-8;  // would be a 2-cycle if counted
    CHECK(is_dag(w).is_dag);
}

TEST_CASE("gaussian sampling is deterministic and matches its covariance") {
    const CovarianceMatrix eye(Matrix::Identity(2, 2));
    const DataMatrix x1 = sample_gaussian(eye, 100000, 42);
    const DataMatrix x2 = sample_gaussian(eye, 100000, 42);
    CHECK((x1.matrix() - x2.matrix()).cwiseAbs().maxCoeff() == 0.0);

    const Matrix emp = x1.matrix().transpose() * x1.matrix() / x1.n();
    CHECK((emp - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.05);

    Matrix s(2, 2);
    s << 1.0, 0.9, 0.9, 1.0;
    const DataMatrix y = sample_gaussian(CovarianceMatrix(s), 100000, 7);
    const Matrix empy = y.matrix().transpose() * y.matrix() / y.n();
    const double corr = empy(0, 1) / std::sqrt(empy(0, 0) * empy(1, 1));
    CHECK(std::abs(corr - 0.9) <= 0.02);
}

TEST_CASE("domain types validate their invariants") {
    CHECK_THROWS_AS((Permutation({0, 0, 1})), InvalidArgument);
    CHECK_THROWS_AS((Permutation({0, 2})), InvalidArgument);
    CHECK_THROWS_AS((Permutation({})), InvalidArgument);

    Matrix asym(2, 2);
    asym << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS((CovarianceMatrix(asym)), InvalidArgument);

    Matrix cyc = Matrix::Zero(3, 3);
    cyc(0, 1) = 1.0;
    cyc(1, 2) = 1.0;
    cyc(2, 0) = 1.0;
    CHECK_THROWS_AS((WeightedDag(cyc)), InvalidArgument);

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 0.5;
    CHECK_THROWS_AS((WeightedDag(diag)), InvalidArgument);

    Vector vneg(2);
    vneg << 1.0, 0.0;
    CHECK_THROWS_AS((DiagonalVariances(vneg)), InvalidArgument);

    Matrix nonfinite(1, 1);
    nonfinite(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((DataMatrix(nonfinite)), InvalidArgument);

    Matrix rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(ldlt_decompose(rect), DimensionMismatch);
    CHECK_THROWS_AS(permute_matrix(Permutation::identity(2), Matrix::Zero(3, 3)),
                    DimensionMismatch);
}

TEST_CASE("topological sort counting") {
    CHECK(count_topological_sorts(WeightedDag::zero(3), 1000).count == 6);

    Matrix chain = Matrix::Zero(3, 3);
    chain(0, 1) = 1.0;
    chain(1, 2) = 1.0;  // 1 -> 2 -> 3
    const WeightedDag d(chain);
    CHECK(count_topological_sorts(d, 1000).count == 1);
    const auto sorts = topological_sorts(d, 10);
    REQUIRE(sorts.size() == 1);
    // sources last
    CHECK(sorts[0] == std::vector<int>({2, 1, 0}));
}
