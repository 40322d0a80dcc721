#pragma once

#include <sbdag/equivalence.hpp>
#include <sbdag/linalg.hpp>
#include <sbdag/rng.hpp>
#include <sbdag/types.hpp>

namespace fixtures {

using sbdag::Matrix;
using sbdag::Vector;

// 4-node worked example: a covariance with two sparse equivalent DAGs
inline sbdag::CovarianceMatrix example4_sigma() {
    Matrix s(4, 4);
    s << 6, 4, -6, -30,
         4, 4, -4, -20,
        -6, -4, 7, 39,
        -30, -20, 39, 234;
    return sbdag::CovarianceMatrix(s);
}

// ordering X4 < X3 < X1 < X2 (0-based sequence 3,2,0,1)
inline sbdag::Permutation example4_pi1() { return sbdag::Permutation({3, 2, 0, 1}); }
// ordering X4 < X1 < X2 < X3
inline sbdag::Permutation example4_pi2() { return sbdag::Permutation({3, 0, 1, 2}); }

inline Matrix example4_b1() {
    Matrix b = Matrix::Zero(4, 4);
    b(0, 2) = -1;
    b(0, 3) = 4;
    b(1, 0) = 1;
    b(2, 3) = 9;
    return b;
}

inline Vector example4_omega1() {
    Vector v(4);
    v << 2, 4, 1, 3;
    return v;
}

inline Matrix example4_b2() {
    Matrix b = Matrix::Zero(4, 4);
    b(0, 3) = 4;
    b(1, 0) = 1.0 / 3.0;
    b(2, 0) = -2.0 / 3.0;
    b(2, 1) = -4.0 / 7.0;
    b(2, 3) = 9;
    return b;
}

inline Vector example4_omega2() {
    Vector v(4);
    v << 2.0 / 3.0, 12.0 / 7.0, 7, 3;
    return v;
}

// diamond example: precision with two CI relations and no faithful DAG
inline Matrix diamond_precision() {
    Matrix k(4, 4);
    k << 10, 1, 0, 2,
          1, 10, 3, 0,
          0, 3, 10, 4,
          2, 0, 4, 10;
    return k;
}

inline sbdag::CovarianceMatrix diamond_sigma() {
    const Matrix k = diamond_precision();
    Matrix s = k.inverse();
    return sbdag::CovarianceMatrix(0.5 * (s + s.transpose()));
}

// random SPD matrix with eigenvalues bounded away from zero
inline sbdag::CovarianceMatrix random_spd(int p, sbdag::Rng& rng) {
    Matrix a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
    Matrix s = a * a.transpose() + 0.5 * p * Matrix::Identity(p, p);
    return sbdag::CovarianceMatrix(std::move(s));
}

inline sbdag::Permutation random_permutation(int p, sbdag::Rng& rng) {
    std::vector<int> m(p);
    for (int i = 0; i < p; ++i) m[i] = i;
    rng.shuffle(m);
    return sbdag::Permutation(std::move(m));
}

}  // namespace fixtures
