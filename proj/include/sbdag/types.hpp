#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sbdag/errors.hpp"

namespace sbdag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<int>;  // sorted, distinct, 0-based

// |entry| above this counts as a nonzero edge / coefficient.
inline constexpr double kSupportTol = 1e-8;
// smallest pivot must exceed kPdTol * largest diagonal for a matrix to pass
// as positive definite
inline constexpr double kPdTol = 1e-12;

// Ordering of the p nodes. mapping[i] is the node placed at position i; the
// matrix action is (apply(A))(i,j) = A(mapping[i], mapping[j]).
class Permutation {
public:
    explicit Permutation(std::vector<int> mapping);
    static Permutation identity(int p);

    int size() const { return static_cast<int>(map_.size()); }
    int operator()(int i) const { return map_[i]; }
    int position_of(int node) const { return inv_[node]; }
    const std::vector<int>& mapping() const { return map_; }
    const std::vector<int>& inverse_mapping() const { return inv_; }
    Permutation inverse() const;

    bool operator==(const Permutation& o) const { return map_ == o.map_; }
    bool operator<(const Permutation& o) const { return map_ < o.map_; }

private:
    std::vector<int> map_;
    std::vector<int> inv_;
};

// Symmetric positive definite population covariance. Symmetry is required
// within 1e-12 relative on construction, after which the stored matrix is
// symmetrized exactly.
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(Matrix sigma);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    Matrix m_;
};

// Weighted adjacency matrix with acyclic support and zero diagonal.
// Convention: weights(i, j) != 0 means edge i -> j, i.e. column j holds the
// coefficients of node j's parents in x_j = weights.col(j)^T x + noise.
class WeightedDag {
public:
    explicit WeightedDag(Matrix weights);
    static WeightedDag zero(int p) { return WeightedDag(Matrix::Zero(p, p)); }

    int dim() const { return static_cast<int>(w_.rows()); }
    const Matrix& weights() const { return w_; }
    double operator()(int i, int j) const { return w_(i, j); }
    IndexSet parents(int j) const;
    int edge_count() const;
    // one node sequence placing every node before its parents
    const std::vector<int>& reverse_topological_order() const { return order_; }

private:
    Matrix w_;
    std::vector<int> order_;
};

class DiagonalVariances {
public:
    explicit DiagonalVariances(Vector values);
    static DiagonalVariances ones(int p) { return DiagonalVariances(Vector::Ones(p)); }

    int dim() const { return static_cast<int>(v_.size()); }
    const Vector& values() const { return v_; }
    double operator()(int j) const { return v_[j]; }
    double trace() const { return v_.sum(); }

private:
    Vector v_;
};

// n x p sample, rows are observations.
class DataMatrix {
public:
    explicit DataMatrix(Matrix x);

    int n() const { return static_cast<int>(x_.rows()); }
    int dim() const { return static_cast<int>(x_.cols()); }
    const Matrix& matrix() const { return x_; }
    Vector column(int j) const { return x_.col(j); }

private:
    Matrix x_;
};

}  // namespace sbdag
