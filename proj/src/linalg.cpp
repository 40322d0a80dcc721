#include "sbdag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "sbdag/rng.hpp"

namespace sbdag {

namespace {

void require_square(const Matrix& a) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << "expected square matrix, got " << a.rows() << "x" << a.cols();
        throw DimensionMismatch(os.str());
    }
}

// support adjacency: adj[i][j] true means edge i -> j
std::vector<std::vector<bool>> support_adjacency(const Matrix& w) {
    const int p = static_cast<int>(w.rows());
    std::vector<std::vector<bool>> adj(p, std::vector<bool>(p, false));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j && std::abs(w(i, j)) > kSupportTol) adj[i][j] = true;
    return adj;
}

// Kahn's algorithm on the reversed graph: a node is placeable once all of
// its children are placed, so the output lists each node before its parents.
std::optional<std::vector<int>> reverse_topo_order(const std::vector<std::vector<bool>>& adj) {
    const int p = static_cast<int>(adj.size());
    std::vector<int> remaining_children(p, 0);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (adj[i][j]) ++remaining_children[i];

    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 0; v < p; ++v)
        if (remaining_children[v] == 0) ready.push(v);

    std::vector<int> order;
    order.reserve(p);
    while (!ready.empty()) {
        const int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int u = 0; u < p; ++u) {
            if (adj[u][v] && --remaining_children[u] == 0) ready.push(u);
        }
    }
    if (static_cast<int>(order.size()) != p) return std::nullopt;
    return order;
}

}  // namespace

Permutation::Permutation(std::vector<int> mapping) : map_(std::move(mapping)) {
    const int p = static_cast<int>(map_.size());
    if (p == 0) throw InvalidArgument("empty permutation");
    inv_.assign(p, -1);
    for (int i = 0; i < p; ++i) {
        const int v = map_[i];
        if (v < 0 || v >= p || inv_[v] != -1) {
            throw InvalidArgument("permutation mapping is not a bijection on [p]");
        }
        inv_[v] = i;
    }
}

Permutation Permutation::identity(int p) {
    std::vector<int> m(p);
    for (int i = 0; i < p; ++i) m[i] = i;
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const { return Permutation(inv_); }

CovarianceMatrix::CovarianceMatrix(Matrix sigma) {
    require_square(sigma);
    const double scale = sigma.cwiseAbs().maxCoeff();
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1.0)) {
        throw InvalidArgument("covariance matrix is not symmetric");
    }
    m_ = 0.5 * (sigma + sigma.transpose());
    ldlt_decompose(m_);  // positive definiteness gate
}

WeightedDag::WeightedDag(Matrix weights) {
    require_square(weights);
    const int p = static_cast<int>(weights.rows());
    for (int i = 0; i < p; ++i) {
        if (std::abs(weights(i, i)) > kSupportTol) {
            throw InvalidArgument("adjacency matrix has a nonzero diagonal entry");
        }
        weights(i, i) = 0.0;
    }
    auto order = reverse_topo_order(support_adjacency(weights));
    if (!order) throw InvalidArgument("adjacency support contains a directed cycle");
    w_ = std::move(weights);
    order_ = std::move(*order);
}

IndexSet WeightedDag::parents(int j) const {
    IndexSet out;
    for (int i = 0; i < dim(); ++i)
        if (std::abs(w_(i, j)) > kSupportTol) out.push_back(i);
    return out;
}

int WeightedDag::edge_count() const {
    int c = 0;
    for (int j = 0; j < dim(); ++j) c += static_cast<int>(parents(j).size());
    return c;
}

DiagonalVariances::DiagonalVariances(Vector values) : v_(std::move(values)) {
    for (int j = 0; j < v_.size(); ++j) {
        if (!(v_[j] > 0.0)) throw InvalidArgument("variances must be strictly positive");
    }
}

DataMatrix::DataMatrix(Matrix x) : x_(std::move(x)) {
    if (x_.rows() < 1) throw InvalidArgument("data matrix needs at least one row");
    if (!x_.allFinite()) throw InvalidArgument("data matrix has non-finite entries");
}

LdltResult ldlt_decompose(const Matrix& a) {
    require_square(a);
    const int p = static_cast<int>(a.rows());
    const double maxdiag = a.diagonal().cwiseAbs().maxCoeff();

    // unpivoted A = L_u diag(d) L_u^T, L_u unit lower triangular
    Matrix lu = Matrix::Identity(p, p);
    Vector d(p);
    for (int k = 0; k < p; ++k) {
        double dk = a(k, k);
        for (int m = 0; m < k; ++m) dk -= lu(k, m) * lu(k, m) * d[m];
        if (!(dk > kPdTol * maxdiag)) {
            std::ostringstream os;
            os << "matrix is not positive definite: pivot " << k << " = " << dk;
            throw NotPositiveDefinite(os.str());
        }
        d[k] = dk;
        for (int i = k + 1; i < p; ++i) {
            double v = a(i, k);
            for (int m = 0; m < k; ++m) v -= lu(i, m) * lu(k, m) * d[m];
            lu(i, k) = v / dk;
        }
    }

    // A = (I - L) D^{-1} (I - L)^T with L = I - L_u, D = diag(1/d)
    LdltResult res;
    res.l_strict = Matrix::Identity(p, p) - lu;
    res.d = d.cwiseInverse();
    return res;
}

Matrix permute_matrix(const Permutation& pi, const Matrix& a) {
    require_square(a);
    const int p = static_cast<int>(a.rows());
    if (pi.size() != p) throw DimensionMismatch("permutation size does not match matrix");
    Matrix out(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) out(i, j) = a(pi(i), pi(j));
    return out;
}

CovarianceMatrix sigma_of(const WeightedDag& b, const DiagonalVariances& omega) {
    const int p = b.dim();
    if (omega.dim() != p) throw DimensionMismatch("variance vector does not match dag");
    const Matrix m = Matrix::Identity(p, p) - b.weights();
    Eigen::PartialPivLU<Matrix> lu(m);
    // det(I - B) = 1 for any valid DAG; anything near zero means corrupted input
    if (std::abs(lu.determinant()) < 1e-12) {
        throw SingularFactor("(I - B) is numerically singular");
    }
    const Matrix minv = lu.solve(Matrix::Identity(p, p));
    Matrix sigma = minv.transpose() * omega.values().asDiagonal() * minv;
    sigma = 0.5 * (sigma + sigma.transpose());
    return CovarianceMatrix(std::move(sigma));
}

DagCheck is_dag(const Matrix& weights) {
    require_square(weights);
    DagCheck res;
    auto order = reverse_topo_order(support_adjacency(weights));
    if (order) {
        res.is_dag = true;
        res.order = std::move(*order);
    }
    return res;
}

DataMatrix sample_gaussian(const CovarianceMatrix& sigma, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample size must be at least 1");
    const int p = sigma.dim();
    Eigen::LLT<Matrix> llt(sigma.matrix());
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("covariance factorization failed");
    }
    const Matrix l = llt.matrixL();
    Rng rng(seed);
    Matrix z(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
    return DataMatrix(z * l.transpose());
}

namespace {

void sorts_rec(const std::vector<std::vector<bool>>& adj, std::vector<int>& remaining_children,
               std::vector<bool>& placed, std::vector<int>& prefix, std::size_t limit,
               std::vector<std::vector<int>>& out) {
    const int p = static_cast<int>(adj.size());
    if (out.size() >= limit) return;
    if (static_cast<int>(prefix.size()) == p) {
        out.push_back(prefix);
        return;
    }
    for (int v = 0; v < p; ++v) {
        if (placed[v] || remaining_children[v] != 0) continue;
        placed[v] = true;
        prefix.push_back(v);
        for (int u = 0; u < p; ++u)
            if (adj[u][v]) --remaining_children[u];
        sorts_rec(adj, remaining_children, placed, prefix, limit, out);
        for (int u = 0; u < p; ++u)
            if (adj[u][v]) ++remaining_children[u];
        prefix.pop_back();
        placed[v] = false;
        if (out.size() >= limit) return;
    }
}

std::uint64_t count_rec(const std::vector<std::vector<bool>>& adj,
                        std::vector<int>& remaining_children, std::vector<bool>& placed,
                        int placed_count, std::uint64_t cap) {
    const int p = static_cast<int>(adj.size());
    if (placed_count == p) return 1;
    std::uint64_t total = 0;
    for (int v = 0; v < p; ++v) {
        if (placed[v] || remaining_children[v] != 0) continue;
        placed[v] = true;
        for (int u = 0; u < p; ++u)
            if (adj[u][v]) --remaining_children[u];
        total += count_rec(adj, remaining_children, placed, placed_count + 1, cap);
        for (int u = 0; u < p; ++u)
            if (adj[u][v]) ++remaining_children[u];
        placed[v] = false;
        if (total >= cap) return cap;
    }
    return total;
}

}  // namespace

std::vector<std::vector<int>> topological_sorts(const WeightedDag& b, std::size_t limit) {
    const auto adj = support_adjacency(b.weights());
    const int p = b.dim();
    std::vector<int> remaining_children(p, 0);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (adj[i][j]) ++remaining_children[i];
    std::vector<bool> placed(p, false);
    std::vector<int> prefix;
    std::vector<std::vector<int>> out;
    sorts_rec(adj, remaining_children, placed, prefix, limit, out);
    return out;
}

SortCount count_topological_sorts(const WeightedDag& b, std::uint64_t cap) {
    const auto adj = support_adjacency(b.weights());
    const int p = b.dim();
    std::vector<int> remaining_children(p, 0);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (adj[i][j]) ++remaining_children[i];
    std::vector<bool> placed(p, false);
    SortCount sc;
    sc.count = count_rec(adj, remaining_children, placed, 0, cap);
    sc.capped = (sc.count >= cap);
    return sc;
}

}  // namespace sbdag
