#include "sbdag/ci.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbdag/equivalence.hpp"

namespace sbdag {

CiRelation::CiRelation(int a, int b, IndexSet s) : cond(std::move(s)) {
    if (a == b) throw InvalidArgument("ci relation needs distinct nodes");
    i = std::min(a, b);
    j = std::max(a, b);
    std::sort(cond.begin(), cond.end());
    for (int v : cond) {
        if (v == i || v == j) throw InvalidArgument("conditioning set must exclude the pair");
    }
}

namespace {

std::vector<std::vector<bool>> adjacency(const WeightedDag& g) {
    const int p = g.dim();
    std::vector<std::vector<bool>> adj(p, std::vector<bool>(p, false));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (i != j && std::abs(g(i, j)) > kSupportTol) adj[i][j] = true;
    return adj;
}

bool d_separated_adj(const std::vector<std::vector<bool>>& adj, int i, int j,
                     const IndexSet& s) {
    const int p = static_cast<int>(adj.size());
    // ancestral closure of {i, j} union S under parent edges
    std::vector<bool> anc(p, false);
    std::vector<int> stack = {i, j};
    for (int v : s) stack.push_back(v);
    for (int v : stack) anc[v] = true;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < p; ++u) {
            if (adj[u][v] && !anc[u]) {
                anc[u] = true;
                stack.push_back(u);
            }
        }
    }
    // moralize: undirected edges plus married parents, restricted to ancestors
    std::vector<std::vector<bool>> moral(p, std::vector<bool>(p, false));
    for (int v = 0; v < p; ++v) {
        if (!anc[v]) continue;
        for (int u = 0; u < p; ++u) {
            if (!anc[u] || !adj[u][v]) continue;
            moral[u][v] = moral[v][u] = true;
            for (int w = u + 1; w < p; ++w) {
                if (anc[w] && adj[w][v]) moral[u][w] = moral[w][u] = true;
            }
        }
    }
    // reachability from i to j avoiding S
    std::vector<bool> blocked(p, false);
    for (int v : s) blocked[v] = true;
    std::vector<bool> seen(p, false);
    seen[i] = true;
    std::vector<int> queue = {i};
    while (!queue.empty()) {
        const int v = queue.back();
        queue.pop_back();
        for (int u = 0; u < p; ++u) {
            if (!moral[v][u] || seen[u] || blocked[u]) continue;
            if (u == j) return false;
            seen[u] = true;
            queue.push_back(u);
        }
    }
    return true;
}

void check_pair(int p, int i, int j, const IndexSet& s) {
    if (i < 0 || i >= p || j < 0 || j >= p || i == j)
        throw IndexError("invalid node pair");
    for (int v : s) {
        if (v < 0 || v >= p) throw IndexError("conditioning index out of range");
        if (v == i || v == j) throw InvalidArgument("conditioning set must exclude the pair");
    }
}

template <typename Member>
CiSet all_triplets(int p, int max_p, Member&& member) {
    if (p > max_p) {
        std::ostringstream os;
        os << "pairwise CI enumeration supports p <= " << max_p << ", got " << p;
        throw TooLarge(os.str());
    }
    CiSet out;
    std::vector<int> rest;
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            rest.clear();
            for (int v = 0; v < p; ++v)
                if (v != i && v != j) rest.push_back(v);
            const std::size_t nmask = std::size_t{1} << rest.size();
            for (std::size_t mask = 0; mask < nmask; ++mask) {
                IndexSet s;
                for (std::size_t a = 0; a < rest.size(); ++a)
                    if (mask & (std::size_t{1} << a)) s.push_back(rest[a]);
                if (member(i, j, s)) out.emplace(i, j, s);
            }
        }
    }
    return out;
}

}  // namespace

bool d_separated(const WeightedDag& g, int i, int j, const IndexSet& s) {
    check_pair(g.dim(), i, j, s);
    return d_separated_adj(adjacency(g), i, j, s);
}

CiSet pairwise_ci_set(const WeightedDag& g, int max_p) {
    const auto adj = adjacency(g);
    return all_triplets(g.dim(), max_p,
                        [&](int i, int j, const IndexSet& s) {
                            return d_separated_adj(adj, i, j, s);
                        });
}

CiSet true_ci_set(const CovarianceMatrix& sigma, int max_p) {
    const Matrix& sm = sigma.matrix();
    return all_triplets(sigma.dim(), max_p, [&](int i, int j, const IndexSet& s) {
        const int k = static_cast<int>(s.size()) + 2;
        std::vector<int> t;
        t.reserve(k);
        t.push_back(i);
        t.push_back(j);
        for (int v : s) t.push_back(v);
        Matrix sub(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) sub(a, b) = sm(t[a], t[b]);
        Eigen::LLT<Matrix> llt(sub);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("covariance submatrix is not positive definite");
        const Matrix inv = llt.solve(Matrix::Identity(k, k));
        return std::abs(inv(0, 1)) <= 1e-9;
    });
}

std::vector<Permutation> all_permutations(int p, int cap) {
    if (p > cap) {
        std::ostringstream os;
        os << "permutation enumeration supports p <= " << cap << ", got " << p;
        throw EnumerationTooLarge(os.str());
    }
    std::vector<Permutation> out;
    const std::uint64_t total = factorial(p);
    out.reserve(total);
    for (std::uint64_t idx = 0; idx < total; ++idx)
        out.push_back(permutation_from_index(p, idx));
    return out;
}

CiSet union_ci_population(const CovarianceMatrix& sigma, const std::vector<Permutation>& k) {
    CiSet out;
    for (const auto& pi : k) {
        auto [b, omega] = dag_for_permutation(sigma, pi);
        CiSet part = pairwise_ci_set(b);
        out.insert(part.begin(), part.end());
    }
    return out;
}

CiSet union_ci_sample(const DataMatrix& x, const std::vector<Permutation>& k,
                      const PenaltySpec& penalty, const SearchOptions& opts) {
    CiSet out;
    for (const auto& pi : k) {
        FitResult fit = restricted_minimizer(x, pi, penalty, opts);
        CiSet part = pairwise_ci_set(fit.b_hat);
        out.insert(part.begin(), part.end());
    }
    return out;
}

bool minimal_imap_check(const WeightedDag& g, const CovarianceMatrix& sigma, int max_p) {
    const int p = g.dim();
    if (p != sigma.dim()) throw DimensionMismatch("graph and covariance dimensions differ");
    if (p > max_p) {
        std::ostringstream os;
        os << "minimal I-map check supports p <= " << max_p << ", got " << p;
        throw TooLarge(os.str());
    }
    const CiSet truth = true_ci_set(sigma);
    const CiSet ig = pairwise_ci_set(g);
    if (!std::includes(truth.begin(), truth.end(), ig.begin(), ig.end())) return false;

    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            if (std::abs(g(i, j)) <= kSupportTol) continue;
            Matrix w = g.weights();
            w(i, j) = 0.0;
            const CiSet del = pairwise_ci_set(WeightedDag(std::move(w)));
            if (std::includes(truth.begin(), truth.end(), del.begin(), del.end())) {
                return false;  // the edge was removable, not minimal
            }
        }
    }
    return true;
}

}  // namespace sbdag
