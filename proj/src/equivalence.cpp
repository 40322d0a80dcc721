#include "sbdag/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "sbdag/parallel.hpp"
#include "sbdag/rng.hpp"

namespace sbdag {

namespace {

Matrix precision_of(const CovarianceMatrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma.matrix());
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("precision factorization failed");
    Matrix k = llt.solve(Matrix::Identity(sigma.dim(), sigma.dim()));
    return 0.5 * (k + k.transpose());
}

std::pair<WeightedDag, DiagonalVariances> dag_from_precision(const Matrix& prec,
                                                             const Permutation& pi) {
    const int p = static_cast<int>(prec.rows());
    LdltResult f = ldlt_decompose(permute_matrix(pi, prec));
    Matrix b = permute_matrix(pi.inverse(), f.l_strict);
    Vector omega(p);
    for (int j = 0; j < p; ++j) omega[j] = f.d[pi.position_of(j)];
    return {WeightedDag(std::move(b)), DiagonalVariances(std::move(omega))};
}

double trace_from_precision(const Matrix& prec, const Permutation& pi) {
    LdltResult f = ldlt_decompose(permute_matrix(pi, prec));
    return f.d.sum();
}

// dedup key: support triples + weights rounded at 1e-9
std::vector<std::int64_t> dag_key(const WeightedDag& b) {
    std::vector<std::int64_t> key;
    const int p = b.dim();
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < p; ++i) {
            if (std::abs(b(i, j)) > kSupportTol) {
                std::int64_t w = std::llround(b(i, j) * 1e9);
                if (w == 0) w = 0;  // normalize -0
                key.push_back(i);
                key.push_back(j);
                key.push_back(w);
            }
        }
    }
    return key;
}

using MemberMap = std::map<std::vector<std::int64_t>, ClassMember>;

void accumulate_permutation(const Matrix& prec, const Permutation& pi, MemberMap& acc) {
    auto [b, omega] = dag_from_precision(prec, pi);
    auto key = dag_key(b);
    auto it = acc.find(key);
    if (it == acc.end()) {
        const double tr = omega.trace();
        acc.emplace(std::move(key), ClassMember{std::move(b), std::move(omega), pi, tr});
    } else if (pi < it->second.representative) {
        it->second.representative = pi;
    }
}

std::vector<Permutation> sampled_permutations(int p, const ClassOptions& opts) {
    if (opts.sample_size <= 0 && opts.reference == nullptr) {
        std::ostringstream os;
        os << "p = " << p << " exceeds the exact permutation cap " << opts.permutation_cap
           << "; provide sample_size or a reference dag";
        throw EnumerationTooLarge(os.str());
    }
    std::vector<Permutation> perms;
    Rng rng(opts.seed, 0xc1a55);
    for (int r = 0; r < opts.sample_size; ++r) {
        std::vector<int> m(p);
        for (int i = 0; i < p; ++i) m[i] = i;
        rng.shuffle(m);
        perms.emplace_back(std::move(m));
    }
    if (opts.reference != nullptr) {
        for (auto& ord : topological_sorts(*opts.reference, opts.reference_sort_cap)) {
            perms.emplace_back(ord);
        }
    }
    return perms;
}

std::vector<ClassMember> enumerate_members(const CovarianceMatrix& sigma,
                                           const ClassOptions& opts, bool& exact) {
    const int p = sigma.dim();
    const Matrix prec = precision_of(sigma);
    exact = (p <= opts.permutation_cap);
    MemberMap acc;
    if (exact) {
        const std::uint64_t total = factorial(p);
        const int threads = global_threads();
        if (threads <= 1 || total < 5040) {
            for (std::uint64_t idx = 0; idx < total; ++idx) {
                accumulate_permutation(prec, permutation_from_index(p, idx), acc);
            }
        } else {
            std::vector<MemberMap> partial(static_cast<std::size_t>(threads));
            parallel_for_chunks(total, threads, [&](int chunk, std::uint64_t lo, std::uint64_t hi) {
                for (std::uint64_t idx = lo; idx < hi; ++idx) {
                    accumulate_permutation(prec, permutation_from_index(p, idx),
                                           partial[static_cast<std::size_t>(chunk)]);
                }
            });
            for (auto& part : partial) {
                for (auto& [key, member] : part) {
                    auto it = acc.find(key);
                    if (it == acc.end()) {
                        acc.emplace(key, std::move(member));
                    } else if (member.representative < it->second.representative) {
                        it->second.representative = member.representative;
                    }
                }
            }
        }
    } else {
        for (const auto& pi : sampled_permutations(p, opts)) {
            accumulate_permutation(prec, pi, acc);
        }
    }
    std::vector<ClassMember> out;
    out.reserve(acc.size());
    for (auto& [key, member] : acc) out.push_back(std::move(member));
    return out;
}

}  // namespace

std::uint64_t factorial(int p) {
    std::uint64_t f = 1;
    for (int i = 2; i <= p; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

Permutation permutation_from_index(int p, std::uint64_t index) {
    // factorial number system; the stream over index is in lexicographic order
    std::vector<int> pool(p);
    for (int i = 0; i < p; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(p);
    std::uint64_t rem = index;
    for (int i = p; i >= 1; --i) {
        const std::uint64_t f = factorial(i - 1);
        const std::uint64_t q = rem / f;
        rem %= f;
        out.push_back(pool[static_cast<int>(q)]);
        pool.erase(pool.begin() + static_cast<long>(q));
    }
    return Permutation(std::move(out));
}

std::pair<WeightedDag, DiagonalVariances> dag_for_permutation(const CovarianceMatrix& sigma,
                                                              const Permutation& pi) {
    if (pi.size() != sigma.dim())
        throw DimensionMismatch("permutation size does not match covariance");
    return dag_from_precision(precision_of(sigma), pi);
}

IndexSet candidate_parents(const Permutation& pi, int j) {
    if (j < 0 || j >= pi.size()) throw IndexError("node index out of range");
    IndexSet s;
    const int pos = pi.position_of(j);
    for (int k = 0; k < pi.size(); ++k)
        if (pi.position_of(k) > pos) s.push_back(k);
    std::sort(s.begin(), s.end());
    return s;
}

SemCoefficients sem_coefficients(const CovarianceMatrix& sigma, int j, const IndexSet& s) {
    const int p = sigma.dim();
    if (j < 0 || j >= p) throw IndexError("node index out of range");
    SemCoefficients out;
    out.node = j;
    out.neighbourhood = s;
    out.beta = Vector::Zero(p);
    const int k = static_cast<int>(s.size());
    for (int idx : s) {
        if (idx < 0 || idx >= p) throw IndexError("candidate index out of range");
        if (idx == j) throw IndexError("candidate set must exclude the node itself");
    }
    if (k > 0) {
        Matrix sss(k, k);
        Vector ssj(k);
        for (int a = 0; a < k; ++a) {
            ssj[a] = sigma(s[a], j);
            for (int b = 0; b < k; ++b) sss(a, b) = sigma(s[a], s[b]);
        }
        Eigen::LLT<Matrix> llt(sss);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("covariance submatrix is not positive definite");
        const Vector coef = llt.solve(ssj);
        for (int a = 0; a < k; ++a) out.beta[s[a]] = coef[a];
        out.residual_variance = sigma(j, j) - ssj.dot(coef);
    } else {
        out.residual_variance = sigma(j, j);
    }
    for (int idx : s)
        if (std::abs(out.beta[idx]) > kSupportTol) out.support.push_back(idx);
    return out;
}

InvariantSets invariant_set_collection(const CovarianceMatrix& sigma, int j, const IndexSet& s,
                                       int enumeration_cap) {
    const int p = sigma.dim();
    InvariantSets out;
    const SemCoefficients sem = sem_coefficients(sigma, j, s);
    out.m = sem.support;

    // cov(eps_j(S), X_i) = Sigma_ij - beta^T Sigma_{.,i}; the maximal
    // invariant set collects the variables the residual is uncorrelated with
    const Vector cov_eps = sigma.matrix().col(j) - sigma.matrix().transpose() * sem.beta;
    out.maximal = out.m;
    for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        if (std::find(out.m.begin(), out.m.end(), i) != out.m.end()) continue;
        if (std::abs(cov_eps[i]) <= 1e-9) out.maximal.push_back(i);
    }
    std::sort(out.maximal.begin(), out.maximal.end());

    if (enumeration_cap > 0) {
        if (p > enumeration_cap) {
            std::ostringstream os;
            os << "invariant-set enumeration needs 2^" << (p - 1) << " subsets; cap is p <= "
               << enumeration_cap;
            throw EnumerationTooLarge(os.str());
        }
        out.enumerated = true;
        std::vector<int> others;
        for (int i = 0; i < p; ++i)
            if (i != j) others.push_back(i);
        const std::size_t nmask = std::size_t{1} << others.size();
        for (std::size_t mask = 0; mask < nmask; ++mask) {
            IndexSet t;
            for (std::size_t a = 0; a < others.size(); ++a)
                if (mask & (std::size_t{1} << a)) t.push_back(others[a]);
            if (sem_coefficients(sigma, j, t).support == out.m) out.collection.insert(t);
        }
    }
    return out;
}

SupportCollections support_collections(const CovarianceMatrix& sigma, int j,
                                       int enumeration_cap) {
    const int p = sigma.dim();
    if (p > enumeration_cap) {
        std::ostringstream os;
        os << "support collections need 2^" << (p - 1) << " subsets; cap is p <= "
           << enumeration_cap;
        throw EnumerationTooLarge(os.str());
    }
    SupportCollections out;
    std::vector<int> others;
    for (int i = 0; i < p; ++i)
        if (i != j) others.push_back(i);
    const std::size_t nmask = std::size_t{1} << others.size();
    for (std::size_t mask = 0; mask < nmask; ++mask) {
        IndexSet s;
        for (std::size_t a = 0; a < others.size(); ++a)
            if (mask & (std::size_t{1} << a)) s.push_back(others[a]);
        InvariantSets inv = invariant_set_collection(sigma, j, s, /*enumeration_cap=*/0);
        out.supports.insert(inv.m);
        out.maximal_sets.insert(inv.maximal);
    }
    return out;
}

std::pair<int, double> sparsity_parameters(const CovarianceMatrix& sigma, int enumeration_cap) {
    const int p = sigma.dim();
    int d = 0;
    double betamin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p; ++j) {
        SupportCollections coll = support_collections(sigma, j, enumeration_cap);
        for (const IndexSet& m : coll.supports) {
            d = std::max(d, static_cast<int>(m.size()));
            if (m.empty()) continue;
            const SemCoefficients sem = sem_coefficients(sigma, j, m);
            for (int idx : m) {
                const double a = std::abs(sem.beta[idx]);
                if (a > kSupportTol) betamin = std::min(betamin, a);
            }
        }
    }
    return {d, betamin};
}

EquivalenceClassSummary class_summary(const CovarianceMatrix& sigma, const ClassOptions& opts) {
    const int p = sigma.dim();
    EquivalenceClassSummary out;
    out.dags = enumerate_members(sigma, opts, out.exact);
    out.sigma_max_sq = sigma.matrix().diagonal().maxCoeff();

    if (p <= opts.support_cap) {
        auto [d, bm] = sparsity_parameters(sigma, opts.support_cap);
        out.d_sigma = d;
        out.betamin_sigma = bm;
    } else {
        // above the subset cap: report over the enumerated members only
        out.d_sigma = 0;
        out.betamin_sigma = std::numeric_limits<double>::infinity();
        for (const auto& member : out.dags) {
            for (int j = 0; j < p; ++j) {
                int deg = 0;
                for (int i = 0; i < p; ++i) {
                    const double a = std::abs(member.dag(i, j));
                    if (a > kSupportTol) {
                        ++deg;
                        out.betamin_sigma = std::min(out.betamin_sigma, a);
                    }
                }
                out.d_sigma = std::max(out.d_sigma, deg);
            }
        }
    }
    return out;
}

MinTraceResult min_trace_permutation(const CovarianceMatrix& sigma, const ClassOptions& opts) {
    const int p = sigma.dim();
    const Matrix prec = precision_of(sigma);
    const bool exact = (p <= opts.permutation_cap);

    std::vector<Permutation> perms;
    double min_trace = std::numeric_limits<double>::infinity();
    if (exact) {
        // pass 1: traces only, cheap; pass 2 builds DAGs near the minimum
        const std::uint64_t total = factorial(p);
        const int threads = global_threads();
        std::vector<double> traces(total);
        parallel_for_chunks(total, threads, [&](int, std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t idx = lo; idx < hi; ++idx) {
                traces[idx] = trace_from_precision(prec, permutation_from_index(p, idx));
            }
        });
        for (std::uint64_t idx = 0; idx < total; ++idx)
            min_trace = std::min(min_trace, traces[idx]);
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            if (traces[idx] <= min_trace + 1e-9) {
                perms.push_back(permutation_from_index(p, idx));
            }
        }
    } else {
        for (const auto& pi : sampled_permutations(p, opts)) {
            const double tr = trace_from_precision(prec, pi);
            if (tr < min_trace) min_trace = tr;
            perms.push_back(pi);
        }
        std::vector<Permutation> near;
        for (const auto& pi : perms) {
            if (trace_from_precision(prec, pi) <= min_trace + 1e-9) near.push_back(pi);
        }
        perms = std::move(near);
    }

    MemberMap members;
    for (const auto& pi : perms) accumulate_permutation(prec, pi, members);
    if (members.empty()) throw EnumerationTooLarge("no permutations enumerated");

    const ClassMember* best = &members.begin()->second;
    for (const auto& [key, m] : members) {
        if (m.trace < best->trace - 1e-15 ||
            (std::abs(m.trace - best->trace) <= 1e-15 && m.representative < best->representative)) {
            best = &m;
        }
    }
    MinTraceResult res{best->representative, best->trace, members.size() == 1, best->dag,
                       best->omega, exact};
    return res;
}

}  // namespace sbdag
