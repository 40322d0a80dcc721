#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sbdag/ci.hpp>
#include <sbdag/dag_search.hpp>
#include <sbdag/diagnostics.hpp>
#include <sbdag/equivalence.hpp>
#include <sbdag/linalg.hpp>
#include <sbdag/parallel.hpp>
#include <sbdag/sim.hpp>

namespace py = pybind11;
using namespace sbdag;

namespace {

PenaltySpec penalty_from(const std::string& family, double lambda, double gamma) {
    return PenaltySpec(family_from_name(family), lambda, gamma);
}

PlsOptions pls_options(const std::string& mode, std::uint64_t seed) {
    PlsOptions opts;
    opts.mode = (mode == "cd") ? SolverMode::CoordinateDescent : SolverMode::Exact;
    opts.seed = seed;
    return opts;
}

std::vector<std::vector<int>> ci_set_to_list(const CiSet& set) {
    std::vector<std::vector<int>> out;
    for (const auto& r : set) {
        std::vector<int> row{r.i, r.j};
        row.insert(row.end(), r.cond.begin(), r.cond.end());
        out.push_back(row);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_sbdag, m) {
    m.doc() = "score-based learning of gaussian dags via penalized least squares";

    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError");
    py::register_exception<EnumerationTooLarge>(m, "EnumerationTooLargeError");

    py::class_<Permutation>(m, "Permutation")
        .def(py::init<std::vector<int>>())
        .def("mapping", &Permutation::mapping)
        .def("inverse_mapping", &Permutation::inverse_mapping)
        .def("__len__", &Permutation::size);

    py::class_<PlsSolution>(m, "PlsSolution")
        .def_readonly("theta", &PlsSolution::theta)
        .def_readonly("objective", &PlsSolution::objective)
        .def_readonly("support", &PlsSolution::support)
        .def_readonly("solver", &PlsSolution::solver)
        .def_readonly("converged", &PlsSolution::converged)
        .def_readonly("multiple_optima", &PlsSolution::multiple_optima)
        .def_readonly("ridge_stabilized", &PlsSolution::ridge_stabilized);

    py::class_<FitResult>(m, "FitResult")
        .def_property_readonly("b_hat",
                               [](const FitResult& f) { return f.b_hat.weights(); })
        .def_readonly("objective", &FitResult::objective)
        .def_readonly("column_objectives", &FitResult::column_objectives)
        .def_readonly("variances_hat", &FitResult::variances_hat)
        .def_readonly("canonical_order", &FitResult::canonical_order)
        .def_readonly("permutation_count", &FitResult::permutation_count)
        .def_readonly("mode", &FitResult::mode)
        .def_readonly("converged", &FitResult::converged);

    m.def("set_threads", &set_global_threads, py::arg("n"));

    // linear algebra
    m.def(
        "ldlt_decompose",
        [](const Matrix& a) {
            LdltResult f = ldlt_decompose(a);
            return py::make_tuple(f.l_strict, f.d);
        },
        py::arg("a"), "factor a = (I-L) D^{-1} (I-L)^T, returns (L, diag of D)");
    m.def(
        "permute_matrix",
        [](const std::vector<int>& pi, const Matrix& a) {
            return permute_matrix(Permutation(pi), a);
        },
        py::arg("pi"), py::arg("a"));
    m.def(
        "sigma_of",
        [](const Matrix& b, const Vector& omega) {
            return sigma_of(WeightedDag(b), DiagonalVariances(omega)).matrix();
        },
        py::arg("b"), py::arg("omega"));
    m.def(
        "is_dag",
        [](const Matrix& w) {
            DagCheck c = is_dag(w);
            return py::make_tuple(c.is_dag, c.order);
        },
        py::arg("weights"));
    m.def(
        "sample_gaussian",
        [](const Matrix& sigma, int n, std::uint64_t seed) {
            return sample_gaussian(CovarianceMatrix(sigma), n, seed).matrix();
        },
        py::arg("sigma"), py::arg("n"), py::arg("seed") = 0);

    // equivalence class machinery
    m.def(
        "dag_for_permutation",
        [](const Matrix& sigma, const std::vector<int>& pi) {
            auto [b, om] = dag_for_permutation(CovarianceMatrix(sigma), Permutation(pi));
            return py::make_tuple(b.weights(), om.values());
        },
        py::arg("sigma"), py::arg("pi"));
    m.def(
        "candidate_parents",
        [](const std::vector<int>& pi, int j) { return candidate_parents(Permutation(pi), j); },
        py::arg("pi"), py::arg("j"));
    m.def(
        "sem_coefficients",
        [](const Matrix& sigma, int j, const IndexSet& s) {
            SemCoefficients c = sem_coefficients(CovarianceMatrix(sigma), j, s);
            return py::make_tuple(c.beta, c.residual_variance, c.support);
        },
        py::arg("sigma"), py::arg("j"), py::arg("s"));
    m.def(
        "invariant_sets",
        [](const Matrix& sigma, int j, const IndexSet& s) {
            InvariantSets inv = invariant_set_collection(CovarianceMatrix(sigma), j, s);
            std::vector<IndexSet> coll(inv.collection.begin(), inv.collection.end());
            return py::make_tuple(inv.m, inv.maximal, coll);
        },
        py::arg("sigma"), py::arg("j"), py::arg("s"),
        "returns (m_j(S), M_j(S), N_j(S) when enumerable)");
    m.def(
        "support_collections",
        [](const Matrix& sigma, int j) {
            SupportCollections c = support_collections(CovarianceMatrix(sigma), j);
            std::vector<IndexSet> sup(c.supports.begin(), c.supports.end());
            std::vector<IndexSet> mx(c.maximal_sets.begin(), c.maximal_sets.end());
            return py::make_tuple(sup, mx);
        },
        py::arg("sigma"), py::arg("j"));
    m.def(
        "class_summary",
        [](const Matrix& sigma) {
            EquivalenceClassSummary cls = class_summary(CovarianceMatrix(sigma));
            py::list dags;
            for (const auto& member : cls.dags) {
                dags.append(py::make_tuple(member.dag.weights(), member.omega.values(),
                                           member.representative.mapping(), member.trace));
            }
            return py::make_tuple(dags, cls.d_sigma, cls.betamin_sigma, cls.sigma_max_sq);
        },
        py::arg("sigma"), "returns (members, d, beta_min, sigma_max_sq)");
    m.def(
        "min_trace_permutation",
        [](const Matrix& sigma) {
            MinTraceResult mt = min_trace_permutation(CovarianceMatrix(sigma));
            return py::make_tuple(mt.permutation.mapping(), mt.trace, mt.unique,
                                  mt.dag.weights(), mt.omega.values());
        },
        py::arg("sigma"));

    // penalties
    m.def(
        "penalty_value",
        [](const std::string& family, double lambda, double gamma, double x) {
            return penalty_value(penalty_from(family, lambda, gamma), x);
        },
        py::arg("family"), py::arg("lambda_"), py::arg("gamma"), py::arg("x"));
    m.def(
        "penalty_matrix",
        [](const std::string& family, double lambda, double gamma, const Matrix& b) {
            return penalty_matrix(penalty_from(family, lambda, gamma), b);
        },
        py::arg("family"), py::arg("lambda_"), py::arg("gamma"), py::arg("b"));
    m.def(
        "theory_constants",
        [](const std::string& family, double lambda, double gamma) {
            TheoryConstants c = theory_constants(penalty_from(family, lambda, gamma));
            py::dict d;
            d["rho_prime0_defined"] = c.rho_prime0_defined;
            d["rho_prime0"] = c.rho_prime0;
            d["mu1"] = c.mu1;
            d["mu1_free"] = c.mu1_free;
            d["mu2"] = c.mu2;
            d["mu2_free"] = c.mu2_free;
            d["l0_compatible"] = c.l0_compatible;
            d["mu3"] = c.mu3;
            return d;
        },
        py::arg("family"), py::arg("lambda_"), py::arg("gamma") = 3.0);

    // solvers
    m.def(
        "restricted_pls",
        [](const Vector& y, const Matrix& z, const IndexSet& s, const std::string& family,
           double lambda, double gamma, const std::string& mode, std::uint64_t seed) {
            return restricted_pls(y, z, s, penalty_from(family, lambda, gamma),
                                  pls_options(mode, seed));
        },
        py::arg("y"), py::arg("z"), py::arg("s"), py::arg("family"), py::arg("lambda_"),
        py::arg("gamma") = 3.0, py::arg("mode") = "exact", py::arg("seed") = 0);
    m.def(
        "neighbourhood_fit",
        [](const Matrix& x, int j, const IndexSet& s, const std::string& family, double lambda,
           double gamma, const std::string& mode, std::uint64_t seed) {
            return neighbourhood_fit(DataMatrix(x), j, s, penalty_from(family, lambda, gamma),
                                     pls_options(mode, seed));
        },
        py::arg("x"), py::arg("j"), py::arg("s"), py::arg("family"), py::arg("lambda_"),
        py::arg("gamma") = 3.0, py::arg("mode") = "exact", py::arg("seed") = 0);

    // estimators
    m.def(
        "restricted_minimizer",
        [](const Matrix& x, const std::vector<int>& pi, const std::string& family, double lambda,
           double gamma, std::uint64_t seed) {
            SearchOptions opts;
            opts.pls.seed = seed;
            return restricted_minimizer(DataMatrix(x), Permutation(pi),
                                        penalty_from(family, lambda, gamma), opts);
        },
        py::arg("x"), py::arg("pi"), py::arg("family"), py::arg("lambda_"),
        py::arg("gamma") = 3.0, py::arg("seed") = 0);
    m.def(
        "global_minimizer_dp",
        [](const Matrix& x, const std::string& family, double lambda, double gamma,
           std::uint64_t seed) {
            SearchOptions opts;
            opts.pls.seed = seed;
            return global_minimizer_dp(DataMatrix(x), penalty_from(family, lambda, gamma), opts);
        },
        py::arg("x"), py::arg("family"), py::arg("lambda_"), py::arg("gamma") = 3.0,
        py::arg("seed") = 0);
    m.def(
        "exhaustive_global",
        [](const Matrix& x, const std::string& family, double lambda, double gamma,
           std::uint64_t seed) {
            SearchOptions opts;
            opts.pls.seed = seed;
            return exhaustive_global(DataMatrix(x), penalty_from(family, lambda, gamma), opts);
        },
        py::arg("x"), py::arg("family"), py::arg("lambda_"), py::arg("gamma") = 3.0,
        py::arg("seed") = 0);
    m.def(
        "estimated_permutations",
        [](const Matrix& b_hat, std::uint64_t cap) {
            EstimatedPermutations est = estimated_permutations(WeightedDag(b_hat), cap);
            return py::make_tuple(est.canonical_order, est.count, est.capped);
        },
        py::arg("b_hat"), py::arg("cap") = 1000000);

    // conditional independence
    m.def(
        "d_separated",
        [](const Matrix& g, int i, int j, const IndexSet& s) {
            return d_separated(WeightedDag(g), i, j, s);
        },
        py::arg("g"), py::arg("i"), py::arg("j"), py::arg("s"));
    m.def(
        "pairwise_ci_set",
        [](const Matrix& g) { return ci_set_to_list(pairwise_ci_set(WeightedDag(g))); },
        py::arg("g"), "rows are [i, j, cond...]");
    m.def(
        "true_ci_set",
        [](const Matrix& sigma) { return ci_set_to_list(true_ci_set(CovarianceMatrix(sigma))); },
        py::arg("sigma"));
    m.def(
        "union_ci_population",
        [](const Matrix& sigma) {
            const CovarianceMatrix cov(sigma);
            return ci_set_to_list(union_ci_population(cov, all_permutations(cov.dim())));
        },
        py::arg("sigma"));
    m.def(
        "minimal_imap_check",
        [](const Matrix& g, const Matrix& sigma) {
            return minimal_imap_check(WeightedDag(g), CovarianceMatrix(sigma));
        },
        py::arg("g"), py::arg("sigma"));

    // simulation and diagnostics
    m.def(
        "random_dag_instance",
        [](int p, int d_target, double w_lo, double w_hi, bool equal_variance,
           std::uint64_t seed) {
            SimConfig cfg;
            cfg.p = p;
            cfg.d_target = d_target;
            cfg.weight_lo = w_lo;
            cfg.weight_hi = w_hi;
            cfg.variance_mode = equal_variance ? VarianceMode::Equal : VarianceMode::Random;
            cfg.seed = seed;
            SemInstance inst = random_dag_instance(cfg);
            return py::make_tuple(inst.b0.weights(), inst.omega0.values(),
                                  inst.sigma.matrix());
        },
        py::arg("p"), py::arg("d_target"), py::arg("w_lo") = 0.5, py::arg("w_hi") = 1.5,
        py::arg("equal_variance") = true, py::arg("seed") = 0);
    m.def(
        "concentration_envelope",
        [](int n, double u) {
            Envelope e = concentration_envelope(n, u);
            return py::make_tuple(e.h, e.big_h);
        },
        py::arg("n"), py::arg("u"));
    m.def(
        "empirical_ms_exponent",
        [](const Matrix& z, const Vector& theta, double sigma_sq, const std::string& family,
           double lambda, double gamma, int replicates, std::uint64_t seed) {
            MsExponent e = empirical_ms_exponent(z, theta, sigma_sq,
                                                 penalty_from(family, lambda, gamma),
                                                 replicates, seed);
            return py::make_tuple(e.failure_rate, e.neg_log_rate, e.rate_floored);
        },
        py::arg("z"), py::arg("theta"), py::arg("sigma_sq"), py::arg("family"),
        py::arg("lambda_"), py::arg("gamma") = 3.0, py::arg("replicates") = 200,
        py::arg("seed") = 0);
}
