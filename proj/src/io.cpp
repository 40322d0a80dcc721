#include "sbdag/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace sbdag {

namespace {

bool parse_double(const std::string& tok, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(tok, &pos);
        while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
        return pos == tok.size();
    } catch (...) {
        return false;
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string fmt17(double v) {
    char buf[64];
    if (std::isfinite(v)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
    } else if (std::isnan(v)) {
        std::snprintf(buf, sizeof buf, "null");
    } else {
        std::snprintf(buf, sizeof buf, v > 0 ? "1e999" : "-1e999");
    }
    return buf;
}

void dump_rec(const Json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * depth), ' ');
    const std::string pad1(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    switch (j.type()) {
        case nlohmann::detail::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad1 + Json(it.key()).dump() + ": ";
                dump_rec(it.value(), out, indent, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case nlohmann::detail::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad1;
                dump_rec(el, out, indent, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case nlohmann::detail::value_t::number_float:
            out += fmt17(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

Json index_set_to_json(const IndexSet& s) {
    Json arr = Json::array();
    for (int v : s) arr.push_back(v);
    return arr;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open csv file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto toks = split_csv_line(line);
        std::vector<double> row;
        bool ok = true;
        for (const auto& tok : toks) {
            double v;
            if (!parse_double(tok, v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw InvalidArgument("non-numeric entry in csv body: " + path);
        }
        first = false;
        if (width == 0) width = row.size();
        if (row.size() != width) throw InvalidArgument("ragged csv rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidArgument("csv file has no numeric rows: " + path);
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write csv file: " + path);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << fmt17(m(i, j));
        }
        out << "\n";
    }
}

std::string dump_json(const Json& j, int indent) {
    std::string out;
    dump_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write json file: " + path);
    out << dump_json(j);
}

Json dag_to_json(const WeightedDag& b, const DiagonalVariances* omega, const Permutation* pi) {
    Json j;
    j["p"] = b.dim();
    Json edges = Json::array();
    for (int col = 0; col < b.dim(); ++col) {
        for (int row = 0; row < b.dim(); ++row) {
            if (std::abs(b(row, col)) > kSupportTol) {
                Json e;
                e["from"] = row;
                e["to"] = col;
                e["weight"] = b(row, col);
                edges.push_back(e);
            }
        }
    }
    j["edges"] = edges;
    if (omega != nullptr) {
        Json vars = Json::array();
        for (int k = 0; k < omega->dim(); ++k) vars.push_back((*omega)(k));
        j["variances"] = vars;
    }
    if (pi != nullptr) {
        Json perm = Json::array();
        for (int k = 0; k < pi->size(); ++k) perm.push_back((*pi)(k));
        j["permutation"] = perm;
    }
    return j;
}

Json penalty_to_json(const PenaltySpec& spec) {
    Json j;
    j["family"] = family_name(spec.family);
    j["lambda"] = spec.lambda;
    j["gamma"] = spec.gamma;
    return j;
}

Json fit_result_to_json(const FitResult& fit) {
    Json j;
    j["p"] = fit.b_hat.dim();
    j["mode"] = fit.mode;
    j["objective"] = fit.objective;
    Json cols = Json::array();
    for (double v : fit.column_objectives) cols.push_back(v);
    j["column_objectives"] = cols;
    Json vars = Json::array();
    for (int k = 0; k < fit.variances_hat.size(); ++k) vars.push_back(fit.variances_hat[k]);
    j["variances_hat"] = vars;
    j["dag"] = dag_to_json(fit.b_hat);
    j["canonical_order"] = index_set_to_json(fit.canonical_order);
    j["permutation_count"] = fit.permutation_count;
    j["permutation_count_capped"] = fit.permutation_count_capped;
    j["penalty"] = penalty_to_json(fit.penalty);
    j["converged"] = fit.converged;
    j["ridge_stabilized"] = fit.ridge_stabilized;
    return j;
}

Json class_summary_to_json(const EquivalenceClassSummary& summary) {
    Json j;
    Json dags = Json::array();
    for (const auto& member : summary.dags) {
        Json d = dag_to_json(member.dag, &member.omega, &member.representative);
        d["trace"] = member.trace;
        dags.push_back(d);
    }
    j["dags"] = dags;
    j["count"] = summary.dags.size();
    j["d_sigma"] = summary.d_sigma;
    if (std::isfinite(summary.betamin_sigma)) {
        j["betamin_sigma"] = summary.betamin_sigma;
    } else {
        j["betamin_sigma"] = nullptr;  // +inf sentinel: no edges anywhere
    }
    j["sigma_max_sq"] = summary.sigma_max_sq;
    j["exact"] = summary.exact;
    return j;
}

Json min_trace_to_json(const MinTraceResult& mt) {
    Json j;
    Json perm = Json::array();
    for (int k = 0; k < mt.permutation.size(); ++k) perm.push_back(mt.permutation(k));
    j["permutation"] = perm;
    j["trace"] = mt.trace;
    j["unique"] = mt.unique;
    j["exact"] = mt.exact;
    j["dag"] = dag_to_json(mt.dag, &mt.omega);
    return j;
}

Json ci_relation_to_json(const CiRelation& rel) {
    Json j;
    j["i"] = rel.i;
    j["j"] = rel.j;
    j["cond"] = index_set_to_json(rel.cond);
    return j;
}

std::string ci_set_to_jsonl(const CiSet& set) {
    std::string out;
    for (const auto& rel : set) {
        out += ci_relation_to_json(rel).dump();
        out += "\n";
    }
    return out;
}

Json experiment_report_to_json(const ExperimentReport& report) {
    Json j;
    const SimConfig& c = report.config;
    Json cfg;
    cfg["p"] = c.p;
    cfg["n"] = c.n;
    cfg["d_target"] = c.d_target;
    cfg["weight_range"] = Json::array({c.weight_lo, c.weight_hi});
    cfg["variance_mode"] = (c.variance_mode == VarianceMode::Equal) ? "equal" : "random";
    if (c.variance_mode == VarianceMode::Equal) {
        cfg["equal_variance"] = c.equal_variance;
    } else {
        cfg["variance_range"] = Json::array({c.var_lo, c.var_hi});
    }
    cfg["penalty"] = penalty_to_json(c.penalty());
    cfg["lambda_rule"] = (c.lambda_rule == LambdaRule::Fixed) ? "fixed" : "scaled";
    cfg["lambda"] = c.lambda();
    if (c.lambda_rule == LambdaRule::Scaled) cfg["lambda_c"] = c.lambda_c;
    cfg["replicates"] = c.replicates;
    cfg["seed"] = c.seed;
    j["config"] = cfg;
    j["recovery_rate"] = report.recovery_rate;
    j["mean_l1"] = report.mean_l1;
    j["mean_l2"] = report.mean_l2;
    j["mean_hamming"] = report.mean_hamming;
    Json recs = Json::array();
    for (const auto& r : report.records) {
        Json rec;
        rec["replicate"] = r.replicate;
        rec["support_recovered"] = r.support_recovered;
        rec["hamming"] = r.hamming;
        rec["l1_err"] = r.l1_err;
        rec["l2_err"] = r.l2_err;
        rec["objective"] = r.objective;
        rec["tr_omega_hat"] = r.tr_omega_hat;
        recs.push_back(rec);
    }
    j["records"] = recs;
    return j;
}

std::string experiment_report_to_csv(const ExperimentReport& report) {
    std::string out = "replicate,support_recovered,hamming,l1_err,l2_err,objective,tr_omega_hat\n";
    for (const auto& r : report.records) {
        out += std::to_string(r.replicate) + "," + (r.support_recovered ? "1" : "0") + "," +
               std::to_string(r.hamming) + "," + fmt17(r.l1_err) + "," + fmt17(r.l2_err) + "," +
               fmt17(r.objective) + "," + fmt17(r.tr_omega_hat) + "\n";
    }
    return out;
}

Json condition_report_to_json(const ConditionReport& rep) {
    Json j;
    j["gw_holds"] = rep.gw_holds;
    j["gw_margin"] = rep.gw_margin;
    j["re_kappa_sq"] = rep.re_kappa_sq;
    j["re_method"] = rep.re_method;
    j["betamin_ratio"] = rep.betamin_ratio;
    j["betamin_required"] = "> 2";
    j["mintrace_ratio"] = rep.mintrace_ratio;
    j["mintrace_gap"] = rep.mintrace_gap;
    j["mintrace_degenerate"] = rep.mintrace_degenerate;
    j["d_sigma"] = rep.d_sigma;
    if (std::isfinite(rep.betamin_sigma)) {
        j["betamin_sigma"] = rep.betamin_sigma;
    } else {
        j["betamin_sigma"] = nullptr;
    }
    j["lambda_min_sigma"] = rep.lambda_min_sigma;
    return j;
}

namespace {

std::vector<std::string> tokens_of(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

SimConfig parse_sim_config(const std::string& text) {
    SimConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!tokens_of(line).empty())
                throw InvalidArgument("config line " + std::to_string(lineno) +
                                      " is not 'key = value'");
            continue;
        }
        auto keys = tokens_of(line.substr(0, eq));
        auto vals = tokens_of(line.substr(eq + 1));
        // values may be comma separated as well
        std::vector<std::string> flat;
        for (auto& v : vals) {
            std::stringstream vs(v);
            std::string piece;
            while (std::getline(vs, piece, ','))
                if (!piece.empty()) flat.push_back(piece);
        }
        if (keys.size() != 1 || flat.empty())
            throw InvalidArgument("config line " + std::to_string(lineno) +
                                  " is not 'key = value'");
        const std::string& key = keys[0];
        auto need = [&](std::size_t c) {
            if (flat.size() != c)
                throw InvalidArgument("config key " + key + " expects " + std::to_string(c) +
                                      " value(s)");
        };
        if (key == "p") {
            need(1);
            cfg.p = std::stoi(flat[0]);
        } else if (key == "n") {
            need(1);
            cfg.n = std::stoi(flat[0]);
        } else if (key == "d_target") {
            need(1);
            cfg.d_target = std::stoi(flat[0]);
        } else if (key == "weight_range") {
            need(2);
            cfg.weight_lo = std::stod(flat[0]);
            cfg.weight_hi = std::stod(flat[1]);
        } else if (key == "variance_mode") {
            if (flat[0] == "equal") {
                need(2);
                cfg.variance_mode = VarianceMode::Equal;
                cfg.equal_variance = std::stod(flat[1]);
            } else if (flat[0] == "random") {
                need(3);
                cfg.variance_mode = VarianceMode::Random;
                cfg.var_lo = std::stod(flat[1]);
                cfg.var_hi = std::stod(flat[2]);
            } else {
                throw InvalidArgument("variance_mode must be 'equal w0sq' or 'random lo hi'");
            }
        } else if (key == "penalty") {
            if (flat.size() == 1) {
                cfg.penalty_family = family_from_name(flat[0]);
            } else {
                need(2);
                cfg.penalty_family = family_from_name(flat[0]);
                cfg.penalty_gamma = std::stod(flat[1]);
            }
        } else if (key == "lambda_rule") {
            need(2);
            if (flat[0] == "fixed") {
                cfg.lambda_rule = LambdaRule::Fixed;
                cfg.lambda_value = std::stod(flat[1]);
            } else if (flat[0] == "scaled") {
                cfg.lambda_rule = LambdaRule::Scaled;
                cfg.lambda_c = std::stod(flat[1]);
            } else {
                throw InvalidArgument("lambda_rule must be 'fixed v' or 'scaled c'");
            }
        } else if (key == "replicates") {
            need(1);
            cfg.replicates = std::stoi(flat[0]);
        } else if (key == "seed") {
            need(1);
            cfg.seed = static_cast<std::uint64_t>(std::stoull(flat[0]));
        } else {
            throw InvalidArgument("unknown config key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

namespace {

bool type_matches(const Json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
}

}  // namespace

std::string validate_against_schema(const Json& value, const Json& schema) {
    if (schema.contains("type")) {
        const auto& t = schema.at("type");
        bool ok = false;
        if (t.is_array()) {
            for (const auto& tt : t) ok = ok || type_matches(value, tt.get<std::string>());
        } else {
            ok = type_matches(value, t.get<std::string>());
        }
        if (!ok) return "type mismatch, expected " + t.dump() + " got " + value.dump().substr(0, 80);
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema.at("enum")) ok = ok || (e == value);
        if (!ok) return "enum mismatch for " + value.dump();
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& k : schema.at("required")) {
                if (!value.contains(k.get<std::string>()))
                    return "missing required key " + k.get<std::string>();
            }
        }
        if (schema.contains("properties")) {
            for (auto it = schema.at("properties").begin(); it != schema.at("properties").end();
                 ++it) {
                if (value.contains(it.key())) {
                    auto err = validate_against_schema(value.at(it.key()), it.value());
                    if (!err.empty()) return it.key() + ": " + err;
                }
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        int idx = 0;
        for (const auto& el : value) {
            auto err = validate_against_schema(el, schema.at("items"));
            if (!err.empty()) return "[" + std::to_string(idx) + "]: " + err;
            ++idx;
        }
    }
    return "";
}

}  // namespace sbdag
