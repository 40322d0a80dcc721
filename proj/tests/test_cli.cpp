#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sbdag/io.hpp>
#include <sbdag/linalg.hpp>

#include "fixtures.hpp"

using namespace sbdag;
namespace fs = std::filesystem;

namespace {

const std::string cli = SBDAG_CLI_PATH;
const fs::path schemas = fs::path(SBDAG_SOURCE_DIR) / "schemas";

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "sbdag_cli_test";
    fs::create_directories(dir);
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = cli + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WEXITSTATUS(status);
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

fs::path workdir() {
    const fs::path dir = fs::temp_directory_path() / "sbdag_cli_test";
    fs::create_directories(dir);
    return dir;
}

Json parse(const std::string& text) { return Json::parse(text); }

Json load_schema(const std::string& name) {
    std::ifstream f(schemas / name);
    REQUIRE(f.good());
    return Json::parse(f);
}

}  // namespace

TEST_CASE("enumerate-class reproduces the worked example members") {
    const fs::path sigma_csv = workdir() / "sigma4.csv";
    write_matrix_csv(sigma_csv.string(), fixtures::example4_sigma().matrix());

    const RunResult res = run_cli("enumerate-class --sigma " + sigma_csv.string());
    REQUIRE(res.exit_code == 0);
    const Json j = parse(res.out);
    CHECK(validate_against_schema(j, load_schema("class_listing.schema.json")).empty());

    // find the two known members by their edge lists
    auto has_member = [&](const Matrix& b) {
        for (const auto& d : j.at("dags")) {
            Matrix got = Matrix::Zero(4, 4);
            for (const auto& e : d.at("edges"))
                got(e.at("from").get<int>(), e.at("to").get<int>()) = e.at("weight").get<double>();
            if ((got - b).cwiseAbs().maxCoeff() <= 1e-8) return true;
        }
        return false;
    };
    CHECK(has_member(fixtures::example4_b1()));
    CHECK(has_member(fixtures::example4_b2()));
    CHECK(j.at("d_sigma").get<int>() == 3);
}

TEST_CASE("fit produces a schema-valid result end to end") {
    const fs::path data_csv = workdir() / "x.csv";
    const DataMatrix x = sample_gaussian(fixtures::example4_sigma(), 400, 5);
    write_matrix_csv(data_csv.string(), x.matrix());

    const RunResult res = run_cli("fit --data " + data_csv.string() +
                                  " --penalty mcp --lambda 0.1 --gamma 3 --mode dp");
    REQUIRE(res.exit_code == 0);
    const Json j = parse(res.out);
    CHECK(validate_against_schema(j, load_schema("fit_result.schema.json")).empty());
    CHECK(j.at("mode").get<std::string>() == "dp-exact");

    // column objectives sum to the total
    double colsum = 0.0;
    for (const auto& v : j.at("column_objectives")) colsum += v.get<double>();
    CHECK(colsum == doctest::Approx(j.at("objective").get<double>()).epsilon(1e-12));
}

TEST_CASE("missing required flag exits 2 and names the flag") {
    const fs::path data_csv = workdir() / "x2.csv";
    const DataMatrix x = sample_gaussian(CovarianceMatrix(Matrix::Identity(3, 3)), 50, 1);
    write_matrix_csv(data_csv.string(), x.matrix());

    const RunResult res = run_cli("fit --data " + data_csv.string());
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("--lambda") != std::string::npos);
}

TEST_CASE("computational errors exit 1 with the module message") {
    const fs::path bad_csv = workdir() / "bad.csv";
    Matrix indef(2, 2);
    indef << 1, 2, 2, 1;
    write_matrix_csv(bad_csv.string(), indef);
    const RunResult res = run_cli("mintrace --sigma " + bad_csv.string());
    CHECK(res.exit_code == 1);
    CHECK(res.err.find("positive definite") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical output") {
    const fs::path data_csv = workdir() / "x3.csv";
    const DataMatrix x = sample_gaussian(fixtures::example4_sigma(), 300, 9);
    write_matrix_csv(data_csv.string(), x.matrix());
    const std::string args = "fit --data " + data_csv.string() +
                             " --penalty l1 --lambda 0.2 --mode dp --seed 4";
    const RunResult a = run_cli(args);
    const RunResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);

    // threaded run matches as well
    const RunResult c = run_cli(args + " --threads 4");
    CHECK(a.out == c.out);
}

TEST_CASE("mintrace output on the worked example") {
    const fs::path sigma_csv = workdir() / "sigma4b.csv";
    write_matrix_csv(sigma_csv.string(), fixtures::example4_sigma().matrix());
    const RunResult res = run_cli("mintrace --sigma " + sigma_csv.string());
    REQUIRE(res.exit_code == 0);
    const Json j = parse(res.out);
    CHECK(validate_against_schema(j, load_schema("mintrace.schema.json")).empty());
    CHECK(j.at("trace").get<double>() <= 10.0 + 1e-9);
}

TEST_CASE("ci-scan emits schema-valid json lines") {
    const fs::path sigma_csv = workdir() / "diamond.csv";
    write_matrix_csv(sigma_csv.string(), fixtures::diamond_sigma().matrix());

    const RunResult res = run_cli("ci-scan --sigma " + sigma_csv.string());
    REQUIRE(res.exit_code == 0);
    const Json schema = load_schema("ci_relation.schema.json");
    std::stringstream ss(res.out);
    std::string line;
    int count = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        CHECK(validate_against_schema(parse(line), schema).empty());
        ++count;
    }
    CHECK(count == 2);

    // union over orderings gives the same two relations here
    const RunResult uni = run_cli("ci-scan --union --sigma " + sigma_csv.string());
    REQUIRE(uni.exit_code == 0);
    CHECK(uni.out == res.out);

    CHECK(run_cli("ci-scan").exit_code == 2);
}

TEST_CASE("simulate writes report json and replicate csv") {
    const fs::path cfg = workdir() / "sim.cfg";
    {
        std::ofstream f(cfg);
        f << "p = 4\nn = 300\nd_target = 1\nweight_range = 0.7 1.3\n"
          << "variance_mode = equal 1.0\npenalty = mcp 3.0\nlambda_rule = scaled 2.0\n"
          << "replicates = 5\nseed = 3\n";
    }
    const fs::path out = workdir() / "report.json";
    const fs::path rows = workdir() / "rows.csv";
    const RunResult res = run_cli("simulate --config " + cfg.string() + " --out " + out.string() +
                                  " --csv " + rows.string());
    REQUIRE(res.exit_code == 0);
    std::ifstream f(out);
    const Json j = Json::parse(f);
    CHECK(validate_against_schema(j, load_schema("sim_report.schema.json")).empty());
    CHECK(j.at("records").size() == 5);

    std::ifstream rf(rows);
    std::string header;
    std::getline(rf, header);
    CHECK(header ==
          "replicate,support_recovered,hamming,l1_err,l2_err,objective,tr_omega_hat");
    int nrows = 0;
    std::string line;
    while (std::getline(rf, line))
        if (!line.empty()) ++nrows;
    CHECK(nrows == 5);
}

TEST_CASE("diagnose emits a schema-valid condition report") {
    const fs::path sigma_csv = workdir() / "sigma4c.csv";
    write_matrix_csv(sigma_csv.string(), fixtures::example4_sigma().matrix());
    const RunResult res = run_cli("diagnose --sigma " + sigma_csv.string() +
                                  " --penalty mcp --lambda 0.1 --gamma 3 --n 1000");
    REQUIRE(res.exit_code == 0);
    const Json j = parse(res.out);
    CHECK(validate_against_schema(j, load_schema("condition_report.schema.json")).empty());
}

TEST_CASE("csv reader handles headers and rejects ragged rows") {
    const fs::path with_header = workdir() / "h.csv";
    {
        std::ofstream f(with_header);
        f << "a,b\n1.5,2\n3,4\n";
    }
    const Matrix m = read_matrix_csv(with_header.string());
    CHECK(m.rows() == 2);
    CHECK(m(0, 0) == 1.5);

    const fs::path ragged = workdir() / "r.csv";
    {
        std::ofstream f(ragged);
        f << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_matrix_csv(ragged.string()), InvalidArgument);

    // write uses enough digits to round trip doubles
    const fs::path rt = workdir() / "rt.csv";
    Matrix vals(1, 2);
    vals << 1.0 / 3.0, 2.0 / 7.0;
    write_matrix_csv(rt.string(), vals);
    const Matrix back = read_matrix_csv(rt.string());
    CHECK(back(0, 0) == vals(0, 0));
    CHECK(back(0, 1) == vals(0, 1));
}
