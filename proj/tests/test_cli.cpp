#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "escapelab/report.hpp"

using namespace escapelab;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(ESCAPELAB_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

json payload(const RunResult& r) {
    json j = json::parse(r.out);
    REQUIRE(j.at("schema_version") == "escape-lab/1");
    return j;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/escapelab_test_" + name;
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace

TEST_CASE("constant command reports the sharp bracket", "[cli]") {
    auto r = run_cli("constant geom:2");
    CHECK(r.exit_code == 0);
    json j = payload(r);
    CHECK(j["result"]["lb"].get<double>() == Approx(std::sqrt(3.0)).margin(1e-9));
    CHECK(j["result"]["ub"].get<double>() == Approx(std::sqrt(3.0)).margin(1e-9));
    CHECK(j["result"]["witness"] == "1/3");
    CHECK(j["result"]["attains"] == true);
    CHECK(j["result"]["lb_symbolic"] == "sqrt(3)");
    CHECK(j["command"]["name"] == "constant");
    CHECK(j["conventions"]["factorial"] == "n_k = (k+1)!");
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
    CHECK(run_cli("constant geom:1").exit_code == 2);
    CHECK(run_cli("constant").exit_code == 2);
    CHECK(run_cli("pair geom:2").exit_code == 2);
    CHECK(run_cli("unknown-command x").exit_code == 2);
    CHECK(run_cli("constant geom:2 --no-such-flag").exit_code == 2);
}

TEST_CASE("pair command exit codes track verdicts", "[cli]") {
    auto yes = run_cli("pair geom:3 1.414213");
    CHECK(yes.exit_code == 0);
    CHECK(payload(yes)["result"]["verdict"] == "certified_yes");

    auto no = run_cli("pair geom:3 1.414213 --strict");
    CHECK(no.exit_code == 1);
    json j = payload(no);
    CHECK(j["result"]["verdict"] == "certified_no");
    CHECK(j["result"]["witness"] == "1/4");
}

TEST_CASE("reports are deterministic and re-runnable", "[cli]") {
    auto a = run_cli("constant patch:geom:2@1=3");
    auto b = run_cli("constant patch:geom:2@1=3");
    json ja = payload(a), jb = payload(b);
    CHECK(ja["result"] == jb["result"]);
    CHECK(ja["command"] == jb["command"]);
    // Re-run the echoed command and compare payloads once more.
    const std::string spec = ja["command"]["spec"];
    auto c = run_cli("constant " + spec);
    CHECK(payload(c)["result"] == ja["result"]);
}

TEST_CASE("profile emits one CSV row per grid point", "[cli]") {
    auto r = run_cli("profile affine --grid 64 --csv");
    CHECK(r.exit_code == 0);
    std::size_t lines = 0;
    bool zero_row = false;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "theta,value,argmax_k,exactness");
    while (std::getline(is, line)) {
        ++lines;
        if (line.rfind("0/1,0,", 0) == 0) zero_row = true;
    }
    CHECK(lines == 64);
    CHECK(zero_row);
}

TEST_CASE("witness command exit codes", "[cli]") {
    auto found = run_cli("witness factorial 0.1 2");
    CHECK(found.exit_code == 0);
    json j = payload(found);
    CHECK(j["result"]["verdict"] == "witness");
    CHECK(j["result"]["exact_deviation"]["value"].get<double>() < 0.1);

    auto none = run_cli("witness geom:2 1.0 2");
    CHECK(none.exit_code == 1);
    CHECK(payload(none)["result"]["verdict"] == "not_found");
}

TEST_CASE("escape commands cover both targets", "[cli]") {
    auto torus = run_cli("escape geom:2 0.3 --point 1/3 --K 10");
    CHECK(torus.exit_code == 0);
    json jt = payload(torus);
    CHECK(jt["result"]["verdict"] == "escaped_at");
    CHECK(jt["result"]["k"] == 0);

    auto trapped = run_cli("escape geom:2 0.4 --point 1/3 --K 20");
    CHECK(trapped.exit_code == 1);
    CHECK(payload(trapped)["result"]["verdict"] == "trapped_up_to");

    const std::string mat = write_temp("rot.json", "[[[ -0.5, 0.866025403784438647], [0,0]],[[0,0],[1,0]]]");
    auto alg = run_cli("escape geom:2 1.7 --matrix " + mat + " --K 10");
    CHECK(alg.exit_code == 0);
    CHECK(payload(alg)["result"]["verdict"] == "escaped_at");
}

TEST_CASE("positivity and root commands parse matrix files", "[cli]") {
    const std::string i2 = write_temp("i2.json", "[[[0,1],[0,0]],[[0,0],[0,1]]]");
    auto pos = run_cli("positivity " + i2 + " geom:3 --K 32");
    CHECK(pos.exit_code == 1);
    json j = payload(pos);
    CHECK(j["result"]["verdict"] == "expected_counterexample");
    CHECK(j["result"]["scan"]["verdict"] == "all_accretive");
    CHECK(j["result"]["scan"]["margin"].get<double>() == 0.0);

    const std::string diag14 = write_temp("diag14.txt", "2\n1,0 0,0\n0,0 4,0\n");
    auto root = run_cli("root " + diag14 + " 2");
    CHECK(root.exit_code == 0);
    CHECK(payload(root)["result"]["verdict"] == "verified");
}

TEST_CASE("semigroup command verdicts", "[cli]") {
    const std::string zero = write_temp("zero.json", "[[[0,0]]]");
    auto forced = run_cli("semigroup " + zero + " 0.1");
    CHECK(forced.exit_code == 0);
    json j = payload(forced);
    CHECK(j["result"]["verdict"] == "identity_forced");
    CHECK(j["result"]["crosscheck_passed"] == true);

    const std::string spin = write_temp("spin.json", "[[[0,6.283185307179586]]]");
    auto viol = run_cli("semigroup " + spin + " 0.1");
    CHECK(viol.exit_code == 1);
    json v = payload(viol);
    CHECK(v["result"]["verdict"] == "violation");
    CHECK(v["result"]["t"].get<double>() == Approx(0.5).margin(1e-9));
    CHECK(v["result"]["value"].get<double>() == Approx(2.0).margin(1e-8));
}

TEST_CASE("lambda-set command lists members", "[cli]") {
    auto r = run_cli("lambda-set affine 2.1 --Q 3");
    CHECK(r.exit_code == 0);
    json j = payload(r);
    CHECK(j["result"]["nontrivial_count"] == 3);
    CHECK(j["result"]["members"].size() == 4);

    // Factorial-count notation for Q.
    auto f = run_cli("lambda-set factorial 0.1 --Q 64!");
    CHECK(f.exit_code == 0);
    CHECK(payload(f)["result"]["nontrivial_count"].get<int>() >= 2);
}

TEST_CASE("matrix parsing round-trips between the two formats", "[cli]") {
    std::mt19937_64 rng(31);
    matops::CMat A(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            A(i, j) = std::complex<double>(std::uniform_real_distribution<double>(-2, 2)(rng),
                                           std::uniform_real_distribution<double>(-2, 2)(rng));
    json as_json = report::matrix_to_json(A);
    matops::CMat back = report::matrix_from_json(as_json);
    CHECK(matops::op_norm(A - back) == 0.0);

    std::ostringstream text;
    text.precision(17);
    text << 3 << "\n";
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) text << A(i, j).real() << "," << A(i, j).imag() << " ";
    matops::CMat back2 = report::matrix_from_text(text.str());
    CHECK(matops::op_norm(A - back2) == 0.0);
}
