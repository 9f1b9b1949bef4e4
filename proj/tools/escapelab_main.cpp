// escapelab: certified Jamison-constant bounds for integer sequences plus
// escape and accretive-positivity experiments on concrete matrices.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "escapelab/circle.hpp"
#include "escapelab/errors.hpp"
#include "escapelab/escape.hpp"
#include "escapelab/mat.hpp"
#include "escapelab/positivity.hpp"
#include "escapelab/report.hpp"
#include "escapelab/seq.hpp"

namespace el = escapelab;
using el::report::json;
using el::report::Report;

namespace {

struct GlobalOpts {
    bool csv = false;
    double tol = 1e-9;
    std::uint64_t seed = 12345;
    long long K = -1;  // -1: per-command default
    std::string Q;     // decimal, optionally with a trailing '!' (factorial)
    std::string out_path;
};

el::BigInt parse_count(const std::string& text) {
    if (text.empty()) throw el::UsageError("empty count");
    std::string digits = text;
    bool factorial = false;
    if (digits.back() == '!') {
        factorial = true;
        digits.pop_back();
    }
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw el::UsageError("bad count token '" + text + "'");
    el::BigInt v(digits, 10);
    if (factorial) {
        if (v > 100000) throw el::UsageError("factorial count too large");
        v = el::big_factorial(v.get_ui());
    }
    return v;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw el::UsageError("empty entry in list '" + text + "'");
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw el::UsageError("empty list");
    return out;
}

// Exact rational coordinates: "p/q", decimal literals, or integers.
el::BigRat parse_rational(const std::string& tok) {
    if (tok.empty()) throw el::UsageError("empty rational token");
    try {
        if (tok.find('/') != std::string::npos) {
            el::BigRat r(tok, 10);
            r.canonicalize();
            return r;
        }
        const bool neg = tok.front() == '-';
        std::string body = neg ? tok.substr(1) : tok;
        auto dot = body.find('.');
        std::string digits = dot == std::string::npos ? body : body.substr(0, dot) + body.substr(dot + 1);
        if (digits.empty()) throw el::UsageError("bad rational token '" + tok + "'");
        el::BigInt num(digits, 10);
        el::BigInt den = 1;
        if (dot != std::string::npos) {
            el::BigInt ten(10);
            for (std::size_t i = 0; i < body.size() - dot - 1; ++i) den *= ten;
        }
        if (neg) num = -num;
        return el::make_rat(num, den);
    } catch (const std::invalid_argument&) {
        throw el::UsageError("bad rational token '" + tok + "'");
    }
}

std::vector<el::BigRat> parse_rational_list(const std::string& text) {
    std::vector<el::BigRat> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_rational(tok));
    if (out.empty()) throw el::UsageError("empty list");
    return out;
}

el::escape::LatticeBasis parse_lattice(const std::string& text, std::size_t ambient_hint) {
    if (text.empty() || text == "zn") return el::escape::LatticeBasis::standard(ambient_hint);
    if (text.rfind("zn:", 0) == 0) return el::escape::LatticeBasis::standard(std::stoul(text.substr(3)));
    std::ifstream f(text);
    if (!f) throw el::UsageError("cannot open lattice file '" + text + "'");
    json j = json::parse(f);
    el::escape::LatticeBasis b;
    for (const auto& row : j.at("vectors")) b.vectors.push_back(row.get<std::vector<double>>());
    if (b.vectors.empty()) throw el::UsageError("lattice file has no vectors");
    b.ambient = j.contains("ambient") ? j.at("ambient").get<std::size_t>() : b.vectors.front().size();
    return b;
}

std::string csv_escape_trace(const el::escape::EscapeReport& rep) {
    std::ostringstream os;
    os.precision(15);
    os << "k,value\n";
    for (std::size_t k = 0; k < rep.trace.size(); ++k) os << k << "," << rep.trace[k] << "\n";
    return os.str();
}

void emit(const Report& rep, const GlobalOpts& g, const std::optional<std::string>& csv_payload) {
    std::string text;
    if (g.csv && csv_payload) {
        text = *csv_payload;
    } else {
        text = rep.to_json().dump(2) + "\n";
    }
    if (!g.out_path.empty()) {
        std::ofstream f(g.out_path);
        if (!f) throw el::UsageError("cannot open output file '" + g.out_path + "'");
        f << text;
    }
    std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"escapelab: certified Jamison constants, escape experiments, accretive positivity"};
    app.require_subcommand(1);
    GlobalOpts g;
    bool want_json = false;
    app.add_flag("--json", want_json, "emit JSON reports (the default)");
    app.add_flag("--csv", g.csv, "emit tabular payloads as CSV instead of JSON");
    app.add_option("--tol", g.tol, "default numeric tolerance")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "seed echoed into reports (reserved for generators)");
    app.add_option("--K", g.K, "truncation index for scans");
    app.add_option("--Q", g.Q, "denominator limit (decimal, '!' suffix allowed)");
    app.add_option("--out", g.out_path, "also write the report to this file");

    // constant
    std::string c_spec;
    double c_theta0 = 1e-3;
    std::size_t c_budget = 10000;
    auto* cmd_constant = app.add_subcommand("constant", "certified two-sided bounds on the Jamison constant");
    cmd_constant->add_option("spec", c_spec, "sequence spec")->required();
    cmd_constant->add_option("--theta0", c_theta0, "left edge of the branch-and-bound region");
    cmd_constant->add_option("--budget", c_budget, "branch-and-bound node budget");

    // pair
    std::string p_spec;
    double p_eps = 0;
    bool p_strict = false;
    double p_eps_tol = 1e-6;
    auto* cmd_pair = app.add_subcommand("pair", "decide whether (spec, epsilon) is a Jamison pair");
    cmd_pair->add_option("spec", p_spec)->required();
    cmd_pair->add_option("epsilon", p_eps)->required();
    cmd_pair->add_flag("--strict", p_strict, "require strict inequality for every lambda != 1");
    cmd_pair->add_option("--eps-tol", p_eps_tol, "tolerance for matching epsilon against attained values");

    // lambda-set
    std::string l_spec;
    double l_eps = 0;
    auto* cmd_lambda = app.add_subcommand("lambda-set", "rational points with deviation below epsilon");
    cmd_lambda->add_option("spec", l_spec)->required();
    cmd_lambda->add_option("epsilon", l_eps)->required();

    // profile
    std::string pr_spec;
    std::size_t pr_grid = 4096;
    auto* cmd_profile = app.add_subcommand("profile", "deviation profile over a uniform theta grid");
    cmd_profile->add_option("spec", pr_spec)->required();
    cmd_profile->add_option("--grid", pr_grid, "number of grid points");

    // escape
    std::string e_spec, e_matrix, e_point, e_lattice;
    double e_eps = 0;
    auto* cmd_escape = app.add_subcommand("escape", "first escape index against a ball around the identity");
    cmd_escape->add_option("spec", e_spec)->required();
    cmd_escape->add_option("epsilon", e_eps)->required();
    cmd_escape->add_option("--matrix", e_matrix, "matrix file: algebra-ball escape");
    cmd_escape->add_option("--point", e_point, "comma-separated real vector: torus escape");
    cmd_escape->add_option("--lattice", e_lattice, "lattice file or zn[:r] (default: standard basis)");

    // positivity
    std::string po_matrix, po_spec;
    bool po_strict = false;
    auto* cmd_pos = app.add_subcommand("positivity", "accretive-power scan cross-checked against positivity");
    cmd_pos->add_option("matrix", po_matrix, "matrix file")->required();
    cmd_pos->add_option("spec", po_spec)->required();
    cmd_pos->add_flag("--strict", po_strict, "strict accretivity (Re A^{n_k} > 0)");

    // root
    std::string r_matrix;
    unsigned r_m = 2;
    std::size_t r_angles = 1024;
    double r_tol_res = 1e-8, r_tol_sector = 1e-6;
    auto* cmd_root = app.add_subcommand("root", "sectorial m-th root verification");
    cmd_root->add_option("matrix", r_matrix)->required();
    cmd_root->add_option("m", r_m)->required()->check(CLI::Range(2u, 64u));
    cmd_root->add_option("--angles", r_angles, "support angles for the numerical range");
    cmd_root->add_option("--tol-residual", r_tol_res);
    cmd_root->add_option("--tol-sector", r_tol_sector);

    // semigroup
    std::string s_matrix, s_times;
    double s_eps = 0, s_grid = 1e-3;
    auto* cmd_semi = app.add_subcommand("semigroup", "rigidity scan of exp(tG) over a time set");
    cmd_semi->add_option("generator", s_matrix, "generator matrix file")->required();
    cmd_semi->add_option("epsilon", s_eps)->required();
    cmd_semi->add_option("--grid", s_grid, "grid resolution on [0,1]");
    cmd_semi->add_option("--times", s_times, "extra times, comma separated");

    // witness
    std::string w_spec;
    double w_eps = 0;
    std::size_t w_dim = 2, w_budget = 2000;
    auto* cmd_witness = app.add_subcommand("witness", "non-Jamison witness matrix search");
    cmd_witness->add_option("spec", w_spec)->required();
    cmd_witness->add_option("epsilon", w_eps)->required();
    cmd_witness->add_option("d", w_dim, "matrix dimension")->required();
    cmd_witness->add_option("--budget", w_budget, "witness search budget");

    // Let global flags (--K, --Q, --csv, ...) appear after the subcommand.
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    std::optional<std::string> csv_payload;
    int exit_code = 0;
    try {
        json cmd_echo;
        cmd_echo["seed"] = g.seed;
        if (app.got_subcommand(cmd_constant)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(c_spec);
            el::circle::ConstantOptions opt;
            opt.lower.theta0 = c_theta0;
            opt.lower.budget = c_budget;
            if (g.K >= 0) opt.lower.K = static_cast<std::size_t>(g.K);
            if (!g.Q.empty()) {
                el::BigInt Q = parse_count(g.Q);
                if (Q < 2 || Q > 1000000) throw el::UsageError("constant needs 2 <= Q <= 10^6");
                opt.upper.Q = Q.get_ui();
            }
            cmd_echo["name"] = "constant";
            cmd_echo["spec"] = spec.to_string();
            auto est = el::circle::jamison_constant(spec, opt);
            rep.result = el::report::to_json(est);
            rep.certificates = rep.result["certificates"];
            rep.result.erase("certificates");
            rep.certificates["quotient"] = el::report::to_json(el::seqcore::quotient_bound(spec));
        } else if (app.got_subcommand(cmd_pair)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(p_spec);
            el::circle::PairOptions opt;
            opt.attain_tol = p_eps_tol;
            if (!g.Q.empty()) {
                el::BigInt Q = parse_count(g.Q);
                if (Q < 2 || Q > 100000) throw el::UsageError("pair needs 2 <= Q <= 10^5");
                opt.enumeration.Q = Q.get_ui();
            }
            cmd_echo["name"] = "pair";
            cmd_echo["spec"] = spec.to_string();
            cmd_echo["epsilon"] = p_eps;
            cmd_echo["strict"] = p_strict;
            auto res = el::circle::pair_check(spec, p_eps, p_strict, opt);
            rep.result = el::report::to_json(res);
            rep.certificates = {{"attain_tol", p_eps_tol}, {"Q", opt.enumeration.Q}};
            exit_code = res.verdict == el::circle::PairVerdict::CertifiedNo ? 1 : 0;
        } else if (app.got_subcommand(cmd_lambda)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(l_spec);
            el::BigInt Q = g.Q.empty() ? el::BigInt(64) : parse_count(g.Q);
            cmd_echo["name"] = "lambda-set";
            cmd_echo["spec"] = spec.to_string();
            cmd_echo["epsilon"] = l_eps;
            cmd_echo["Q"] = Q.get_str();
            auto res = el::circle::lambda_set(spec, l_eps, Q);
            rep.result = el::report::to_json(res);
            std::ostringstream os;
            os.precision(15);
            os << "theta,value,argmax_k,exactness\n";
            for (const auto& m : res.members)
                os << m.point.to_string() << "," << m.deviation.value << ","
                   << (m.deviation.argmax_k ? std::to_string(*m.deviation.argmax_k) : "") << ",exact_algebraic\n";
            csv_payload = os.str();
        } else if (app.got_subcommand(cmd_profile)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(pr_spec);
            if (pr_grid < 1) throw el::UsageError("grid must be >= 1");
            std::size_t K = g.K >= 0 ? static_cast<std::size_t>(g.K) : el::circle::suggested_truncation(spec);
            cmd_echo["name"] = "profile";
            cmd_echo["spec"] = spec.to_string();
            cmd_echo["K"] = K;
            cmd_echo["grid"] = pr_grid;
            std::ostringstream os;
            os.precision(15);
            os << "theta,value,argmax_k,exactness\n";
            json rows = json::array();
            for (std::size_t i = 0; i < pr_grid; ++i) {
                auto point = el::circle::UnimodularPoint::rational(el::BigInt(static_cast<unsigned long>(i)),
                                                                   el::BigInt(static_cast<unsigned long>(pr_grid)));
                auto d = el::circle::deviation(point, spec, K);
                std::string exact = d.exactness == el::circle::DevExactness::ExactAlgebraic
                                        ? "exact_algebraic"
                                        : "truncated_at_" + std::to_string(d.truncation_K);
                os << point.to_string() << "," << d.value << ","
                   << (d.argmax_k ? std::to_string(*d.argmax_k) : "") << "," << exact << "\n";
                rows.push_back({{"theta", point.to_string()},
                                {"value", d.value},
                                {"argmax_k", d.argmax_k ? json(*d.argmax_k) : json()},
                                {"exactness", exact}});
            }
            rep.result = {{"rows", rows}, {"row_count", pr_grid}};
            csv_payload = os.str();
        } else if (app.got_subcommand(cmd_escape)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(e_spec);
            std::size_t K = g.K >= 0 ? static_cast<std::size_t>(g.K) : 16;
            cmd_echo["name"] = "escape";
            cmd_echo["spec"] = spec.to_string();
            cmd_echo["epsilon"] = e_eps;
            cmd_echo["K"] = K;
            el::escape::EscapeReport res;
            if (!e_matrix.empty()) {
                cmd_echo["target"] = "algebra";
                res = el::escape::algebra_escape(el::report::read_matrix(e_matrix), spec, e_eps, K);
            } else if (!e_point.empty()) {
                cmd_echo["target"] = "torus";
                std::vector<el::BigRat> x = parse_rational_list(e_point);
                res = el::escape::torus_escape(x, parse_lattice(e_lattice, x.size()), spec, e_eps, K);
            } else {
                throw el::UsageError("escape needs --matrix FILE or --point LIST");
            }
            rep.result = el::report::to_json(res);
            csv_payload = csv_escape_trace(res);
            exit_code = res.escaped ? 0 : 1;
        } else if (app.got_subcommand(cmd_pos)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(po_spec);
            std::size_t K = g.K >= 0 ? static_cast<std::size_t>(g.K) : 32;
            cmd_echo["name"] = "positivity";
            cmd_echo["spec"] = spec.to_string();
            cmd_echo["K"] = K;
            cmd_echo["strict"] = po_strict;
            auto res = el::positivity::positivity_cross_check(el::report::read_matrix(po_matrix), spec, K, g.tol,
                                                              po_strict);
            rep.result = el::report::to_json(res);
            rep.certificates = {{"tol", g.tol}, {"K", K}};
            std::ostringstream os;
            os.precision(15);
            os << "k,n_k,min_eig_re\n";
            for (const auto& e : res.scan.per_k) os << e.k << "," << e.n_k << "," << e.min_eig << "\n";
            csv_payload = os.str();
            exit_code = res.verdict == el::positivity::CrossCheckVerdict::ConsistentPositive ||
                                res.verdict == el::positivity::CrossCheckVerdict::InconclusiveCertificate
                            ? 0
                            : 1;
        } else if (app.got_subcommand(cmd_root)) {
            el::positivity::SectorRootOptions opt;
            opt.angles = r_angles;
            opt.residual_tol = r_tol_res;
            opt.sector_tol = r_tol_sector;
            cmd_echo["name"] = "root";
            cmd_echo["m"] = r_m;
            auto res = el::positivity::sector_root_check(el::report::read_matrix(r_matrix), r_m, opt);
            rep.result = el::report::to_json(res);
            rep.certificates = {{"angles", r_angles}, {"residual_tol", r_tol_res}, {"sector_tol", r_tol_sector}};
            exit_code = res.stage == el::positivity::SectorRootStage::Verified ? 0 : 1;
        } else if (app.got_subcommand(cmd_semi)) {
            el::escape::TimeSet times;
            times.grid_resolution = s_grid;
            if (!s_times.empty()) times.extra_times = parse_double_list(s_times);
            cmd_echo["name"] = "semigroup";
            cmd_echo["epsilon"] = s_eps;
            cmd_echo["grid"] = s_grid;
            auto res = el::escape::semigroup_scan(el::report::read_matrix(s_matrix), times, s_eps);
            rep.result = el::report::to_json(res);
            rep.certificates = {{"grid_resolution", s_grid},
                                {"eps_F", res.eps_F},
                                {"threshold", res.threshold},
                                {"quotient_assumed_prefix_only", res.quotient_assumed}};
            exit_code = res.identity_forced ? 0 : 1;
        } else if (app.got_subcommand(cmd_witness)) {
            el::seqcore::SequenceSpec spec = el::seqcore::parse_spec(w_spec);
            cmd_echo["name"] = "witness";
            cmd_echo["spec"] = spec.to_string();
            cmd_echo["epsilon"] = w_eps;
            cmd_echo["d"] = w_dim;
            auto res = el::escape::non_jamison_witness(spec, w_eps, w_dim, w_budget);
            rep.result = el::report::to_json(res);
            rep.certificates = {{"budget", w_budget}};
            exit_code = res.found ? 0 : 1;
        }
        rep.command = cmd_echo;
    } catch (const el::Error& e) {
        json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << err.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime_error"}, {"message", e.what()}}.dump(2) << "\n";
        return 2;
    }
    rep.timing_ms =
        std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0).count() / 1000.0;
    rep.exit_code = exit_code;
    emit(rep, g, csv_payload);
    return exit_code;
}
