#ifndef ESCAPELAB_REPORT_HPP
#define ESCAPELAB_REPORT_HPP

#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "escapelab/circle.hpp"
#include "escapelab/errors.hpp"
#include "escapelab/escape.hpp"
#include "escapelab/mat.hpp"
#include "escapelab/positivity.hpp"
#include "escapelab/seq.hpp"

namespace escapelab::report {

using nlohmann::json;

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

// Recognize common algebraic values for symbolic echo in reports.
inline std::optional<std::string> symbolic(double v) {
    constexpr double tol = 1e-12;
    if (std::abs(v) <= tol) return "0";
    if (std::abs(v - 1.0) <= tol) return "1";
    if (std::abs(v - 2.0) <= tol) return "2";
    if (std::abs(v - std::sqrt(2.0)) <= tol) return "sqrt(2)";
    if (std::abs(v - std::sqrt(3.0)) <= tol) return "sqrt(3)";
    for (int c = 2; c <= 64; ++c) {
        if (std::abs(v - 2.0 * std::sin(M_PI / (c + 1))) <= tol)
            return "2*sin(pi/" + std::to_string(c + 1) + ")";
    }
    return std::nullopt;
}

// JSON has no infinities; encode them as stable strings.
inline json num_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline json value_json(double v) {
    json j;
    j["value"] = v;
    if (auto s = symbolic(v)) j["symbolic"] = *s;
    return j;
}

inline json algebraic_json(const std::pair<BigInt, BigInt>& sq) {
    return json{{"s", sq.first.get_str()}, {"q", sq.second.get_str()}, {"form", "2*sin(pi*s/q)"}};
}

// ---------------------------------------------------------------------------
// matrix I/O: JSON array-of-arrays of [re, im], or text "d" then d^2 "re,im"

inline matops::CMat matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw UsageError("matrix JSON must be a nonempty array of rows");
    const auto d = rows.size();
    matops::CMat A(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!rows[i].is_array() || rows[i].size() != d) throw UsageError("matrix JSON must be square");
        for (std::size_t j = 0; j < d; ++j) {
            const json& e = rows[i][j];
            if (!e.is_array() || e.size() != 2) throw UsageError("matrix entries must be [re, im] pairs");
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(e[0].get<double>(), e[1].get<double>());
        }
    }
    return A;
}

inline matops::CMat matrix_from_text(const std::string& text) {
    std::istringstream is(text);
    std::size_t d = 0;
    if (!(is >> d) || d == 0) throw UsageError("matrix text must start with the dimension");
    matops::CMat A(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            std::string tok;
            if (!(is >> tok)) throw UsageError("matrix text ended early");
            auto comma = tok.find(',');
            if (comma == std::string::npos) throw UsageError("matrix entries must be re,im");
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
        }
    return A;
}

inline matops::CMat parse_matrix(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '[') return matrix_from_json(json::parse(text));
        break;
    }
    return matrix_from_text(text);
}

inline matops::CMat read_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open matrix file '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_matrix(buf.str());
}

inline json matrix_to_json(const matops::CMat& A) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back({A(i, j).real(), A(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// result payloads

inline json to_json(const circle::DeviationResult& d) {
    json j;
    j["value"] = d.value;
    if (auto s = symbolic(d.value)) j["symbolic"] = *s;
    if (d.argmax_k) j["argmax_k"] = *d.argmax_k;
    j["exactness"] = d.exactness == circle::DevExactness::ExactAlgebraic
                         ? "exact_algebraic"
                         : "truncated_at_" + std::to_string(d.truncation_K);
    if (d.algebraic) j["algebraic"] = algebraic_json(*d.algebraic);
    return j;
}

inline json to_json(const seqcore::QuotientReport& q) {
    json j;
    if (q.bound) {
        j["bound"] = escapelab::to_string(*q.bound);
        j["bound_value"] = q.bound->get_d();
    } else {
        j["bound"] = "unbounded";
    }
    if (q.achieved_at) j["achieved_at"] = *q.achieved_at;
    j["certificate"] = q.certificate == seqcore::QuotientCertificate::ExactForFamily
                           ? "exact_for_family"
                           : "prefix_only_" + std::to_string(q.prefix_length);
    return j;
}

inline json to_json(const circle::JamisonEstimate& est) {
    json j;
    j["lb"] = est.lower_bound;
    j["ub"] = est.upper_bound;
    if (auto s = symbolic(est.lower_bound)) j["lb_symbolic"] = *s;
    if (auto s = symbolic(est.upper_bound)) j["ub_symbolic"] = *s;
    j["lower_region"] = est.lower_region == circle::LowerRegion::Global ? "global" : "theta_at_least";
    j["witness"] = est.witness.to_string();
    j["attains"] = est.witness_attains;
    j["truncation_K"] = est.truncation_K;
    if (est.upper_algebraic) j["ub_algebraic"] = algebraic_json(*est.upper_algebraic);
    json cert;
    if (est.lower_detail.quotient_c) {
        cert["quotient_bound"] = escapelab::to_string(*est.lower_detail.quotient_c);
        cert["analytic_lower"] = est.lower_detail.value();
    }
    if (est.lower_detail.region_computed) {
        cert["region_lower"] = est.lower_detail.region_value;
        cert["region_theta0"] = est.lower_detail.theta0;
        cert["region_K"] = est.lower_detail.region_K;
        cert["bb_nodes"] = est.lower_detail.nodes;
        cert["bb_converged"] = est.lower_detail.converged;
        cert["region_note"] = "certified infimum over [theta0, 1/2]; not a bound on the constant";
    }
    cert["upper_candidates"] = est.upper_detail.candidates;
    if (est.upper_detail.unverified_tail) cert["unverified_tail"] = true;
    j["certificates"] = cert;
    return j;
}

inline json to_json(const circle::PairResult& p) {
    json j;
    j["verdict"] = circle::to_string(p.verdict);
    j["strict"] = p.strict;
    j["epsilon"] = p.epsilon;
    if (p.witness) {
        j["witness"] = p.witness->to_string();
        j["witness_value"] = *p.witness_value;
        if (auto s = symbolic(*p.witness_value)) j["witness_symbolic"] = *s;
        if (p.witness_algebraic) j["witness_algebraic"] = algebraic_json(*p.witness_algebraic);
        j["witness_attains_epsilon"] = p.witness_attains_epsilon;
    }
    if (p.certificate_lb) j["certificate_lb"] = *p.certificate_lb;
    j["Q_searched"] = p.Q_searched;
    if (!p.note.empty()) j["note"] = p.note;
    return j;
}

inline json to_json(const circle::LambdaSetResult& l) {
    json j;
    j["epsilon"] = l.epsilon;
    j["Q"] = l.Q.get_str();
    j["generic_q_max"] = l.generic_q_max;
    j["nontrivial_count"] = l.nontrivial_count;
    json members = json::array();
    for (const auto& m : l.members) {
        json e;
        e["theta"] = m.point.to_string();
        e["deviation"] = to_json(m.deviation);
        members.push_back(e);
    }
    j["members"] = members;
    return j;
}

inline json to_json(const escape::EscapeReport& r) {
    json j;
    j["verdict"] = r.escaped ? "escaped_at" : "trapped_up_to";
    if (r.escaped) {
        j["k"] = r.k;
        j["value"] = num_or_inf(r.value);
    } else {
        j["K"] = r.K;
        j["max_value"] = num_or_inf(r.max_value);
    }
    j["epsilon"] = r.epsilon;
    j["spec"] = r.spec_echo;
    j["exactness"] = r.exactness;
    if (r.overflow) j["overflow"] = true;
    if (r.warning) j["warning"] = *r.warning;
    if (!r.projection_norms.empty()) j["projection_norms"] = r.projection_norms;
    return j;
}

inline json to_json(const positivity::ScalarAccretiveResult& s) {
    json j;
    j["verdict"] = positivity::to_string(s.verdict);
    if (s.fails_at) j["fails_at"] = *s.fails_at;
    j["margin"] = s.margin;
    j["strict"] = s.strict;
    j["exact"] = s.exact;
    j["coverage"] = s.coverage;
    return j;
}

inline json to_json(const positivity::MatrixAccretiveResult& s) {
    json j;
    j["verdict"] = positivity::to_string(s.verdict);
    if (s.fails_at) j["fails_at"] = *s.fails_at;
    j["margin"] = num_or_inf(s.margin);
    j["strict"] = s.strict;
    j["tol"] = s.tol;
    if (s.overflow) j["overflow"] = true;
    json per = json::array();
    for (const auto& e : s.per_k) per.push_back({{"k", e.k}, {"n_k", e.n_k}, {"min_eig_re", num_or_inf(e.min_eig)}});
    j["per_k"] = per;
    return j;
}

inline json to_json(const positivity::PositivityResult& p) {
    json j;
    j["verdict"] = positivity::to_string(p.verdict);
    j["min_eig"] = p.min_eig;
    j["max_eig"] = p.max_eig;
    j["hermiticity_defect"] = p.hermiticity_defect;
    if (!p.reason.empty()) j["reason"] = p.reason;
    return j;
}

inline json to_json(const positivity::CrossCheckResult& c) {
    json j;
    j["verdict"] = positivity::to_string(c.verdict);
    j["strict"] = c.strict;
    j["scan"] = to_json(c.scan);
    j["positivity"] = to_json(c.positivity);
    j["circle_verdict"] = circle::to_string(c.circle_verdict);
    j["circle_condition"] = c.circle_strict_mode ? "strict_sqrt2" : "sqrt2_pair";
    if (c.circle_witness) j["circle_witness"] = c.circle_witness->to_string();
    return j;
}

inline json to_json(const positivity::SectorRootResult& r) {
    json j;
    j["verdict"] = positivity::to_string(r.stage);
    j["m"] = r.m;
    j["half_opening"] = r.half_opening;
    j["residual"] = num_or_inf(r.residual);
    j["max_sector_distance"] = r.max_sector_distance;
    if (r.root) j["root"] = matrix_to_json(*r.root);
    if (!r.detail.empty()) j["detail"] = r.detail;
    return j;
}

inline json to_json(const positivity::EquivalenceResult& e) {
    json j;
    j["verdict"] = positivity::to_string(e.verdict);
    j["side_norm"] = e.side_norm;
    j["side_interval"] = e.side_interval;
    j["norm_side_certified"] = e.norm_side_certified;
    j["norm_max"] = num_or_inf(e.norm_max);
    if (e.norm_fail_k) j["norm_fail_k"] = *e.norm_fail_k;
    j["spectral_radius"] = e.spectral_radius;
    j["positivity"] = to_json(e.positivity);
    j["K"] = e.K;
    j["tol"] = e.tol;
    return j;
}

inline json to_json(const escape::SemigroupResult& s) {
    json j;
    j["verdict"] = s.identity_forced ? "identity_forced" : "violation";
    if (!s.identity_forced) {
        j["t"] = s.violating_t;
        j["value"] = s.violating_value;
    }
    j["max_value"] = s.max_value;
    j["epsilon"] = s.epsilon;
    j["eps_F"] = s.eps_F;
    j["threshold"] = s.threshold;
    j["quotient_assumed_prefix_only"] = s.quotient_assumed;
    if (s.identity_forced) {
        j["generator_norm"] = s.generator_norm;
        j["crosscheck_passed"] = s.crosscheck_passed;
    }
    j["times_used"] = s.times_used;
    return j;
}

inline json to_json(const escape::WitnessResult& w) {
    json j;
    j["verdict"] = w.found ? "witness" : "not_found";
    j["dimension"] = w.dimension;
    if (w.phase) {
        j["phase"] = w.phase->to_string();
        j["exact_deviation"] = to_json(w.exact_dev);
        j["matrix"] = matrix_to_json(w.to_matrix());
        j["rendering_differs_from_identity"] = w.rendering_differs_from_identity();
    }
    if (w.certificate_lb) j["certificate_lb"] = *w.certificate_lb;
    j["pair_verdict"] = circle::to_string(w.pair_verdict);
    if (!w.note.empty()) j["note"] = w.note;
    return j;
}

// ---------------------------------------------------------------------------
// the versioned report wrapper

struct Report {
    json command;
    json result;
    json certificates = json::object();
    double timing_ms = 0.0;
    int exit_code = 0;

    json to_json() const {
        json j;
        j["schema_version"] = "escape-lab/1";
        j["command"] = command;
        j["result"] = result;
        j["certificates"] = certificates;
        j["conventions"] = {{"factorial", "n_k = (k+1)!"}, {"sequence_start", "n_0 = 1"}};
        j["timing_ms"] = timing_ms;
        return j;
    }
};

}  // namespace escapelab::report

#endif
