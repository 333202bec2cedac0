#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracdelay/delayed_ml.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/quadrature.hpp"
#include "fracdelay/verify.hpp"

namespace fracdelay {

/// Raised for unreadable or malformed problem files; the message carries the
/// file name and, for parse errors, the line and column.
class ProblemFileError : public std::runtime_error {
public:
    explicit ProblemFileError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridSpec {
    std::size_t n_points = 400;
    double t_min = 0.0;  // 0 means auto: T / n_points
};

struct LoadedProblem {
    ProblemSpec prob;
    SeriesParams series;
    QuadratureParams quad;
    GridSpec grid;

    std::vector<double> make_grid() const {
        const double t0 = grid.t_min > 0.0 ? grid.t_min
                                           : prob.T / static_cast<double>(grid.n_points);
        return linspace_grid(t0, prob.T, grid.n_points);
    }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> byte_to_line_col(const std::string& text,
                                                            std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key,
                                         const std::string& where) {
    if (!j.contains(key))
        throw ProblemFileError(where + ": missing key \"" + key + "\"");
    return j.at(key);
}

inline double require_number(const nlohmann::json& j, const std::string& key,
                             const std::string& where) {
    const auto& v = require_key(j, key, where);
    if (!v.is_number())
        throw ProblemFileError(where + ": key \"" + key + "\" must be a number");
    return v.get<double>();
}

inline Vec require_vector(const nlohmann::json& j, const std::string& key, std::size_t len,
                          const std::string& where) {
    const auto& v = require_key(j, key, where);
    if (!v.is_array() || v.size() != len)
        throw ProblemFileError(where + ": key \"" + key + "\" must be an array of length " +
                               std::to_string(len));
    Vec out;
    out.reserve(len);
    for (const auto& x : v) {
        if (!x.is_number())
            throw ProblemFileError(where + ": key \"" + key + "\" must contain numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline FunctionSpec parse_function(const nlohmann::json& j, const std::string& key,
                                   std::size_t d, double lo, double hi,
                                   const std::string& where) {
    const auto& arr = require_key(j, key, where);
    if (!arr.is_array())
        throw ProblemFileError(where + ": key \"" + key + "\" must be an array of terms");
    FunctionSpec spec;
    spec.dim = d;
    spec.lo = lo;
    spec.hi = hi;
    for (const auto& t : arr) {
        const std::string ctx = where + ": " + key + " term";
        FunctionTerm term;
        const auto& kind = require_key(t, "kind", ctx);
        if (kind == "monomial")
            term.kind = TermKind::monomial;
        else if (kind == "sine")
            term.kind = TermKind::sine;
        else if (kind == "cosine")
            term.kind = TermKind::cosine;
        else
            throw ProblemFileError(ctx + ": kind must be monomial, sine or cosine");
        term.coeff = require_vector(t, "coeff", d, ctx);
        term.exponent_or_frequency = require_number(t, "exponent_or_frequency", ctx);
        term.phase = t.contains("phase") ? require_number(t, "phase", ctx) : 0.0;
        spec.terms.push_back(std::move(term));
    }
    return spec;
}

} // namespace detail

inline LoadedProblem load_problem_json(const nlohmann::json& j, const std::string& where) {
    LoadedProblem lp;
    ProblemSpec& p = lp.prob;
    p.mu = detail::require_number(j, "mu", where);
    p.nu = detail::require_number(j, "nu", where);
    p.h = detail::require_number(j, "h", where);
    p.T = detail::require_number(j, "T", where);
    const double d_raw = detail::require_number(j, "d", where);
    if (d_raw < 1 || d_raw != std::floor(d_raw))
        throw ProblemFileError(where + ": key \"d\" must be a positive integer");
    const auto d = static_cast<std::size_t>(d_raw);
    p.a = Matrix(d, d, detail::require_vector(j, "A", d * d, where));
    p.omega = Matrix(d, d, detail::require_vector(j, "Omega", d * d, where));
    p.c1 = detail::require_vector(j, "c1", d, where);
    p.c2 = detail::require_vector(j, "c2", d, where);
    p.phi = detail::parse_function(j, "phi", d, -p.h, 0.0, where);
    p.f = detail::parse_function(j, "f", d, 0.0, p.T, where);
    if (j.contains("series")) {
        const auto& s = j.at("series");
        if (s.contains("tol")) lp.series.tol = detail::require_number(s, "tol", where + ": series");
        if (s.contains("k_hard_max"))
            lp.series.k_hard_max =
                static_cast<int>(detail::require_number(s, "k_hard_max", where + ": series"));
        if (s.contains("k_extra"))
            lp.series.k_extra =
                static_cast<int>(detail::require_number(s, "k_extra", where + ": series"));
    }
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        if (q.contains("qtol"))
            lp.quad.qtol = detail::require_number(q, "qtol", where + ": quadrature");
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("n_points"))
            lp.grid.n_points =
                static_cast<std::size_t>(detail::require_number(g, "n_points", where + ": grid"));
        if (g.contains("t_min"))
            lp.grid.t_min = detail::require_number(g, "t_min", where + ": grid");
    }
    validate(p.phi, where + ": phi");
    validate(p.f, where + ": f");
    validate(p);
    validate(lp.series);
    validate(lp.quad);
    return lp;
}

inline LoadedProblem load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ProblemFileError("cannot open problem file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::byte_to_line_col(text, e.byte);
        throw ProblemFileError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                               ": " + e.what());
    }
    return load_problem_json(j, path);
}

inline nlohmann::json function_to_json(const FunctionSpec& spec) {
    nlohmann::json arr = nlohmann::json::array();
    for (const FunctionTerm& t : spec.terms) {
        nlohmann::json o;
        o["kind"] = t.kind == TermKind::monomial ? "monomial"
                    : t.kind == TermKind::sine  ? "sine"
                                                : "cosine";
        o["coeff"] = t.coeff;
        o["exponent_or_frequency"] = t.exponent_or_frequency;
        o["phase"] = t.phase;
        arr.push_back(std::move(o));
    }
    return arr;
}

inline nlohmann::json problem_to_json(const LoadedProblem& lp) {
    const ProblemSpec& p = lp.prob;
    nlohmann::json j;
    j["mu"] = p.mu;
    j["nu"] = p.nu;
    j["h"] = p.h;
    j["T"] = p.T;
    j["d"] = p.dim();
    j["A"] = p.a.data();
    j["Omega"] = p.omega.data();
    j["c1"] = p.c1;
    j["c2"] = p.c2;
    j["phi"] = function_to_json(p.phi);
    j["f"] = function_to_json(p.f);
    j["series"] = {{"tol", lp.series.tol},
                   {"k_hard_max", lp.series.k_hard_max},
                   {"k_extra", lp.series.k_extra}};
    j["quadrature"] = {{"qtol", lp.quad.qtol}};
    j["grid"] = {{"n_points", lp.grid.n_points}, {"t_min", lp.grid.t_min}};
    return j;
}

inline nlohmann::json report_to_json(const VerifyReport& rep) {
    nlohmann::json j;
    j["check_name"] = rep.check_name;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [param, residual] : rep.points)
        pts.push_back({{"parameter", param}, {"residual", residual}});
    j["points"] = std::move(pts);
    j["max_residual"] = rep.max_residual;
    j["threshold"] = rep.threshold;
    j["passed"] = rep.passed;
    return j;
}

/// CSV floats carry 12 significant digits, matching the library's accuracy.
inline std::string format_csv_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const std::size_t d = traj.values.empty() ? 0 : traj.values.front().size();
    out << "t";
    for (std::size_t c = 1; c <= d; ++c) out << ",z_" << c;
    out << "\n";
    for (std::size_t i = 0; i < traj.grid.size(); ++i) {
        out << format_csv_value(traj.grid[i]);
        for (double v : traj.values[i]) out << "," << format_csv_value(v);
        out << "\n";
    }
}

inline void write_y_csv(std::ostream& out, const std::vector<double>& grid,
                        const std::vector<Matrix>& values) {
    const std::size_t d = values.empty() ? 0 : values.front().rows();
    out << "t";
    for (std::size_t i = 1; i <= d; ++i)
        for (std::size_t j = 1; j <= d; ++j) out << ",y_" << i << "_" << j;
    out << "\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out << format_csv_value(grid[g]);
        for (double v : values[g].data()) out << "," << format_csv_value(v);
        out << "\n";
    }
}

inline void write_kernel_csv(std::ostream& out, const KernelTable& table) {
    out << "k,m,i,j,value\n";
    for (int k = 0; k <= table.k_max(); ++k)
        for (int m = 0; m <= k; ++m) {
            const Matrix& q = table.entry(k, m);
            for (std::size_t i = 0; i < q.rows(); ++i)
                for (std::size_t j = 0; j < q.cols(); ++j)
                    out << k << "," << m << "," << i << "," << j << ","
                        << format_csv_value(q(i, j)) << "\n";
        }
}

} // namespace fracdelay
