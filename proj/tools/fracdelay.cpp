// Command-line front end: evaluate Y kernels, solve delay problems, run the
// verification oracles, dump kernel tables.
//
// Exit codes: 0 success, 1 internal/numerical failure, 2 input validation,
// 3 inapplicable check for the problem's (mu, nu).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracdelay/fracdelay.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitValidation = 2;
constexpr int kExitApplicability = 3;

std::vector<double> parse_grid_arg(const std::string& arg) {
    double a = 0.0, b = 0.0;
    long n = 0;
    char extra = 0;
    if (std::sscanf(arg.c_str(), "%lf:%lf:%ld%c", &a, &b, &n, &extra) != 3 || n < 1 || b < a)
        throw std::invalid_argument("grid must be given as start:end:count, e.g. 0.1:3:50");
    return fracdelay::linspace_grid(a, b, static_cast<std::size_t>(n));
}

std::vector<double> parse_list_arg(const std::string& arg) {
    std::vector<double> out;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad value in list: " + item);
        }
    }
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fracdelay::ProblemFileError("cannot open output file: " + path);
    return out;
}

std::vector<double> default_laplace_s(const fracdelay::ProblemSpec& prob) {
    const double margin = fracdelay::laplace_margin(prob);
    const double base = std::max(2.0 * margin, 5.0);
    const double spacing = std::max(0.5 * margin, 1.0);
    std::vector<double> s;
    for (int j = 0; j < 5; ++j) s.push_back(base + spacing * j);
    return s;
}

int run_eval_y(const std::string& problem_path, double gamma,
               const std::optional<std::string>& grid_arg,
               const std::optional<std::string>& t_arg, const std::string& out_path) {
    const auto lp = fracdelay::load_problem_file(problem_path);
    std::vector<double> ts;
    if (grid_arg)
        ts = parse_grid_arg(*grid_arg);
    else if (t_arg)
        ts = parse_list_arg(*t_arg);
    else
        throw std::invalid_argument("eval-y needs --grid or --t");
    if (!(gamma > 0.0)) throw std::invalid_argument("eval-y: gamma must be positive");

    double t_max = 0.0;
    for (double t : ts) t_max = std::max(t_max, t);
    const double rho = fracdelay::norm_ind1(lp.prob.a) + fracdelay::norm_ind1(lp.prob.omega);
    const int depth =
        fracdelay::required_table_depth(rho, lp.prob.mu, gamma, std::max(t_max, 1e-6), lp.series);
    const fracdelay::KernelTable table(lp.prob.a, lp.prob.omega, depth);
    const fracdelay::YEvaluator ev(table, lp.prob.mu, gamma, lp.prob.h, lp.series);
    std::vector<fracdelay::Matrix> values(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) values[i] = ev.eval(ts[i]);

    auto out = open_output(out_path);
    fracdelay::write_y_csv(out, ts, values);
    return kExitOk;
}

int run_solve(const std::string& problem_path, const std::string& out_path, bool print_uh) {
    const auto lp = fracdelay::load_problem_file(problem_path);
    const auto traj = fracdelay::solve(lp.prob, lp.make_grid(), lp.series, lp.quad);
    auto out = open_output(out_path);
    fracdelay::write_trajectory_csv(out, traj);
    if (print_uh) {
        const double c = fracdelay::uh_constant(lp.prob, lp.series, lp.quad);
        std::printf("uh_constant = %.12g\n", c);
    }
    return kExitOk;
}

int run_verify(const std::string& problem_path, const std::string& checks_arg,
               const std::optional<std::string>& s_arg, const std::string& out_path) {
    const auto lp = fracdelay::load_problem_file(problem_path);

    std::vector<std::string> checks;
    {
        std::stringstream ss(checks_arg);
        std::string item;
        while (std::getline(ss, item, ',')) checks.push_back(item);
    }
    if (checks.empty()) throw std::invalid_argument("verify: empty --checks list");
    for (const auto& c : checks) {
        if (c != "laplace" && c != "steps" && c != "residual")
            throw std::invalid_argument("verify: unknown check \"" + c +
                                        "\" (expected laplace, steps, residual)");
        if (c == "steps" && lp.prob.mu != 2.0) {
            std::fprintf(stderr, "verify: steps check requires mu = 2, problem has mu = %g\n",
                         lp.prob.mu);
            return kExitApplicability;
        }
        if (c == "residual" && (lp.prob.nu != 1.0 || lp.prob.mu >= 2.0)) {
            std::fprintf(stderr,
                         "verify: residual check requires nu = 1 and mu < 2, problem has "
                         "nu = %g, mu = %g\n",
                         lp.prob.nu, lp.prob.mu);
            return kExitApplicability;
        }
    }

    nlohmann::json reports = nlohmann::json::array();
    bool all_passed = true;
    for (const auto& c : checks) {
        fracdelay::VerifyReport rep;
        if (c == "laplace") {
            const auto s_values =
                s_arg ? parse_list_arg(*s_arg) : default_laplace_s(lp.prob);
            const std::size_t n = std::max<std::size_t>(lp.grid.n_points, 400);
            const auto traj = fracdelay::solve(
                lp.prob, fracdelay::linspace_grid(lp.prob.T / n, lp.prob.T, n), lp.series,
                lp.quad);
            rep = fracdelay::laplace_check(lp.prob, traj, s_values, lp.series, lp.quad);
        } else if (c == "steps") {
            const std::size_t n = std::max<std::size_t>(lp.grid.n_points, 64);
            const auto grid = fracdelay::linspace_grid(lp.prob.T / n, lp.prob.T, n);
            const auto traj = fracdelay::solve(lp.prob, grid, lp.series, lp.quad);
            const auto ref = fracdelay::method_of_steps_oracle(lp.prob, grid);
            rep.check_name = "steps";
            rep.threshold = 1e-4;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double diff =
                    fracdelay::norm1(fracdelay::vec_sub(traj.values[i], ref.values[i]));
                rep.max_residual = std::max(rep.max_residual, diff);
            }
            rep.points.emplace_back(grid.back(), rep.max_residual);
            rep.passed = rep.max_residual <= rep.threshold;
        } else {
            // residual: uniform grid whose step divides h
            const std::size_t per_h = std::max<std::size_t>(
                8, static_cast<std::size_t>(
                       std::ceil(static_cast<double>(lp.grid.n_points) * lp.prob.h / lp.prob.T)));
            const double dt = lp.prob.h / static_cast<double>(per_h);
            const auto n = static_cast<std::size_t>(std::llround(lp.prob.T / dt));
            const auto traj = fracdelay::solve(
                lp.prob, fracdelay::linspace_grid(dt, lp.prob.T, n), lp.series, lp.quad);
            rep = fracdelay::residual_check_caputo(lp.prob, traj, lp.series, lp.quad);
        }
        reports.push_back(fracdelay::report_to_json(rep));
        all_passed = all_passed && rep.passed;
        std::printf("%-16s max_residual=%-12.6g threshold=%-10.4g %s\n", rep.check_name.c_str(),
                    rep.max_residual, rep.threshold, rep.passed ? "pass" : "FAIL");
    }
    auto out = open_output(out_path);
    out << reports.dump(2) << "\n";
    return all_passed ? kExitOk : kExitNumerical;
}

int run_kernel_dump(const std::string& problem_path, int kmax, const std::string& out_path) {
    const auto lp = fracdelay::load_problem_file(problem_path);
    if (kmax < 0) throw std::invalid_argument("kernel-dump: kmax must be >= 0");
    const fracdelay::KernelTable table(lp.prob.a, lp.prob.omega, kmax);
    auto out = open_output(out_path);
    fracdelay::write_kernel_csv(out, table);
    return kExitOk;
}

int run_echo_config(const std::string& problem_path, const std::string& out_path) {
    const auto lp = fracdelay::load_problem_file(problem_path);
    auto out = open_output(out_path);
    out << fracdelay::problem_to_json(lp).dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"delayed Mittag-Leffler matrix functions and Hilfer-type "
                 "fractional time-delay solver"};
    app.require_subcommand(1);

    std::string problem_path, out_path, checks_arg;
    std::optional<std::string> grid_arg, t_arg, s_arg;
    double gamma = 1.0;
    int kmax = 10;
    bool print_uh = false;

    auto* eval_y = app.add_subcommand("eval-y", "evaluate Y_{mu,gamma}(t) on a set of times");
    eval_y->add_option("--problem", problem_path, "problem JSON file")->required();
    eval_y->add_option("--gamma", gamma, "second kernel parameter")->required();
    eval_y->add_option("--grid", grid_arg, "times as start:end:count");
    eval_y->add_option("--t", t_arg, "comma-separated list of times");
    eval_y->add_option("--out", out_path, "output CSV path")->required();

    auto* solve_cmd = app.add_subcommand("solve", "solve the problem on its grid");
    solve_cmd->add_option("--problem", problem_path, "problem JSON file")->required();
    solve_cmd->add_option("--out", out_path, "trajectory CSV path")->required();
    solve_cmd->add_flag("--uh", print_uh, "also print the Ulam-Hyers constant");

    auto* verify_cmd = app.add_subcommand("verify", "run verification oracles");
    verify_cmd->add_option("--problem", problem_path, "problem JSON file")->required();
    verify_cmd->add_option("--checks", checks_arg, "comma list from laplace,steps,residual")
        ->required();
    verify_cmd->add_option("--s", s_arg, "comma list of Laplace s values");
    verify_cmd->add_option("--out", out_path, "report JSON path")->required();

    auto* dump_cmd = app.add_subcommand("kernel-dump", "dump the kernel table Q(k,m) as CSV");
    dump_cmd->add_option("--problem", problem_path, "problem JSON file")->required();
    dump_cmd->add_option("--kmax", kmax, "table depth")->required();
    dump_cmd->add_option("--out", out_path, "output CSV path")->required();

    auto* echo_cmd = app.add_subcommand("echo-config", "re-emit the parsed problem as JSON");
    echo_cmd->add_option("--problem", problem_path, "problem JSON file")->required();
    echo_cmd->add_option("--out", out_path, "output JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (eval_y->parsed()) return run_eval_y(problem_path, gamma, grid_arg, t_arg, out_path);
        if (solve_cmd->parsed()) return run_solve(problem_path, out_path, print_uh);
        if (verify_cmd->parsed()) return run_verify(problem_path, checks_arg, s_arg, out_path);
        if (dump_cmd->parsed()) return run_kernel_dump(problem_path, kmax, out_path);
        if (echo_cmd->parsed()) return run_echo_config(problem_path, out_path);
    } catch (const fracdelay::ProblemFileError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const fracdelay::ConvergenceError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitValidation;
}
