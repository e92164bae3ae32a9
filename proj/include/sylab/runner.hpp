#pragma once

// Run orchestration for the command-line tool: one function per subcommand,
// each returning CSV tables and a JSON manifest; a bounded worker pool for
// epsilon sweeps; FNV-1a digests for determinism checks.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "sylab/config.hpp"
#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/glue.hpp"
#include "sylab/linear_checks.hpp"
#include "sylab/mode_solver.hpp"
#include "sylab/nullspace.hpp"
#include "sylab/picard.hpp"
#include "sylab/radial_profile.hpp"
#include "sylab/warped_lift.hpp"
#include "sylab/weighted_norms.hpp"

namespace sylab {

inline constexpr const char* kToolName = "sylab";
inline constexpr const char* kToolVersion = "0.1.0";

using json = nlohmann::json;

// ------------------------------------------------------------------ CSV

/// A numeric table. Column names follow "symbol [unit]"; "[-]" marks a
/// dimensionless quantity and "[flag]" a 0/1 indicator.
struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw std::logic_error("csv row width mismatch in " + name);
        rows.push_back(std::move(row));
    }

    std::string render() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
        out += '\n';
        char buf[64];
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.15e", row[c]);
                if (c) out += ',';
                out += buf;
            }
            out += '\n';
        }
        return out;
    }
};

// ------------------------------------------------------------ digests

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// --------------------------------------------------------- worker pool

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index writes
/// only its own slot, so results do not depend on the worker count. The first
/// exception escaping fn is rethrown after all threads join.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t w = std::min<std::size_t>(n, std::size_t(resolve_workers(workers)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// ------------------------------------------------------------- results

struct RunResult {
    std::string subcommand;
    json outputs = json::object();
    std::string verdict;
    std::vector<CsvTable> tables;
    json stages = json::array();  ///< {name, wall_ms}; excluded from the digest
    int exit_code = 0;            ///< 3 when a sweep row failed
    json manifest;
    std::string digest;
};

namespace detail {

template <class F>
auto timed(RunResult& res, const std::string& stage, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        res.stages.push_back({{"name", stage}, {"wall_ms", ms}});
    };
    if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        finish();
    } else {
        auto out = fn();
        finish();
        return out;
    }
}

/// JSON cannot hold inf or nan; the manifest stores them as strings.
inline json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}


}  // namespace detail

// ----------------------------------------------------- shared preparation

struct Family {
    ProfilePtr profile;
    double c0 = 1.0;
    double lambda = 1.0;
    double bound = 0.0;
    CoefficientField coeffs;

    ScaledFamily at(double eps) const { return ScaledFamily{profile, eps * lambda}; }
};

/// Profile, coercivity constant and the normalization lambda shared by every
/// epsilon of a run.
inline Family prepare_family(const RunConfig& cfg, const CoefficientField& coeffs, const ProblemParams& P) {
    Family f;
    f.coeffs = coeffs;
    f.c0 = coercivity_constant(coeffs, P.R, P.N);
    f.coeffs.c0 = f.c0;
    f.coeffs.validate(P.R);
    f.profile = make_profile(P.p, P.N, P.beta);
    f.bound = normalization_bound(f.c0, P.N, P.p, coeffs.max_a(P.R));
    if (cfg.normalize) f.lambda = select_normalization(f.profile, f.bound).lambda;
    return f;
}

inline ProblemParams at_epsilon(ProblemParams P, double eps) {
    P.epsilon = eps;
    return P;
}

inline MeshPtr run_mesh(const RunConfig& cfg, const ProblemParams& P) {
    return graded_mesh_for(P.epsilon, P.sigma, P.R, cfg.nodes_per_shell, cfg.r_min_factor);
}

// ---------------------------------------------------------- subcommands

inline RunResult run_solve_radial(const RunConfig& cfg) {
    RunResult res;
    const auto& P = cfg.params;
    require_exponent_window(P.p, P.N);
    if (!(P.beta > 0.0)) throw ValidationError("beta > 0 violated");
    const auto prof = detail::timed(res, "connection", [&] { return make_profile(P.p, P.N, P.beta); });
    const auto& c = prof->coefficients();
    const auto& t = prof->t_grid();
    const auto& w = prof->w();
    const double h = (t.back() - t.front()) / double(t.size() - 1);
    const auto fd = detail::fowler_fd_residual(c, w, h);
    CsvTable tab{"profile", {"t [-]", "r [length]", "w [-]", "w_t [-]", "u_1 [-]", "fowler_residual [-]"}, {}};
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double r = std::exp(t[i]);
        tab.add({t[i], r, w[i], prof->w_prime()[i], prof->u(r), fd[i]});
    }
    res.tables.push_back(std::move(tab));
    const auto& d = prof->diagnostics();
    res.outputs = {{"method", d.method},
                   {"newton_iterations", d.newton_iterations},
                   {"collocation_defect", d.collocation_defect},
                   {"fowler_residual", d.fowler_residual},
                   {"core_gap", d.core_gap},
                   {"c_p", c.c_p},
                   {"tail_exponent", c.s_decay},
                   {"tail_exponent_fit", d.tail_exponent_fit},
                   {"beta", prof->beta()},
                   {"beta_fit", d.beta_fit},
                   {"tail_fit_error", d.tail_fit_error},
                   {"t_minus", prof->t_minus()},
                   {"t_plus", prof->t_plus()},
                   {"nodes", t.size()}};
    res.verdict = d.fowler_residual <= 1e-8 ? "solved" : "inaccurate";
    return res;
}

inline RunResult run_indicial(const RunConfig& cfg) {
    RunResult res;
    const auto& P = cfg.params;
    require_exponent_window(P.p, P.N);
    const auto tab = std::isnan(cfg.indicial_d) ? indicial_table(P.p, P.N, cfg.j_max)
                                                : indicial_table(P.p, P.N, cfg.j_max, cfg.indicial_d);
    CsvTable csv{"indicial",
                 {"j [-]", "lambda_j [-]", "Re gamma_j^- [-]", "Im gamma_j^- [-]", "Re gamma_j^+ [-]",
                  "Im gamma_j^+ [-]", "gamma~_j^- [-]", "gamma~_j^+ [-]", "delta_j [-]", "degenerate [flag]"},
                 {}};
    for (const auto& e : tab.entries) {
        csv.add({double(e.j), e.lambda, e.gamma_minus.real(), e.gamma_minus.imag(), e.gamma_plus.real(),
                 e.gamma_plus.imag(), e.gamma_inf_minus, e.gamma_inf_plus, e.delta, e.degenerate ? 1.0 : 0.0});
    }
    res.tables.push_back(std::move(csv));
    const auto win = weight_window(P.p, P.N);
    res.outputs = {{"A_p", tab.A_p},
                   {"k_pN", k_constant(P.p, P.N)},
                   {"c_p", fowler_constant(P.p, P.N)},
                   {"blowup_rate", blowup_rate(P.p)},
                   {"shift_d", tab.shift_d},
                   {"nu_window", {win.nu_lo, win.nu_hi}},
                   {"q", P.q_exponent()},
                   {"chain_holds", indicial_chain_holds(P.p, P.N, cfg.j_max)},
                   {"any_degenerate", tab.any_degenerate()}};
    res.verdict = "tabulated";
    return res;
}

inline void validate_glue_config(const RunConfig& cfg) { validate_problem(cfg); }

inline RunResult run_norms(const RunConfig& cfg) {
    RunResult res;
    validate_glue_config(cfg);
    const auto& P = cfg.params;
    if (cfg.norms_target != "f_eps" && cfg.norms_target != "u_bar") {
        throw ValidationError("norms.target must be f_eps or u_bar, got '" + cfg.norms_target + "'");
    }
    if (cfg.norms_k < 0 || cfg.norms_k > 2) throw ValidationError("norms.k in {0, 1, 2} violated");
    if (!(cfg.norms_alpha >= 0.0 && cfg.norms_alpha <= 1.0)) throw ValidationError("norms.alpha in [0, 1] violated");
    const auto fam = detail::timed(res, "family", [&] { return prepare_family(cfg, cfg.coeffs, P); });
    const auto mesh = run_mesh(cfg, P);
    const auto glue = detail::timed(res, "glue", [&] { return assemble_glue(P, fam.coeffs, fam.at(P.epsilon), mesh); });
    const bool f = cfg.norms_target == "f_eps";
    const double weight = f ? P.nu - 2.0 : -P.a();
    const auto rep = detail::timed(res, "norm", [&] {
        return weighted_holder_norm(f ? glue.f_eps() : glue.u_bar, cfg.norms_k, cfg.norms_alpha, weight, P.sigma);
    });
    CsvTable tab{"shells", {"m [-]", "s_m [length]", "seminorm [-]", "s_m^-weight seminorm [-]", "active [flag]"}, {}};
    for (std::size_t m = 0; m < rep.shell_radius.size(); ++m) {
        tab.add({double(m), rep.shell_radius[m], rep.shell_seminorm[m], rep.shell_parts[m],
                 rep.shell_active[m] ? 1.0 : 0.0});
    }
    res.tables.push_back(std::move(tab));
    res.outputs = {{"target", cfg.norms_target}, {"k", cfg.norms_k},         {"alpha", cfg.norms_alpha},
                   {"weight", weight},           {"total", rep.total},       {"outer_part", rep.outer_part},
                   {"shell_sup", rep.shell_sup()}, {"lambda", fam.lambda}, {"c0", fam.c0}};
    res.verdict = std::isfinite(rep.total) ? "finite" : "infinite";
    return res;
}

namespace detail {

/// Least-squares slope over rows whose status flag is set.
inline double ok_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<bool>& ok) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (ok[i] && y[i] > 0.0) {
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
    return xs.size() >= 2 ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline RunResult run_sweep(const RunConfig& cfg) {
    RunResult res;
    validate_sweep(cfg.eps_list);
    validate_glue_config(cfg);
    const auto& P = cfg.params;
    const auto fam = detail::timed(res, "family", [&] { return prepare_family(cfg, cfg.coeffs, P); });
    const std::size_t n = cfg.eps_list.size();
    std::vector<double> norm(n, 0.0);
    std::vector<bool> ok(n, false);
    std::vector<std::string> err(n);
    detail::timed(res, "sweep", [&] {
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            try {
                const auto Pe = at_epsilon(P, cfg.eps_list[i]);
                Pe.validate();
                const auto g = assemble_glue(Pe, fam.coeffs, fam.at(Pe.epsilon), run_mesh(cfg, Pe));
                norm[i] = weighted_holder_norm(g.f_eps(), 0, 0.0, P.nu - 2.0, P.sigma).total;
                ok[i] = std::isfinite(norm[i]);
                if (!ok[i]) err[i] = "non-finite norm";
            } catch (const std::exception& e) {
                err[i] = e.what();
            }
        });
    });
    const double slope = detail::ok_slope(cfg.eps_list, norm, ok);
    const double q = P.q_exponent();
    CsvTable tab{"decay", {"epsilon [-]", "||f_eps||_{0,0,nu-2} [-]", "ok [flag]"}, {}};
    json failures = json::array();
    int good = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tab.add({cfg.eps_list[i], norm[i], ok[i] ? 1.0 : 0.0});
        good += ok[i];
        if (!ok[i]) failures.push_back({{"epsilon", cfg.eps_list[i]}, {"error", err[i]}});
    }
    res.tables.push_back(std::move(tab));
    res.outputs = {{"slope", detail::number(slope)}, {"q", q}, {"threshold", q - 0.1}, {"failures", failures},
                   {"lambda", fam.lambda}, {"c0", fam.c0}};
    if (good < int(n)) res.exit_code = 3;
    res.verdict = good < 2 ? "failed" : (slope >= q - 0.1 ? "pass" : "fail");
    return res;
}

inline RunResult run_green_probe(const RunConfig& cfg) {
    RunResult res;
    validate_sweep(cfg.eps_list);
    validate_glue_config(cfg);
    if (cfg.green_samples < 1) throw ValidationError("green.samples >= 1 violated");
    const auto& P = cfg.params;
    const double nu = cfg.green_weight;
    const auto fam = detail::timed(res, "family", [&] { return prepare_family(cfg, cfg.coeffs, P); });
    const std::size_t n = cfg.eps_list.size();
    std::vector<double> probe(n, 0.0);
    std::vector<bool> ok(n, false), singular(n, false);
    std::vector<std::string> err(n);
    detail::timed(res, "probe", [&] {
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            try {
                const auto Pe = at_epsilon(P, cfg.eps_list[i]);
                const auto L = linearize(Pe, fam.coeffs, fam.at(Pe.epsilon), run_mesh(cfg, Pe));
                probe[i] = green_norm_probe(L, nu, cfg.green_samples, cfg.seed);
                ok[i] = std::isfinite(probe[i]);
            } catch (const SingularSystemError& e) {
                singular[i] = true;
                err[i] = e.what();
            } catch (const std::exception& e) {
                err[i] = e.what();
            }
        });
    });
    CsvTable tab{"green_probe", {"epsilon [-]", "max ||G_eps f||_{0,0,nu} [-]", "ok [flag]", "singular [flag]"}, {}};
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    json failures = json::array();
    bool any_singular = false;
    int good = 0;
    for (std::size_t i = 0; i < n; ++i) {
        tab.add({cfg.eps_list[i], probe[i], ok[i] ? 1.0 : 0.0, singular[i] ? 1.0 : 0.0});
        any_singular = any_singular || singular[i];
        if (ok[i]) {
            ++good;
            lo = std::min(lo, probe[i]);
            hi = std::max(hi, probe[i]);
        } else {
            failures.push_back({{"epsilon", cfg.eps_list[i]}, {"error", err[i]}});
        }
    }
    res.tables.push_back(std::move(tab));
    const double spread = good > 0 && lo > 0.0 ? hi / lo : std::numeric_limits<double>::quiet_NaN();
    res.outputs = {{"weight", nu}, {"samples", cfg.green_samples}, {"spread", detail::number(spread)},
                   {"singular", any_singular}, {"failures", failures}};
    if (good < int(n)) res.exit_code = 3;
    res.verdict = any_singular ? "singular" : (good == int(n) && spread < 3.0 ? "uniform" : "non-uniform");
    return res;
}

inline RunResult run_nullspace(const RunConfig& cfg) {
    RunResult res;
    const auto& P = cfg.params;
    const auto model = parse_nullspace_model(cfg.nullspace_model);
    require_exponent_window(P.p, P.N);
    ProfilePtr prof;
    if (model == NullspaceModel::L1) {
        prof = detail::timed(res, "connection", [&] { return make_profile(P.p, P.N, P.beta); });
    }
    const auto rep = detail::timed(res, "scan", [&] {
        return nullspace_scan(cfg.nullspace_gamma, P.p, P.N, model, cfg.nullspace_modes, prof,
                              cfg.nullspace_allow_indicial);
    });
    CsvTable tab{"nullspace", {"j [-]", "lambda_j [-]", "mismatch [-]", "admissible [-]", "growing [-]",
                               "vacuous [flag]"},
                 {}};
    for (const auto& m : rep.modes) {
        tab.add({double(m.j), m.lambda, m.mismatch, double(m.admissible), double(m.growing), m.vacuous ? 1.0 : 0.0});
    }
    res.tables.push_back(std::move(tab));
    res.outputs = {{"gamma", rep.gamma},
                   {"model", cfg.nullspace_model},
                   {"min_mismatch", rep.min_mismatch},
                   {"oscillation_frequency", rep.oscillation_frequency}};
    res.verdict = rep.min_mismatch > 1e-3 ? "trivial_kernel" : "kernel_candidate";
    return res;
}

inline RunResult run_stability(const RunConfig& cfg) {
    RunResult res;
    const int N = cfg.params.N;
    if (cfg.stability_levels < 3) throw ValidationError("stability.levels >= 3 violated");
    const auto rep = detail::timed(res, "probe", [&] {
        return appendix_stability_probe(cfg.stability_d, cfg.stability_delta, N, cfg.stability_exponent,
                                        cfg.stability_levels, cfg.stability_mode);
    });
    CsvTable tab{"stability", {"level [-]", "r_min [length]", "nodes_per_shell [-]", "||u||_{L2_delta} [-]",
                               "||f||_{L2_delta-2} [-]", "||u||_{L2(B1-B1/2)} [-]", "ratio [-]"},
                 {}};
    for (std::size_t k = 0; k < rep.levels.size(); ++k) {
        const auto& lv = rep.levels[k];
        tab.add({double(k), lv.r_min, double(lv.nodes_per_shell), lv.u_norm, lv.f_norm, lv.outer_norm, lv.ratio});
    }
    res.tables.push_back(std::move(tab));
    json anchors = json::array();
    for (int j = 0; j <= 2; ++j) anchors.push_back(delta_exponent(cfg.stability_d, N, j));
    res.outputs = {{"d", rep.d},
                   {"delta", rep.delta},
                   {"nearest_indicial", rep.nearest_indicial},
                   {"variation", rep.variation},
                   {"vacuous", rep.vacuous},
                   {"delta_j", anchors}};
    res.verdict = rep.passed() ? "stable" : "unsettled";
    return res;
}

namespace detail {

struct GlueRow {
    double eps = 0.0;
    double C0 = 0.0;
    bool ok = false;
    std::string error;
    int iterations = 0;
    double max_late_contraction = 0.0;  ///< max c_k over k >= 2
    double residual = 0.0;
    double v_norm = 0.0;
    double ball = 0.0;
    double min_u = 0.0;
    double core_error = 0.0;
};

inline double late_contraction(const IterationState& s) {
    double m = 0.0;
    for (const auto& r : s.history)
        if (r.k >= 2) m = std::max(m, r.contraction);
    return m;
}

}  // namespace detail

inline json iteration_ledger(const IterationState& s, const SolutionReport& rep) {
    return {{"converged", s.converged},
            {"iterations", s.iterations},
            {"max_contraction_k_ge_2", detail::late_contraction(s)},
            {"residual_rel", s.residual},
            {"residual_abs", s.residual_abs},
            {"v_norm", s.v_norm.total},
            {"v_norm_holder", s.v_norm_holder.total},
            {"ball_radius", s.ball_radius},
            {"M", s.M},
            {"C0", s.C0},
            {"q", s.q},
            {"positivity_margin", s.positivity_margin},
            {"positive", rep.positive},
            {"min_u", rep.min_u},
            {"c_p", rep.c_p},
            {"core_value", rep.core_value},
            {"core_radius", rep.core_radius},
            {"core_error", rep.core_error},
            {"ratio_slope", rep.ratio_slope}};
}

inline void add_solution_tables(RunResult& res, const IterationState& s, const SolutionReport& rep) {
    CsvTable hist{"iterations", {"k [-]", "d_k [-]", "c_k [-]", "||v_k+1||_{2,0,nu} [-]", "ball_margin [-]"}, {}};
    for (const auto& r : s.history) hist.add({double(r.k), r.increment, r.contraction, r.v_norm, r.ball_margin});
    CsvTable prof{"solution", {"rho [length]", "u_bar [-]", "v [-]", "u [-]", "rho^(2/(p-1)) u [-]"}, {}};
    for (std::size_t i = 0; i < rep.rho.size(); ++i)
        prof.add({rep.rho[i], rep.u_bar[i], rep.v[i], rep.u[i], rep.scaled_u[i]});
    res.tables.push_back(std::move(hist));
    res.tables.push_back(std::move(prof));
}

inline RunResult run_glue(const RunConfig& cfg) {
    RunResult res;
    validate_glue_config(cfg);
    const auto& P = cfg.params;
    const auto fam = detail::timed(res, "family", [&] { return prepare_family(cfg, cfg.coeffs, P); });

    // the main epsilon plus the sweep list, deduplicated and sorted descending
    std::set<double, std::greater<>> eps_set(cfg.eps_list.begin(), cfg.eps_list.end());
    eps_set.insert(P.epsilon);
    const std::vector<double> eps(eps_set.begin(), eps_set.end());
    const std::size_t n = eps.size();
    std::vector<detail::GlueRow> rows(n);

    detail::timed(res, "ball_constant", [&] {
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            auto& row = rows[i];
            row.eps = eps[i];
            try {
                const auto Pe = at_epsilon(P, eps[i]);
                Pe.validate();
                const auto mesh = run_mesh(cfg, Pe);
                const auto g = assemble_glue(Pe, fam.coeffs, fam.at(eps[i]), mesh);
                const auto L = linearize(Pe, fam.coeffs, fam.at(eps[i]), mesh);
                row.C0 = apply_green(g.f_eps(), L, P.nu).norm.total / std::pow(eps[i], Pe.q_exponent());
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        });
    });
    double M = cfg.picard_M;
    if (!(M > 0.0)) {
        for (const auto& r : rows)
            if (r.ok) M = std::max(M, 4.0 * r.C0);
        if (!(M > 0.0)) throw NumericalError("picard_driver", "no epsilon produced a ball constant");
    }

    PicardOptions opt;
    opt.M = M;
    opt.tol = cfg.picard_tol;
    opt.max_iter = cfg.picard_max_iter;
    std::vector<IterationState> states(n);
    detail::timed(res, "picard", [&] {
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            auto& row = rows[i];
            if (!row.ok) return;
            row.ok = false;
            try {
                const auto Pe = at_epsilon(P, eps[i]);
                states[i] = iterate(Pe, fam.coeffs, fam.at(eps[i]), run_mesh(cfg, Pe), opt);
                const auto rep = solution_report(states[i]);
                row.iterations = states[i].iterations;
                row.max_late_contraction = detail::late_contraction(states[i]);
                row.residual = states[i].residual;
                row.v_norm = states[i].v_norm.total;
                row.ball = states[i].ball_radius;
                row.min_u = rep.min_u;
                row.core_error = rep.core_error;
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        });
    });

    const std::size_t main = std::size_t(std::find(eps.begin(), eps.end(), P.epsilon) - eps.begin());
    if (!rows[main].ok) throw NumericalError("picard_driver", "epsilon = " + detail::num(P.epsilon) + ": " + rows[main].error);
    const auto rep = solution_report(states[main]);
    add_solution_tables(res, states[main], rep);

    CsvTable sweep{"ball_sweep", {"epsilon [-]", "C_0 [-]", "iterations [-]", "max c_k (k>=2) [-]",
                                  "residual [-]", "||v||_{2,0,nu} [-]", "M eps^q [-]", "min u [-]",
                                  "core_error [-]", "ok [flag]"},
                   {}};
    json failures = json::array();
    bool uniform = true;
    for (const auto& r : rows) {
        sweep.add({r.eps, r.C0, double(r.iterations), r.max_late_contraction, r.residual, r.v_norm, r.ball, r.min_u,
                   r.core_error, r.ok ? 1.0 : 0.0});
        uniform = uniform && r.ok && r.v_norm <= r.ball;
        if (!r.ok) failures.push_back({{"epsilon", r.eps}, {"error", r.error}});
    }
    res.tables.push_back(std::move(sweep));

    res.outputs = iteration_ledger(states[main], rep);
    res.outputs["epsilon"] = P.epsilon;
    res.outputs["lambda"] = fam.lambda;
    res.outputs["c0"] = fam.c0;
    res.outputs["normalization_bound"] = fam.bound;
    res.outputs["uniform_ball"] = uniform;
    res.outputs["sweep_failures"] = failures;
    if (!failures.empty()) res.exit_code = 3;
    res.verdict = "converged";
    return res;
}

inline RunResult run_lift(const RunConfig& cfg) {
    RunResult res;
    const auto gate = equivariant_params(cfg.lift_n, cfg.lift_k);
    if (!gate.admissible) {
        throw ValidationError("(n, k) = (" + std::to_string(cfg.lift_n) + ", " + std::to_string(cfg.lift_k) +
                              ") rejected: 0 < k < (n-2)/2 violated");
    }
    ProblemParams P = cfg.params;
    P.N = gate.N;
    P.p = gate.p;
    P.mu = 2.0 - P.N - P.nu;
    if (cfg.lift_fiber_points < 1) throw ValidationError("lift.fiber_points >= 1 violated");
    if (cfg.lift_samples < 1) throw ValidationError("lift.samples >= 1 violated");

    WarpedSpec spec{P.N, cfg.lift_k, WarpFunction::radial(parse_radial_function("lift.omega", cfg.omega_spec))};
    spec.validate(P.R);
    CoefficientField coeffs{omega_power_coefficient(spec), cfg.coeffs.h};
    RunConfig sub = cfg;
    sub.params = P;
    sub.coeffs = coeffs;
    validate_problem(sub);

    const auto fam = detail::timed(res, "family", [&] { return prepare_family(sub, coeffs, P); });
    const auto mesh = run_mesh(sub, P);
    PicardOptions opt;
    opt.M = cfg.picard_M;
    opt.tol = cfg.picard_tol;
    opt.max_iter = cfg.picard_max_iter;
    const auto s = detail::timed(res, "picard", [&] { return iterate(P, fam.coeffs, fam.at(P.epsilon), mesh, opt); });
    const auto rep = solution_report(s);
    auto u = s.lin.u_bar;
    u += s.v;

    const auto ident = detail::timed(res, "residual_identity", [&] { return residual_identity(u, spec, coeffs.h, P.p); });
    const auto lap = detail::timed(res, "laplacian_check", [&] {
        return product_laplacian_check(spec, PolyGaussian{}, cfg.lift_samples, cfg.seed, P.R);
    });
    const auto minimal = fiber_minimality_check(spec, std::vector<double>(P.N, 0.0));

    CsvTable samples{"lift_samples", {"rho [length]", "fiber angle [rad]", "u [-]"}, {}};
    const std::size_t stride = std::max<std::size_t>(1, mesh->size() / 64);
    for (std::size_t i = 0; i < mesh->size(); i += stride) {
        std::vector<double> x(P.N, 0.0);
        x[0] = mesh->r[i];
        for (int f = 0; f < cfg.lift_fiber_points; ++f) {
            const double theta = 2.0 * std::numbers::pi * f / cfg.lift_fiber_points;
            samples.add({mesh->r[i], theta, lift_evaluate(u, P.p, x, std::vector<double>(cfg.lift_k, theta))});
        }
    }
    add_solution_tables(res, s, rep);
    res.tables.push_back(std::move(samples));

    res.outputs = iteration_ledger(s, rep);
    res.outputs["admissibility"] = {{"n", gate.n},
                                    {"k", gate.k},
                                    {"N", gate.N},
                                    {"p", gate.p},
                                    {"critical_exponent", gate.critical_exponent},
                                    {"admissible", gate.admissible}};
    res.outputs["omega"] = spec.omega.describe();
    res.outputs["a"] = coeffs.a.describe();
    res.outputs["residual_identity_max_abs"] = ident.max_abs;
    res.outputs["residual_identity_max_rel"] = ident.max_rel;
    res.outputs["laplacian_samples"] = lap.samples;
    res.outputs["laplacian_max_discrepancy"] = lap.max_discrepancy;
    res.outputs["laplacian_max_magnitude"] = lap.max_magnitude;
    res.outputs["minimal_fiber"] = {{"base_point", "origin"},
                                    {"gradient_norm", minimal.gradient_norm},
                                    {"minimal", minimal.minimal}};
    const bool ok = ident.max_rel <= 1e-10 && lap.max_discrepancy <= 1e-10 && minimal.minimal;
    res.verdict = ok ? "lifted" : "reduction_mismatch";
    return res;
}

// ------------------------------------------------------------ dispatch

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"solve-radial", "indicial", "norms", "sweep-epsilon", "green-probe",
                                                "nullspace",    "stability", "glue", "lift"};
    return names;
}

/// Attaches the manifest and its digest. The digest covers everything except
/// wall-clock timings.
inline void finalize(RunResult& res, const RunConfig& cfg) {
    json artifacts = json::object();
    for (const auto& t : res.tables) {
        artifacts[t.name + ".csv"] = {{"rows", t.rows.size()}, {"fnv1a64", hex64(fnv1a64(t.render()))}};
    }
    json core = {{"tool", kToolName},
                 {"version", kToolVersion},
                 {"subcommand", res.subcommand},
                 {"config", cfg.echo},
                 {"seed", cfg.seed},
                 {"outputs", res.outputs},
                 {"verdict", res.verdict},
                 {"artifacts", artifacts}};
    res.digest = hex64(fnv1a64(core.dump()));
    res.manifest = core;
    res.manifest["stages"] = res.stages;
    res.manifest["workers"] = resolve_workers(cfg.workers);
    res.manifest["exit_code"] = res.exit_code;
    res.manifest["digest"] = res.digest;
}

inline RunResult run(const std::string& subcommand, const RunConfig& cfg) {
    RunResult res;
    if (subcommand == "solve-radial") res = run_solve_radial(cfg);
    else if (subcommand == "indicial") res = run_indicial(cfg);
    else if (subcommand == "norms") res = run_norms(cfg);
    else if (subcommand == "sweep-epsilon") res = run_sweep(cfg);
    else if (subcommand == "green-probe") res = run_green_probe(cfg);
    else if (subcommand == "nullspace") res = run_nullspace(cfg);
    else if (subcommand == "stability") res = run_stability(cfg);
    else if (subcommand == "glue") res = run_glue(cfg);
    else if (subcommand == "lift") res = run_lift(cfg);
    else throw ValidationError("unknown subcommand '" + subcommand + "'");
    res.subcommand = subcommand;
    finalize(res, cfg);
    return res;
}

/// Writes every table as <out>/<name>.csv and the manifest as <out>/run.json.
inline void write_outputs(const RunResult& res, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    auto put = [&](const std::string& name, const std::string& text) {
        const auto path = (fs::path(out_dir) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot open '" + path + "' for writing");
        f << text;
        if (!f) throw IoError("write to '" + path + "' failed");
    };
    for (const auto& t : res.tables) put(t.name + ".csv", t.render());
    put("run.json", res.manifest.dump(2) + "\n");
}

}  // namespace sylab
