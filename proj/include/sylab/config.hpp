#pragma once

// Flat key = value configuration with [section] headers that prefix keys
// ("[mesh]" then "nodes_per_shell = 32" is mesh.nodes_per_shell), command-line
// overrides, and the typed RunConfig built from it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sylab/coefficients.hpp"
#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/mode_solver.hpp"
#include "sylab/warped_lift.hpp"

namespace sylab {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

class KeyValueConfig {
   public:
    static KeyValueConfig parse(std::istream& in, const std::string& origin = "<input>") {
        KeyValueConfig c;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ValidationError(origin + ":" + std::to_string(lineno) + ": unclosed section");
                section = detail::trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            }
            auto key = detail::trim(line.substr(0, eq));
            if (key.empty()) throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            c.values_[key] = detail::trim(line.substr(eq + 1));
        }
        return c;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file '" + path + "'");
        return parse(in, path);
    }

    /// "key=value" from the command line; replaces any file entry.
    void apply_override(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + kv + "' is not key=value");
        values_[detail::trim(kv.substr(0, eq))] = detail::trim(kv.substr(eq + 1));
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::map<std::string, std::string>& entries() const { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return to_double(key, it->second);
    }

    long long get_int(const std::string& key, long long fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(it->second, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != it->second.size() || it->second.empty()) {
            throw ValidationError("config key '" + key + "': '" + it->second + "' is not an integer");
        }
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const auto s = get_string(key, fallback ? "true" : "false");
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ValidationError("config key '" + key + "': '" + s + "' is not a boolean");
    }

    /// Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) out.push_back(to_double(key, item));
        }
        return out;
    }

   private:
    static double to_double(const std::string& key, const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty()) throw ValidationError("config key '" + key + "': '" + s + "' is not a number");
        return v;
    }

    std::map<std::string, std::string> values_;
};

/// "family: p1, p2, ..." as used for coefficient keys, e.g. "polynomial: 1, 0.1".
inline RadialFunction parse_radial_function(const std::string& key, const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = detail::trim(colon == std::string::npos ? spec : spec.substr(0, colon));
    std::vector<double> params;
    if (colon != std::string::npos) {
        KeyValueConfig tmp;
        tmp.set(key, spec.substr(colon + 1));
        params = tmp.get_list(key, {});
    }
    try {
        return RadialFunction::from_name(name, params);
    } catch (const ValidationError& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
    }
}

/// Everything a run needs, with defaults for the reference configuration.
struct RunConfig {
    ProblemParams params;
    CoefficientField coeffs;
    std::string a_spec = "polynomial: 1, 0.1";
    std::string h_spec = "constant: 1";
    std::uint64_t seed = 1;
    int workers = 0;  ///< 0 = hardware concurrency

    // mesh
    int nodes_per_shell = 32;
    double r_min_factor = 1e-3;
    int j_max = kDefaultModeCap;

    // sweeps and probes
    std::vector<double> eps_list{0.02, 0.01, 0.005, 0.0025};
    int green_samples = 8;
    double green_weight = 0.0;  ///< set from nu unless given
    double nullspace_gamma = 0.0;  ///< set from mu unless given
    std::string nullspace_model = "L1";
    int nullspace_modes = 5;
    bool nullspace_allow_indicial = false;
    double stability_d = 0.0;
    double stability_delta = -2.0;
    double stability_exponent = -3.0;
    int stability_levels = 5;
    int stability_mode = 0;

    /// shift d for delta_j in the indicial table; NaN means d = A_p
    double indicial_d = std::numeric_limits<double>::quiet_NaN();

    // norms
    std::string norms_target = "f_eps";  ///< f_eps | u_bar
    int norms_k = 0;
    double norms_alpha = 0.0;

    // picard
    double picard_M = 0.0;
    double picard_tol = 1e-10;
    int picard_max_iter = 50;
    bool normalize = true;  ///< rescale the profile to meet the maximum-principle bound

    // lift
    int lift_n = 7;
    int lift_k = 2;
    std::string omega_spec = "polynomial: 1, 0.25";
    int lift_samples = 20;
    int lift_fiber_points = 4;

    /// Canonical echo of every resolved setting, sorted by key.
    std::map<std::string, std::string> echo;
};

namespace detail {

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s;
}

}  // namespace detail

/// Builds the typed configuration. Unknown keys are rejected so that typos do
/// not silently fall back to defaults.
inline RunConfig build_run_config(const KeyValueConfig& kv) {
    static const std::vector<std::string> known{
        "problem.N", "problem.p", "problem.beta", "problem.epsilon", "problem.sigma", "problem.R",
        "problem.alpha", "problem.nu", "problem.mu", "coeffs.a", "coeffs.h", "run.seed", "run.workers",
        "mesh.nodes_per_shell", "mesh.r_min_factor", "mesh.j_max", "sweep.eps", "green.samples", "green.weight",
        "nullspace.gamma", "nullspace.model", "nullspace.modes", "nullspace.allow_indicial", "stability.d",
        "stability.delta", "stability.exponent", "stability.levels", "stability.mode", "norms.target", "norms.k",
        "norms.alpha", "picard.M", "picard.tol", "picard.max_iter", "picard.normalize", "lift.n", "lift.k",
        "lift.omega", "lift.samples", "lift.fiber_points", "indicial.d"};
    for (const auto& [k, v] : kv.entries()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw ValidationError("unknown config key '" + k + "'");
        }
    }
    RunConfig c;
    auto& P = c.params;
    P.N = int(kv.get_int("problem.N", P.N));
    P.p = kv.get_double("problem.p", P.p);
    P.beta = kv.get_double("problem.beta", P.beta);
    P.epsilon = kv.get_double("problem.epsilon", P.epsilon);
    P.sigma = kv.get_double("problem.sigma", P.sigma);
    P.R = kv.get_double("problem.R", P.R);
    P.alpha_holder = kv.get_double("problem.alpha", P.alpha_holder);
    P.nu = kv.get_double("problem.nu", P.nu);
    P.mu = kv.get_double("problem.mu", 2.0 - P.N - P.nu);
    c.a_spec = kv.get_string("coeffs.a", c.a_spec);
    c.h_spec = kv.get_string("coeffs.h", c.h_spec);
    c.coeffs.a = parse_radial_function("coeffs.a", c.a_spec);
    c.coeffs.h = parse_radial_function("coeffs.h", c.h_spec);
    const long long seed = kv.get_int("run.seed", 1);
    if (seed < 0) throw ValidationError("run.seed must be >= 0");
    c.seed = std::uint64_t(seed);
    c.workers = int(kv.get_int("run.workers", 0));
    c.nodes_per_shell = int(kv.get_int("mesh.nodes_per_shell", c.nodes_per_shell));
    c.r_min_factor = kv.get_double("mesh.r_min_factor", c.r_min_factor);
    c.j_max = int(kv.get_int("mesh.j_max", c.j_max));
    c.eps_list = kv.get_list("sweep.eps", c.eps_list);
    c.green_samples = int(kv.get_int("green.samples", c.green_samples));
    c.green_weight = kv.get_double("green.weight", P.nu);
    c.nullspace_gamma = kv.get_double("nullspace.gamma", P.mu);
    c.nullspace_model = kv.get_string("nullspace.model", c.nullspace_model);
    c.nullspace_modes = int(kv.get_int("nullspace.modes", c.nullspace_modes));
    c.nullspace_allow_indicial = kv.get_bool("nullspace.allow_indicial", false);
    c.stability_d = kv.get_double("stability.d", c.stability_d);
    c.stability_delta = kv.get_double("stability.delta", c.stability_delta);
    c.stability_exponent = kv.get_double("stability.exponent", c.stability_exponent);
    c.stability_levels = int(kv.get_int("stability.levels", c.stability_levels));
    c.stability_mode = int(kv.get_int("stability.mode", c.stability_mode));
    c.indicial_d = kv.get_double("indicial.d", c.indicial_d);
    c.norms_target = kv.get_string("norms.target", c.norms_target);
    c.norms_k = int(kv.get_int("norms.k", c.norms_k));
    c.norms_alpha = kv.get_double("norms.alpha", c.norms_alpha);
    c.picard_M = kv.get_double("picard.M", c.picard_M);
    c.picard_tol = kv.get_double("picard.tol", c.picard_tol);
    c.picard_max_iter = int(kv.get_int("picard.max_iter", c.picard_max_iter));
    c.normalize = kv.get_bool("picard.normalize", c.normalize);
    c.lift_n = int(kv.get_int("lift.n", c.lift_n));
    c.lift_k = int(kv.get_int("lift.k", c.lift_k));
    c.omega_spec = kv.get_string("lift.omega", c.omega_spec);
    c.lift_samples = int(kv.get_int("lift.samples", c.lift_samples));
    c.lift_fiber_points = int(kv.get_int("lift.fiber_points", c.lift_fiber_points));

    using detail::num;
    c.echo = {{"problem.N", std::to_string(P.N)}, {"problem.p", num(P.p)}, {"problem.beta", num(P.beta)},
              {"problem.epsilon", num(P.epsilon)}, {"problem.sigma", num(P.sigma)}, {"problem.R", num(P.R)},
              {"problem.alpha", num(P.alpha_holder)}, {"problem.nu", num(P.nu)}, {"problem.mu", num(P.mu)},
              {"coeffs.a", c.coeffs.a.describe()}, {"coeffs.h", c.coeffs.h.describe()},
              {"run.seed", std::to_string(c.seed)}, {"mesh.nodes_per_shell", std::to_string(c.nodes_per_shell)},
              {"mesh.r_min_factor", num(c.r_min_factor)}, {"mesh.j_max", std::to_string(c.j_max)},
              {"sweep.eps", detail::list(c.eps_list)}, {"green.samples", std::to_string(c.green_samples)},
              {"green.weight", num(c.green_weight)}, {"nullspace.gamma", num(c.nullspace_gamma)},
              {"nullspace.model", c.nullspace_model}, {"nullspace.modes", std::to_string(c.nullspace_modes)},
              {"nullspace.allow_indicial", c.nullspace_allow_indicial ? "true" : "false"},
              {"stability.d", num(c.stability_d)}, {"stability.delta", num(c.stability_delta)},
              {"stability.exponent", num(c.stability_exponent)},
              {"stability.levels", std::to_string(c.stability_levels)},
              {"stability.mode", std::to_string(c.stability_mode)}, {"norms.target", c.norms_target},
              {"indicial.d", std::isnan(c.indicial_d) ? std::string("A_p") : num(c.indicial_d)},
              {"norms.k", std::to_string(c.norms_k)}, {"norms.alpha", num(c.norms_alpha)},
              {"picard.M", num(c.picard_M)}, {"picard.tol", num(c.picard_tol)},
              {"picard.max_iter", std::to_string(c.picard_max_iter)},
              {"picard.normalize", c.normalize ? "true" : "false"}, {"lift.n", std::to_string(c.lift_n)},
              {"lift.k", std::to_string(c.lift_k)}, {"lift.omega", c.omega_spec},
              {"lift.samples", std::to_string(c.lift_samples)},
              {"lift.fiber_points", std::to_string(c.lift_fiber_points)}};
    return c;
}

/// Preconditions of the gluing pipeline: exponent window, geometry, weights,
/// coefficient positivity, mesh controls.
inline void validate_problem(const RunConfig& c) {
    c.params.validate();
    c.coeffs.validate(c.params.R);
    if (c.nodes_per_shell < 8) throw ValidationError("mesh.nodes_per_shell >= 8 violated");
    if (!(c.r_min_factor > 0.0 && c.r_min_factor <= 0.125)) {
        throw ValidationError("mesh.r_min_factor in (0, 1/8] violated (r_min <= eps/8)");
    }
    if (c.j_max < 0) throw ValidationError("mesh.j_max >= 0 violated");
}

/// The sweep needs at least four epsilons spanning two halvings.
inline void validate_sweep(const std::vector<double>& eps) {
    if (eps.size() < 4) {
        throw ValidationError("sweep.eps needs >= 4 values for a slope fit, got " + std::to_string(eps.size()));
    }
    double lo = eps.front(), hi = eps.front();
    for (double e : eps) {
        if (!(e > 0.0)) throw ValidationError("sweep.eps entries must be > 0");
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    if (hi / lo < 4.0 - 1e-12) throw ValidationError("sweep.eps must span >= 2 halvings (max/min >= 4)");
}

}  // namespace sylab
