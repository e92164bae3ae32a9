// sylab: command-line front end for the singular Yamabe-type gluing pipeline.
//
//   sylab <subcommand> [--config file] [--out dir] [--seed n] [--workers n]
//                      [--override key=value]...
//
// Exit codes: 0 ok, 2 validation, 3 numerical, 4 I/O.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sylab/sylab.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Options {
    std::string config;
    std::string out = "out";
    long long seed = -1;
    int workers = -1;
    std::vector<std::string> overrides;
    bool quiet = false;
};

int execute(const std::string& sub, const Options& o) {
    auto kv = o.config.empty() ? sylab::KeyValueConfig{} : sylab::KeyValueConfig::load(o.config);
    for (const auto& ov : o.overrides) kv.apply_override(ov);
    if (o.seed >= 0) kv.set("run.seed", std::to_string(o.seed));
    if (o.workers >= 0) kv.set("run.workers", std::to_string(o.workers));
    const auto cfg = sylab::build_run_config(kv);

    const auto res = sylab::run(sub, cfg);
    sylab::write_outputs(res, o.out);
    if (!o.quiet) {
        std::cout << sub << ": " << res.verdict << "\n";
        std::cout << "digest " << res.digest << "\n";
        for (const auto& t : res.tables) std::cout << "  " << o.out << "/" << t.name << ".csv (" << t.rows.size() << " rows)\n";
        std::cout << "  " << o.out << "/run.json\n";
        if (res.exit_code == kExitNumerical) {
            std::cerr << "warning: some sweep rows failed; see failures in run.json\n";
        }
    }
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular solutions of Yamabe-type equations: gluing pipeline and diagnostics"};
    app.set_version_flag("--version", std::string(sylab::kToolVersion));
    app.require_subcommand(1, 1);

    Options o;
    std::string chosen;
    for (const auto& name : sylab::subcommands()) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
        sc->add_option("--out", o.out, "output directory for CSV tables and run.json")->capture_default_str();
        sc->add_option("--seed", o.seed, "random seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
        sc->add_option("--workers", o.workers, "worker threads, 0 = hardware concurrency")
            ->check(CLI::NonNegativeNumber);
        sc->add_option("--override", o.overrides, "key=value, applied after the file; repeatable");
        sc->add_flag("--quiet", o.quiet, "print nothing on success");
        sc->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        return execute(chosen, o);
    } catch (const sylab::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const sylab::NumericalError& e) {
        std::cerr << "numerical error in " << e.stage() << ": " << e.what() << "\n";
        return kExitNumerical;
    } catch (const sylab::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}
