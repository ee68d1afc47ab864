// gcsge: run or validate an experiment config.
//
//   gcsge run <config> [--out DIR] [--workers N] [--seed S]
//   gcsge validate <config>
//
// Exit codes: 0 ok, 1 usage or I/O, 2 config error, 3 numerical failure.
// Without --out, results go to $GCSGE_OUTPUT_ROOT/<name> (or ./runs/<name>).

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gcsge/config.hpp"
#include "gcsge/errors.hpp"
#include "gcsge/experiments.hpp"

namespace fs = std::filesystem;

namespace {

fs::path default_output(const gcsge::ExperimentConfig& cfg) {
    if (cfg.output) return *cfg.output;
    const char* root = std::getenv("GCSGE_OUTPUT_ROOT");
    return fs::path(root && *root ? root : "runs") / cfg.name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galilean complex sine-Gordon soliton experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run an experiment and write its products");
    run->add_option("config", config_path, "experiment config (YAML)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--workers", workers, "worker threads for ensembles")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "override the noise base seed");
    run->add_flag("-q,--quiet", quiet, "no progress output");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config_path, "experiment config (YAML)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        auto cfg = gcsge::load_config(config_path);
        if (seed) cfg.noise.seed = *seed;
        cfg.validate();
        if (*validate) {
            std::cout << fmt::format("{}: ok ({})\n", config_path, gcsge::to_string(cfg.kind));
            return 0;
        }

        const fs::path out = out_dir.empty() ? default_output(cfg) : fs::path(out_dir);
        gcsge::RunOptions opt;
        opt.workers = workers;
        if (!quiet) opt.log = [](const std::string& m) { std::cerr << m << '\n'; };
        const auto manifest = gcsge::run_experiment(cfg, out, opt, fs::path(config_path));
        std::cout << fmt::format("{} products written to {}\n", manifest.size(), out.string());
        return 0;
    } catch (const gcsge::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gcsge::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
