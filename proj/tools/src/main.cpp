#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "nlfujita/cli/suites.hpp"

// Exit codes: 0 every check passed, 1 a check failed, 2 configuration or hypothesis error.
int main(int argc, char** argv) {
    using namespace nlf::cli;

    CLI::App app{"Nonlocal Fujita-type reaction-diffusion experiments"};
    app.set_version_flag("--version", std::string(NLF_VERSION));

    std::string suite;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto* suite_opt = app.add_option("suite", suite, "Experiment to run (else run.suite from the config)")
                          ->check(CLI::IsMember(suite_names()));
    app.add_option("--config,-c", config_path, "INI configuration file")->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out,-o", out_dir, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomised checks and random data")->capture_default_str();
    app.add_option("--threads,-j", threads, "Worker threads for the sweep")->check(CLI::Range(1u, 256u))
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
        // Flags win over the [run] block.
        if (!*suite_opt) suite = cfg.text("run.suite", "");
        if (suite.empty()) throw ConfigError("no suite given on the command line or as run.suite");
        if (!*out_opt) out_dir = cfg.text("run.out", out_dir);
        if (!*seed_opt) seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));
        RunContext ctx;
        ctx.out_dir = out_dir;
        ctx.seed = seed;
        ctx.threads = threads;
        const SuiteResult res = run_suite(suite, cfg, ctx);
        std::cout << res.summary();
        return res.passed ? 0 : 1;
    } catch (const nlf::HypothesisError& e) {
        std::cerr << "error: " << e.what() << "\n" << e.certificate() << "\n";
        return 2;
    } catch (const nlf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
