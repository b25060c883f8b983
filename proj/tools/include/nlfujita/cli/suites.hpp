#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "nlfujita/cli/config.hpp"

namespace nlf::cli {

struct RunContext {
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string version = NLF_VERSION;
};

struct SuiteResult {
    explicit SuiteResult(std::string suite) : name(std::move(suite)) {}

    std::string name;
    bool passed = true;
    std::vector<std::string> lines;
    std::vector<std::filesystem::path> files;

    void check(bool ok, const std::string& what);
    void note(const std::string& what) { lines.push_back("     " + what); }
    /// One-page text summary.
    std::string summary() const;
};

/// Names accepted as the first positional token, in selftest order.
const std::vector<std::string>& suite_names();

/// Runs one suite. CSVs and `<name>_summary.txt` go to ctx.out_dir.
/// Throws ConfigError for an unknown name or an invalid configuration and
/// HypothesisError when the kernel fails a gate.
SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg, const RunContext& ctx);

}  // namespace nlf::cli
