#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "nlfujita/error.hpp"
#include "nlfujita/grid.hpp"
#include "nlfujita/kernels.hpp"

namespace nlf::cli {

/// Invalid or inconsistent configuration. The message names the violated precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Flat `key = value` file with one level of `[section]` brackets.
///
/// Lookups are `section.key`. Suite sections may override the shared [grid]
/// and [time] keys: `lookup("remainder", "L")` reads remainder.L, then grid.L.
/// Every value read (defaults included) is recorded so CSV headers can echo
/// the exact parameter tuple of a suite.
class ExperimentConfig {
public:
    ExperimentConfig() = default;
    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig parse(std::istream& in);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    double real(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    /// Comma separated reals; `inf` is accepted.
    std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;

    /// First of `section.key`, `shared.key` that exists, else the fallback
    /// recorded under `section.key`.
    std::string resolve(const std::string& section, const std::string& shared, const std::string& key) const;

    /// Starts a fresh record of the keys read.
    void begin_record() const { used_.clear(); }
    const std::map<std::string, std::string>& recorded() const { return used_; }

private:
    std::string raw(const std::string& key, const std::string& fallback) const;

    boost::property_tree::ptree tree_;
    mutable std::map<std::string, std::string> used_;
};

double parse_real(const std::string& text, const std::string& key);

/// Grid from `section` with fallback to [grid]; validated before use.
Grid grid_from(const ExperimentConfig& cfg, const std::string& section);

/// Kernel from [kernel] (shape, scale, or a table file) on the given grid.
Kernel kernel_from(const ExperimentConfig& cfg, const Grid& grid);

/// Sample times from `section`: t_min, t_max, samples, spacing = linear | geometric.
std::vector<double> times_from(const ExperimentConfig& cfg, const std::string& section, double t_min, double t_max,
                               int samples, const std::string& spacing);

/// Initial datum from `section`: datum = gaussian | bracket | indicator | bump | random,
/// with width, power, radius, mass and amplitude keys. `seed` feeds `random`.
GridFunction datum_from(const ExperimentConfig& cfg, const std::string& section, const Grid& grid,
                        const std::string& fallback, std::uint64_t seed);

}  // namespace nlf::cli
