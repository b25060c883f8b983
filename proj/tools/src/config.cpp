#include "nlfujita/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>

#include "nlfujita/report.hpp"
#include "nlfujita/simulate.hpp"

namespace nlf::cli {

namespace pt = boost::property_tree;

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("config file '{}' does not exist or is unreadable", path.string()));
    return parse(in);
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    try {
        pt::ini_parser::read_ini(in, cfg.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config parse error at line {}: {}", e.line(), e.message()));
    }
    return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

bool ExperimentConfig::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string ExperimentConfig::raw(const std::string& key, const std::string& fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    std::string out = v ? boost::trim_copy(*v) : fallback;
    used_[key] = out;
    return out;
}

double parse_real(const std::string& text, const std::string& key) {
    const std::string t = boost::to_lower_copy(boost::trim_copy(text));
    if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
    if (t == "-inf") return -kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
    }
}

double ExperimentConfig::real(const std::string& key, double fallback) const {
    return parse_real(raw(key, format_number(fallback)), key);
}

int ExperimentConfig::integer(const std::string& key, int fallback) const {
    const double v = real(key, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(fmt::format("{} must be an integer", key));
    return static_cast<int>(v);
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
    return raw(key, fallback);
}

std::vector<double> ExperimentConfig::reals(const std::string& key, const std::vector<double>& fallback) const {
    std::string joined;
    for (std::size_t i = 0; i < fallback.size(); ++i) joined += (i ? ", " : "") + format_number(fallback[i]);
    const std::string s = raw(key, joined);
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts)
        if (!boost::trim_copy(p).empty()) out.push_back(parse_real(p, key));
    return out;
}

std::string ExperimentConfig::resolve(const std::string& section, const std::string& shared,
                                      const std::string& key) const {
    const std::string own = section + "." + key;
    if (has(own)) return own;
    const std::string common = shared + "." + key;
    if (has(common)) return common;
    return own;
}

Grid grid_from(const ExperimentConfig& cfg, const std::string& section) {
    const int n = cfg.integer(cfg.resolve(section, "grid", "n"), 1);
    const double L = cfg.real(cfg.resolve(section, "grid", "L"), 40.0);
    const int M = cfg.integer(cfg.resolve(section, "grid", "M"), 1024);
    if (n < 1 || n > 3) throw ConfigError(fmt::format("[{}] n must be 1, 2 or 3; got {}", section, n));
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError(fmt::format("[{}] L must be positive", section));
    if (M < 8 || M % 2 != 0) throw ConfigError(fmt::format("[{}] M must be even and >= 8; got {}", section, M));
    const double nodes = std::pow(static_cast<double>(M) + 1.0, n);
    if (nodes > 2e7) throw ConfigError(fmt::format("[{}] grid has {:.3g} nodes; the limit is 2e7", section, nodes));
    return Grid(n, L, M);
}

Kernel kernel_from(const ExperimentConfig& cfg, const Grid& grid) {
    const std::string shape = cfg.text("kernel.shape", "gaussian");
    if (shape == "table") {
        const std::string path = cfg.text("kernel.table", "");
        if (path.empty()) throw ConfigError("kernel.shape = table needs kernel.table");
        std::ifstream in(path);
        if (!in) throw ConfigError(fmt::format("kernel table '{}' does not exist or is unreadable", path));
        return load_kernel_table(in, grid.lattice());
    }
    KernelSpec spec;
    try {
        spec.shape = parse_kernel_shape(shape);
    } catch (const Error& e) {
        throw ConfigError(fmt::format("kernel.shape: {}", e.what()));
    }
    spec.scale = cfg.real("kernel.scale", 1.0);
    if (!(spec.scale > 0.0)) throw ConfigError("kernel.scale must be positive");
    return Kernel::build(spec, grid);
}

std::vector<double> times_from(const ExperimentConfig& cfg, const std::string& section, double t_min, double t_max,
                               int samples, const std::string& spacing) {
    const double a = cfg.real(section + ".t_min", t_min);
    const double b = cfg.real(section + ".t_max", t_max);
    const int count = cfg.integer(section + ".samples", samples);
    const std::string kind = cfg.text(section + ".spacing", spacing);
    if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
        throw ConfigError(fmt::format("[{}] need 0 <= t_min < t_max", section));
    if (count < 2) throw ConfigError(fmt::format("[{}] samples must be >= 2", section));
    std::vector<double> t(count);
    if (kind == "linear") {
        for (int i = 0; i < count; ++i) t[i] = a + (b - a) * i / (count - 1);
    } else if (kind == "geometric") {
        if (!(a > 0.0)) throw ConfigError(fmt::format("[{}] geometric spacing needs t_min > 0", section));
        for (int i = 0; i < count; ++i) t[i] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
    } else {
        throw ConfigError(fmt::format("[{}] spacing must be linear or geometric", section));
    }
    t.back() = b;
    return t;
}

GridFunction datum_from(const ExperimentConfig& cfg, const std::string& section, const Grid& grid,
                        const std::string& fallback, std::uint64_t seed) {
    const std::string kind = cfg.text(section + ".datum", fallback);
    const double amp = cfg.real(section + ".amplitude", 1.0);
    if (!(amp >= 0.0)) throw ConfigError(fmt::format("[{}] amplitude must be nonnegative", section));
    GridFunction f(grid);
    if (kind == "gaussian") {
        const double w = cfg.real(section + ".width", 1.0);
        if (!(w > 0.0)) throw ConfigError(fmt::format("[{}] width must be positive", section));
        f = GridFunction::sample(grid, [&](const Point& x) {
            return amp * std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (w * w));
        });
    } else if (kind == "bracket") {
        const double s = cfg.real(section + ".power", 3.0);
        f = GridFunction::sample(grid, [&](const Point& x) {
            return amp * std::pow(1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2], -0.5 * s);
        });
    } else if (kind == "indicator") {
        const double r = cfg.real(section + ".radius", 1.0);
        if (!(r > 0.0)) throw ConfigError(fmt::format("[{}] radius must be positive", section));
        f = GridFunction::sample(grid, [&](const Point& x) {
            return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= r * r ? amp : 0.0;
        });
    } else if (kind == "bump") {
        const double r = cfg.real(section + ".radius", 1.0);
        const double m = cfg.real(section + ".mass", 1.0);
        if (!(r > 0.0) || !(m >= 0.0)) throw ConfigError(fmt::format("[{}] bump needs radius > 0, mass >= 0", section));
        f = bump(grid, r, m);
    } else if (kind == "random") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.0, amp);
        const double r = cfg.real(section + ".radius", 4.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double v = U(rng);
            f[i] = grid.radius_squared(i) <= r * r ? v : 0.0;
        }
    } else {
        throw ConfigError(fmt::format("[{}] datum must be gaussian, bracket, indicator, bump or random", section));
    }
    return f;
}

}  // namespace nlf::cli
