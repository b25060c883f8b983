#include "nlfujita/cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "nlfujita/error.hpp"
#include "nlfujita/report.hpp"

namespace nlf::cli {

SweepConfig::SweepConfig() {
    stepper.horizon = 200.0;
    stepper.dt0 = 0.125;
    stepper.dt_max = 2.0;
    // Classification only needs the blow-up time to a few digits.
    stepper.rtol = 1e-3;
}

double SweepTable::positivity_floor() const {
    double worst = 0.0;
    for (const auto& r : rows) worst = std::min({worst, r.small.positivity_floor, r.large.positivity_floor});
    return worst;
}

namespace {

SweepRun summarise(const Trajectory& tr) {
    SweepRun r;
    r.status = tr.status;
    r.T_num = tr.T_num;
    r.final_t = tr.norms.back().t;
    r.final_Linf = tr.norms.back().Linf;
    r.positivity_floor = tr.positivity_floor;
    r.warnings = tr.warnings;
    return r;
}

}  // namespace

void derive_bracket(SweepTable& table) {
    auto& rows = table.rows;
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.p < b.p; });
    double lowest_inconclusive = kInf, highest_inconclusive = -kInf;
    for (auto& r : rows) {
        r.flagged = r.small.status == TrajectoryStatus::inconclusive || r.large.status == TrajectoryStatus::inconclusive;
        if (r.small.status == TrajectoryStatus::inconclusive) {
            lowest_inconclusive = std::min(lowest_inconclusive, r.p);
            highest_inconclusive = std::max(highest_inconclusive, r.p);
        }
    }
    table.p_lo.reset();
    table.p_hi.reset();
    double first_decay = kInf;
    for (const auto& r : rows)
        if (r.small.status == TrajectoryStatus::global_decay) first_decay = std::min(first_decay, r.p);
    // Blow-up readings count only below every decay and every inconclusive row.
    for (const auto& r : rows)
        if (r.small.status == TrajectoryStatus::blown_up && r.p < first_decay && r.p < lowest_inconclusive)
            table.p_lo = r.p;
    const double floor = std::max(table.p_lo.value_or(-kInf), highest_inconclusive);
    for (const auto& r : rows)
        if (r.small.status == TrajectoryStatus::global_decay && r.p > floor) {
            table.p_hi = r.p;
            break;
        }
}

SweepTable fujita_sweep(const SweepConfig& config) {
    if (!(config.sigma >= 0.0)) throw Error("fujita sweep needs sigma >= 0");
    if (config.p_list.empty()) throw Error("empty p list");
    for (double p : config.p_list)
        if (!(p > 1.0)) throw Error("exponent out of range");
    const double pF = 1.0 + (config.sigma + 2.0) / config.n;
    if (!(*std::min_element(config.p_list.begin(), config.p_list.end()) < pF &&
          *std::max_element(config.p_list.begin(), config.p_list.end()) > pF))
        throw Error(fmt::format("p list does not bracket 1 + (sigma + 2)/n = {}", pF));

    const Grid grid(config.n, config.L, config.M);
    const Kernel kernel = Kernel::build(config.kernel, grid);
    const Certificate cert = check_hypotheses(kernel, GlobalHypothesis{config.eps0});
    if (!cert.passed) throw HypothesisError("kernel fails the global hypotheses", cert.render());
    const ConvolutionPlan plan(grid);
    const GreenSeries gs(kernel, plan, config.stepper.dt_max);
    ReactionCoefficient a;
    a.sigma = config.sigma;
    a.scale = config.C_a;
    a.clip_radius = 0.9 * config.L;
    const GridFunction small = bump(grid, config.radius, config.m_small);
    const GridFunction large = bump(grid, config.radius, config.m_large);

    SweepTable table;
    table.config = config;
    table.rows.resize(config.p_list.size());
    const std::size_t jobs = 2 * config.p_list.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
            const std::size_t row = j / 2;
            const double p = config.p_list[row];
            const auto tr = run(gs, j % 2 == 0 ? small : large, a, p, config.stepper);
            // Each job owns its slot, so no lock is needed.
            table.rows[row].p = p;
            (j % 2 == 0 ? table.rows[row].small : table.rows[row].large) = summarise(tr);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(jobs)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    derive_bracket(table);
    return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table, const std::string& version) {
    const auto& c = table.config;
    out << "# fujita_sweep version " << version << "\n";
    out << fmt::format("# n = {}\n# sigma = {}\n# L = {}\n# M = {}\n# kernel = {}({})\n# C_a = {}\n", c.n, c.sigma, c.L,
                       c.M, to_string(c.kernel.shape), c.kernel.scale, c.C_a);
    out << fmt::format("# radius = {}\n# m_small = {}\n# m_large = {}\n", c.radius, c.m_small, c.m_large);
    out << fmt::format("# horizon = {}\n# dt0 = {}\n# dt_max = {}\n# rtol = {}\n", c.stepper.horizon, c.stepper.dt0,
                       c.stepper.dt_max, c.stepper.rtol);
    out << "# p_F = " << format_number(table.fujita()) << "\n";
    out << "# p_lo = " << (table.p_lo ? format_number(*table.p_lo) : "none") << "\n";
    out << "# p_hi = " << (table.p_hi ? format_number(*table.p_hi) : "none") << "\n";
    out << "p,small_status,small_T_num,large_status,large_T_num,flagged\n";
    auto T = [](const SweepRun& r) { return r.T_num ? format_number(*r.T_num) : std::string(); };
    for (const auto& r : table.rows)
        out << format_number(r.p) << ',' << to_string(r.small.status) << ',' << T(r.small) << ','
            << to_string(r.large.status) << ',' << T(r.large) << ',' << (r.flagged ? 1 : 0) << '\n';
}

}  // namespace nlf::cli
