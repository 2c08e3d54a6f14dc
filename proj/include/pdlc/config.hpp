#pragma once

// INI-style run configuration:
//
//   # comment
//   [section]
//   key = value        lists are comma separated
//
// Sections: run, thermal, queue, welfare, wind, market, sa, sim, sweep.
// Absent sections and keys keep their defaults; unknown sections or keys are
// rejected with the offending line number.

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pdlc/metrics.hpp"
#include "pdlc/procurement.hpp"
#include "pdlc/queue.hpp"
#include "pdlc/sim.hpp"
#include "pdlc/thermal.hpp"
#include "pdlc/wind.hpp"

namespace pdlc {

enum class SimProtocol : std::uint8_t { Binary, FullInfo };

struct FleetConfig {
    int rooms = 1;
    std::vector<double> t_set{24.0};   ///< one value per room, or one for all
    std::vector<double> band{1.0};
    std::vector<double> initial_temp;  ///< empty means start at the set points

    std::vector<OccupantPrefs> prefs() const;
    std::vector<ApplianceState> initial_states() const;
    bool operator==(const FleetConfig&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string output;  ///< informational; the CLI --out flag decides

    ThermalParams thermal;
    FleetConfig fleet;

    QueueParams queue{.n_appliances = 2, .m_servers = 1, .delta = 60.0,
                      .lambda = 1.0 / 600.0, .mu = 1.0 / 600.0};
    std::vector<int> m_grid;        ///< tradeoff-sweep; empty means 1..N
    std::vector<double> delta_grid; ///< tradeoff-sweep; empty means {delta}

    WelfareConfig welfare;
    EnergyWeights energy;

    WindSpec wind = WindSpec::proportional(10.0, 0.2);
    std::vector<double> p_r_grid;   ///< wind-welfare; empty means {p_r}
    std::vector<double> sigma_grid; ///< wind-welfare; empty means {stddev}
    int quad_nodes = 64;
    Quadrature::Scheme quad_scheme = Quadrature::Scheme::Exact;

    MarketSpec market{.k_t = 1.0, .k_r = 0.05, .gamma = 0.5,
                      .balancing = MarketSpec::default_balancing(1.0)};
    bool include_idle_cost = false;  ///< keep h in the market welfare curve

    SAConfig sa;
    int algorithm = 3;

    SimConfig sim;
    SimProtocol protocol = SimProtocol::Binary;
    double full_info_delta = 0.0;  ///< 0 means find_feasible_delta
    int full_info_m = 0;           ///< 0 means min_packets

    std::vector<double> cv_grid{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    std::vector<double> k_r_grid{0.02, 0.04, 0.06, 0.08, 0.10};  ///< multiples of k_t

    std::set<std::string> sections;  ///< sections present in the source text

    bool has(std::string_view section) const { return sections.count(std::string(section)) > 0; }
    /// Runs every module's invariant checks; throws std::invalid_argument.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError with a "line N:" prefix on syntax, type, unknown-key or
/// invariant failures.
RunConfig parse_config(std::string_view text);

/// Emits every key of every present section; parse_config reads it back to an
/// identical RunConfig.
std::string serialize_config(const RunConfig& cfg);

}  // namespace pdlc
