#include "pdlc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "pdlc/errors.hpp"

namespace pdlc {

using detail::require;

std::vector<OccupantPrefs> FleetConfig::prefs() const {
    require(rooms >= 1, "fleet: rooms must be at least 1");
    const auto pick = [&](const std::vector<double>& v, int i, const char* name) {
        require(v.size() == 1 || static_cast<int>(v.size()) == rooms,
                std::string("fleet: ") + name + " needs 1 or `rooms` values");
        return v.size() == 1 ? v.front() : v[static_cast<std::size_t>(i)];
    };
    std::vector<OccupantPrefs> out;
    out.reserve(static_cast<std::size_t>(rooms));
    for (int i = 0; i < rooms; ++i) out.push_back({pick(t_set, i, "t_set"), pick(band, i, "band")});
    return out;
}

std::vector<ApplianceState> FleetConfig::initial_states() const {
    const auto p = prefs();
    require(initial_temp.empty() || initial_temp.size() == 1 ||
                static_cast<int>(initial_temp.size()) == rooms,
            "fleet: initial_temp needs 0, 1 or `rooms` values");
    std::vector<ApplianceState> out;
    for (int i = 0; i < rooms; ++i) {
        const auto k = static_cast<std::size_t>(i);
        double t = p[k].t_set;
        if (initial_temp.size() == 1) t = initial_temp.front();
        if (initial_temp.size() > 1) t = initial_temp[k];
        out.push_back({i, t, Mode::Off});
    }
    return out;
}

void RunConfig::validate() const {
    thermal.validate();
    for (const auto& pr : fleet.prefs()) pr.validate(thermal);
    for (const auto& s : fleet.initial_states()) {
        require(std::isfinite(s.temp), "fleet: initial_temp must be finite");
    }
    queue.validate();
    for (int m : m_grid) require(m >= 1 && m <= queue.n_appliances, "queue: m_grid outside [1, n]");
    for (double d : delta_grid) require(std::isfinite(d) && d > 0.0, "queue: delta_grid must be positive");
    welfare.validate();
    require(energy.excess >= 0.0 && energy.deficiency >= 0.0,
            "welfare: energy weights must be nonnegative");
    wind.validate();
    for (double p : p_r_grid) require(std::isfinite(p) && p >= 0.0, "wind: p_r_grid must be >= 0");
    for (double s : sigma_grid) require(std::isfinite(s) && s >= 0.0, "wind: sigma_grid must be >= 0");
    require(quad_nodes >= 1, "wind: nodes must be at least 1");
    market.validate();
    sa.validate();
    require(algorithm >= 1 && algorithm <= 3, "sa: algorithm must be 1, 2 or 3");
    sim.validate();
    require(full_info_delta >= 0.0 && std::isfinite(full_info_delta),
            "sim: delta must be >= 0 (0 selects the feasible search)");
    require(full_info_m >= 0 && full_info_m <= fleet.rooms, "sim: m must lie in [0, rooms]");
    require(!cv_grid.empty() && !k_r_grid.empty(), "sweep: grids must be non-empty");
    for (double cv : cv_grid) require(std::isfinite(cv) && cv > 0.0, "sweep: cv_grid must be positive");
    for (double k : k_r_grid) require(std::isfinite(k) && k >= 0.0, "sweep: k_r_grid must be >= 0");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

template <class Int>
Int to_int(const std::string& s) {
    Int v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw std::invalid_argument("expected an integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "true" || l == "yes" || l == "1") return true;
    if (l == "false" || l == "no" || l == "0") return false;
    throw std::invalid_argument("expected true/false, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw std::invalid_argument("empty list element");
        out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(to_double(item));
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

// k_b and k_b_prob arrive as separate keys; they are paired once the whole
// text has been read.
struct Pending {
    std::optional<std::vector<double>> k_b;
    std::optional<std::vector<double>> k_b_prob;
    bool k_t_set = false;
};

struct Field {
    std::string key;
    std::function<void(RunConfig&, Pending&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field num(std::string key, T RunConfig::*outer, double T::*member) {
    return {key, [=](RunConfig& c, Pending&, const std::string& v) { c.*outer.*member = to_double(v); },
            [=](const RunConfig& c) { return fmt(c.*outer.*member); }};
}

template <class T, class I>
Field integer(std::string key, T RunConfig::*outer, I T::*member) {
    return {key, [=](RunConfig& c, Pending&, const std::string& v) { c.*outer.*member = to_int<I>(v); },
            [=](const RunConfig& c) { return std::to_string(c.*outer.*member); }};
}

Field doubles(std::string key, std::vector<double> RunConfig::*member) {
    return {key, [=](RunConfig& c, Pending&, const std::string& v) { c.*member = to_doubles(v); },
            [=](const RunConfig& c) { return join(c.*member); }};
}

template <class E>
Field choice(std::string key, E RunConfig::*member, std::vector<std::pair<std::string, E>> names) {
    return {key,
            [=](RunConfig& c, Pending&, const std::string& v) {
                for (const auto& [n, e] : names) {
                    if (n == v) {
                        c.*member = e;
                        return;
                    }
                }
                std::string allowed;
                for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : "|") + n;
                throw std::invalid_argument("expected one of " + allowed + ", got '" + v + "'");
            },
            [=](const RunConfig& c) {
                for (const auto& [n, e] : names) {
                    if (e == c.*member) return n;
                }
                return std::string();
            }};
}

template <class E>
Field sim_choice(std::string key, E SimConfig::*member, std::vector<std::pair<std::string, E>> names) {
    return {key,
            [=](RunConfig& c, Pending&, const std::string& v) {
                for (const auto& [n, e] : names) {
                    if (n == v) {
                        c.sim.*member = e;
                        return;
                    }
                }
                throw std::invalid_argument("unknown value '" + v + "'");
            },
            [=](const RunConfig& c) {
                for (const auto& [n, e] : names) {
                    if (e == c.sim.*member) return n;
                }
                return std::string();
            }};
}

using Table = std::vector<std::pair<std::string, std::vector<Field>>>;

const Table& table() {
    static const Table t = [] {
        Table out;
        out.push_back({"run",
                       {{"seed",
                         [](RunConfig& c, Pending&, const std::string& v) { c.seed = to_int<std::uint64_t>(v); },
                         [](const RunConfig& c) { return std::to_string(c.seed); }},
                        {"output", [](RunConfig& c, Pending&, const std::string& v) { c.output = v; },
                         [](const RunConfig& c) { return c.output; }}}});
        out.push_back({"thermal",
                       {num("t_out", &RunConfig::thermal, &ThermalParams::t_out),
                        num("t_gain", &RunConfig::thermal, &ThermalParams::t_gain),
                        num("tau", &RunConfig::thermal, &ThermalParams::tau),
                        num("w_max", &RunConfig::thermal, &ThermalParams::w_max),
                        num("rated_power", &RunConfig::thermal, &ThermalParams::rated_power),
                        integer("rooms", &RunConfig::fleet, &FleetConfig::rooms),
                        {"t_set", [](RunConfig& c, Pending&, const std::string& v) { c.fleet.t_set = to_doubles(v); },
                         [](const RunConfig& c) { return join(c.fleet.t_set); }},
                        {"band", [](RunConfig& c, Pending&, const std::string& v) { c.fleet.band = to_doubles(v); },
                         [](const RunConfig& c) { return join(c.fleet.band); }},
                        {"initial_temp",
                         [](RunConfig& c, Pending&, const std::string& v) { c.fleet.initial_temp = to_doubles(v); },
                         [](const RunConfig& c) { return join(c.fleet.initial_temp); }}}});
        out.push_back({"queue",
                       {integer("n", &RunConfig::queue, &QueueParams::n_appliances),
                        integer("m", &RunConfig::queue, &QueueParams::m_servers),
                        num("delta", &RunConfig::queue, &QueueParams::delta),
                        num("lambda", &RunConfig::queue, &QueueParams::lambda),
                        num("mu", &RunConfig::queue, &QueueParams::mu),
                        {"m_grid",
                         [](RunConfig& c, Pending&, const std::string& v) {
                             c.m_grid.clear();
                             for (const auto& item : split_list(v)) c.m_grid.push_back(to_int<int>(item));
                         },
                         [](const RunConfig& c) {
                             std::string s;
                             for (std::size_t i = 0; i < c.m_grid.size(); ++i) {
                                 s += (i ? ", " : "") + std::to_string(c.m_grid[i]);
                             }
                             return s;
                         }},
                        doubles("delta_grid", &RunConfig::delta_grid)}});
        out.push_back({"welfare",
                       {num("g_quad", &RunConfig::welfare, &WelfareConfig::g_quad),
                        num("g_lin", &RunConfig::welfare, &WelfareConfig::g_lin),
                        num("h_price", &RunConfig::welfare, &WelfareConfig::h_price),
                        num("kappa", &RunConfig::welfare, &WelfareConfig::kappa),
                        num("w_cap", &RunConfig::welfare, &WelfareConfig::w_cap),
                        num("excess_weight", &RunConfig::energy, &EnergyWeights::excess),
                        num("deficiency_weight", &RunConfig::energy, &EnergyWeights::deficiency)}});
        out.push_back({"wind",
                       {num("p_r", &RunConfig::wind, &WindSpec::p_r),
                        num("sigma", &RunConfig::wind, &WindSpec::sigma),
                        num("cv", &RunConfig::wind, &WindSpec::cv),
                        {"correlated",
                         [](RunConfig& c, Pending&, const std::string& v) { c.wind.correlated = to_bool(v); },
                         [](const RunConfig& c) { return std::string(c.wind.correlated ? "true" : "false"); }},
                        doubles("p_r_grid", &RunConfig::p_r_grid),
                        doubles("sigma_grid", &RunConfig::sigma_grid),
                        {"nodes", [](RunConfig& c, Pending&, const std::string& v) { c.quad_nodes = to_int<int>(v); },
                         [](const RunConfig& c) { return std::to_string(c.quad_nodes); }},
                        choice("scheme", &RunConfig::quad_scheme,
                               {{"exact", Quadrature::Scheme::Exact},
                                {"gauss-hermite", Quadrature::Scheme::GaussHermite}})}});
        out.push_back({"market",
                       {{"k_t",
                         [](RunConfig& c, Pending& p, const std::string& v) {
                             c.market.k_t = to_double(v);
                             p.k_t_set = true;
                         },
                         [](const RunConfig& c) { return fmt(c.market.k_t); }},
                        num("k_r", &RunConfig::market, &MarketSpec::k_r),
                        num("gamma", &RunConfig::market, &MarketSpec::gamma),
                        {"k_b", [](RunConfig&, Pending& p, const std::string& v) { p.k_b = to_doubles(v); },
                         [](const RunConfig& c) {
                             std::vector<double> v;
                             for (const auto& a : c.market.balancing) v.push_back(a.price);
                             return join(v);
                         }},
                        {"k_b_prob", [](RunConfig&, Pending& p, const std::string& v) { p.k_b_prob = to_doubles(v); },
                         [](const RunConfig& c) {
                             std::vector<double> v;
                             for (const auto& a : c.market.balancing) v.push_back(a.prob);
                             return join(v);
                         }},
                        {"include_idle_cost",
                         [](RunConfig& c, Pending&, const std::string& v) { c.include_idle_cost = to_bool(v); },
                         [](const RunConfig& c) { return std::string(c.include_idle_cost ? "true" : "false"); }}}});
        out.push_back({"sa",
                       {integer("max_iter", &RunConfig::sa, &SAConfig::max_iter),
                        integer("block_pt", &RunConfig::sa, &SAConfig::block_pt),
                        integer("block_pr", &RunConfig::sa, &SAConfig::block_pr),
                        num("step_scale", &RunConfig::sa, &SAConfig::step_scale),
                        num("step_scale_pr", &RunConfig::sa, &SAConfig::step_scale_pr),
                        num("epsilon", &RunConfig::sa, &SAConfig::epsilon),
                        integer("inner_nodes", &RunConfig::sa, &SAConfig::inner_nodes),
                        {"scheme",
                         [](RunConfig& c, Pending&, const std::string& v) {
                             if (v == "exact") {
                                 c.sa.scheme = Quadrature::Scheme::Exact;
                             } else if (v == "gauss-hermite") {
                                 c.sa.scheme = Quadrature::Scheme::GaussHermite;
                             } else {
                                 throw std::invalid_argument("expected exact|gauss-hermite, got '" + v + "'");
                             }
                         },
                         [](const RunConfig& c) {
                             return std::string(c.sa.scheme == Quadrature::Scheme::Exact ? "exact"
                                                                                         : "gauss-hermite");
                         }},
                        integer("max_outer", &RunConfig::sa, &SAConfig::max_outer),
                        integer("window", &RunConfig::sa, &SAConfig::window),
                        num("p_t0", &RunConfig::sa, &SAConfig::p_t0),
                        num("p_r0", &RunConfig::sa, &SAConfig::p_r0),
                        {"algorithm",
                         [](RunConfig& c, Pending&, const std::string& v) { c.algorithm = to_int<int>(v); },
                         [](const RunConfig& c) { return std::to_string(c.algorithm); }}}});
        out.push_back({"sim",
                       {integer("events", &RunConfig::sim, &SimConfig::events),
                        num("horizon", &RunConfig::sim, &SimConfig::horizon),
                        integer("replications", &RunConfig::sim, &SimConfig::replications),
                        num("warmup_fraction", &RunConfig::sim, &SimConfig::warmup_fraction),
                        integer("batches", &RunConfig::sim, &SimConfig::batches),
                        sim_choice("model", &SimConfig::model,
                                   {{"slotted", BinaryModel::Slotted}, {"chain", BinaryModel::Chain}}),
                        sim_choice("lower_edge", &SimConfig::lower_edge,
                                   {{"clamp", LowerEdge::Clamp}, {"hysteresis", LowerEdge::Hysteresis}}),
                        choice("protocol", &RunConfig::protocol,
                               {{"binary", SimProtocol::Binary}, {"full-info", SimProtocol::FullInfo}}),
                        {"delta",
                         [](RunConfig& c, Pending&, const std::string& v) { c.full_info_delta = to_double(v); },
                         [](const RunConfig& c) { return fmt(c.full_info_delta); }},
                        {"m", [](RunConfig& c, Pending&, const std::string& v) { c.full_info_m = to_int<int>(v); },
                         [](const RunConfig& c) { return std::to_string(c.full_info_m); }}}});
        out.push_back({"sweep", {doubles("cv_grid", &RunConfig::cv_grid), doubles("k_r_grid", &RunConfig::k_r_grid)}});
        return out;
    }();
    return t;
}

const std::vector<Field>* section_fields(const std::string& name) {
    for (const auto& [n, fields] : table()) {
        if (n == name) return &fields;
    }
    return nullptr;
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("line " + std::to_string(line) + ": " + what);
}

// Invariant checks grouped by the section whose keys they constrain.
void check_section(const std::string& name, const RunConfig& c) {
    if (name == "thermal") {
        c.thermal.validate();
        for (const auto& pr : c.fleet.prefs()) pr.validate(c.thermal);
        c.fleet.initial_states();
    } else if (name == "queue") {
        c.queue.validate();
        for (int m : c.m_grid) require(m >= 1 && m <= c.queue.n_appliances, "m_grid outside [1, n]");
        for (double d : c.delta_grid) require(std::isfinite(d) && d > 0.0, "delta_grid must be positive");
    } else if (name == "welfare") {
        c.welfare.validate();
        require(c.energy.excess >= 0.0 && c.energy.deficiency >= 0.0, "energy weights must be nonnegative");
    } else if (name == "wind") {
        c.wind.validate();
        require(c.quad_nodes >= 1, "nodes must be at least 1");
    } else if (name == "market") {
        c.market.validate();
    } else if (name == "sa") {
        c.sa.validate();
        require(c.algorithm >= 1 && c.algorithm <= 3, "algorithm must be 1, 2 or 3");
    }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    Pending pending;
    std::map<std::string, int> header_line;
    std::string section;
    int market_line = 0;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (section_fields(section) == nullptr) fail(line, "unknown section [" + section + "]");
            if (header_line.count(section)) fail(line, "duplicate section [" + section + "]");
            header_line[section] = line;
            cfg.sections.insert(section);
            if (section == "market") market_line = line;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value, got '" + s + "'");
        if (section.empty()) fail(line, "key outside any section");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        const auto* fields = section_fields(section);
        const auto it = std::find_if(fields->begin(), fields->end(),
                                     [&](const Field& f) { return f.key == key; });
        if (it == fields->end()) fail(line, "unknown key '" + key + "' in [" + section + "]");
        try {
            it->set(cfg, pending, value);
        } catch (const std::invalid_argument& e) {
            fail(line, "[" + section + "] " + key + ": " + e.what());
        } catch (const std::out_of_range&) {
            fail(line, "[" + section + "] " + key + ": value out of range");
        }
    }

    if (pending.k_b_prob && !pending.k_b) fail(market_line, "[market] k_b_prob given without k_b");
    if (pending.k_b) {
        const auto& prices = *pending.k_b;
        std::vector<double> probs;
        if (pending.k_b_prob) {
            probs = *pending.k_b_prob;
        } else {
            probs.assign(prices.size(), prices.empty() ? 0.0 : 1.0 / static_cast<double>(prices.size()));
        }
        if (probs.size() != prices.size()) {
            fail(market_line, "[market] k_b and k_b_prob differ in length");
        }
        cfg.market.balancing.clear();
        for (std::size_t i = 0; i < prices.size(); ++i) cfg.market.balancing.push_back({prices[i], probs[i]});
    } else if (pending.k_t_set) {
        cfg.market.balancing = MarketSpec::default_balancing(cfg.market.k_t);
    }

    if (cfg.wind.correlated) cfg.wind.sigma = cfg.wind.cv * cfg.wind.p_r;

    for (const auto& [name, fields] : table()) {
        const int at = header_line.count(name) ? header_line[name] : 0;
        try {
            check_section(name, cfg);
        } catch (const std::invalid_argument& e) {
            if (at == 0) throw ConfigError(std::string("defaults: ") + e.what());
            fail(at, "[" + name + "] " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    for (const auto& [name, fields] : table()) {
        if (!cfg.has(name)) continue;
        out << '[' << name << "]\n";
        for (const auto& f : fields) out << f.key << " = " << f.get(cfg) << '\n';
        out << '\n';
    }
    return out.str();
}

}  // namespace pdlc
