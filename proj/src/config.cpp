#include "ctsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace ctsim {

std::string to_string(ProtocolFamily f) {
    return f == ProtocolFamily::decentralised ? "decentralised" : "centralised";
}

std::string to_string(AttackType t) {
    switch (t) {
        case AttackType::none: return "none";
        case AttackType::sniffer_grid: return "sniffer_grid";
        case AttackType::relay: return "relay";
        case AttackType::replay_stale: return "replay_stale";
        case AttackType::sybil: return "sybil";
    }
    return "none";
}

std::string to_string(RelayMode m) {
    return m == RelayMode::close_by_relay ? "close_by_relay" : "remote_satellite";
}

std::string to_string(FanoutPolicy p) {
    return p == FanoutPolicy::release ? "release" : "suppress";
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(static_cast<int>(parse_int(key, trim(item))));
    }
    return out;
}

std::string format_double(double d) {
    // Shortest representation that round-trips; keeps resolved configs and
    // manifests byte-stable.
    char buf[64];
    snprintf(buf, sizeof(buf), "%.17g", d);
    double back = 0.0;
    // try progressively shorter forms
    for (int prec = 1; prec <= 17; ++prec) {
        char trial[64];
        snprintf(trial, sizeof(trial), "%.*g", prec, d);
        sscanf(trial, "%lf", &back);
        if (back == d) return trial;
    }
    return buf;
}

std::string format_int_list(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

void require(bool cond, const std::string& message) {
    if (!cond) throw ConfigError("invalid scenario: " + message);
}

} // namespace

FlatConfig parse_config_text(const std::string& text) {
    FlatConfig entries;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("parse error at line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("parse error at line " + std::to_string(lineno) + ": empty key");
        }
        for (char c : key) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') {
                throw ConfigError("parse error at line " + std::to_string(lineno) +
                                  ": bad character in key '" + key + "'");
            }
        }
        if (!seen.insert(key).second) {
            throw ConfigError("parse error at line " + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
        }
        entries.emplace_back(key, value);
    }
    return entries;
}

void apply_override(FlatConfig& entries, const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(key, value);
}

namespace {

// Assigns one key. Returns false for unknown keys.
bool assign(ScenarioConfig& c, const std::string& key, const std::string& value) {
    if (key == "world_width_m") c.world_width_m = parse_double(key, value);
    else if (key == "world_height_m") c.world_height_m = parse_double(key, value);
    else if (key == "n_agents") c.n_agents = static_cast<int>(parse_int(key, value));
    else if (key == "adoption_fraction") c.adoption_fraction = parse_double(key, value);
    else if (key == "speed_min_mps") c.speed_min_mps = parse_double(key, value);
    else if (key == "speed_max_mps") c.speed_max_mps = parse_double(key, value);
    else if (key == "step_seconds") c.step_seconds = static_cast<int>(parse_int(key, value));
    else if (key == "duration_days") c.duration_days = parse_double(key, value);
    else if (key == "rng_seed") c.rng_seed = parse_u64(key, value);
    else if (key == "protocol") {
        if (value == "decentralised") c.protocol = ProtocolFamily::decentralised;
        else if (value == "centralised") c.protocol = ProtocolFamily::centralised;
        else throw ConfigError("key 'protocol': expected decentralised|centralised, got '" + value + "'");
    }
    else if (key == "reporting_probability") c.reporting_probability = parse_double(key, value);
    else if (key == "risk.proximity_threshold_m") c.risk.proximity_threshold_m = parse_double(key, value);
    else if (key == "risk.exposure_minutes_threshold") c.risk.exposure_minutes_threshold = parse_double(key, value);
    else if (key == "radio.max_range_m") c.radio.max_range_m = parse_double(key, value);
    else if (key == "radio.rssi_at_1m_db") c.radio.rssi_at_1m_db = parse_double(key, value);
    else if (key == "radio.path_loss_exponent") c.radio.path_loss_exponent = parse_double(key, value);
    else if (key == "radio.noise_sigma_db") c.radio.noise_sigma_db = parse_double(key, value);
    else if (key == "radio.detection_floor_db") c.radio.detection_floor_db = parse_double(key, value);
    else if (key == "radio.trace_receptions") c.radio.trace_receptions = parse_bool(key, value);
    else if (key == "epidemic.p_transmit_per_contact_minute") c.epidemic.p_transmit_per_contact_minute = parse_double(key, value);
    else if (key == "epidemic.infection_radius_m") c.epidemic.infection_radius_m = parse_double(key, value);
    else if (key == "epidemic.incubation_days") c.epidemic.incubation_days = parse_double(key, value);
    else if (key == "epidemic.infectious_days") c.epidemic.infectious_days = parse_double(key, value);
    else if (key == "epidemic.test_delay_days") c.epidemic.test_delay_days = parse_double(key, value);
    else if (key == "epidemic.initial_infected") c.epidemic.initial_infected = static_cast<int>(parse_int(key, value));
    else if (key == "epidemic.seed_agents") c.epidemic.seed_agents = parse_int_list(key, value);
    else if (key == "epidemic.quarantine_compliance") c.epidemic.quarantine_compliance = parse_double(key, value);
    else if (key == "epidemic.quarantine_days") c.epidemic.quarantine_days = parse_double(key, value);
    else if (key == "epidemic.quarantine_transmit_factor") c.epidemic.quarantine_transmit_factor = parse_double(key, value);
    else if (key == "centralised.poll_interval_seconds") c.centralised.poll_interval_seconds = static_cast<int>(parse_int(key, value));
    else if (key == "centralised.per_source_limit") c.centralised.per_source_limit = static_cast<int>(parse_int(key, value));
    else if (key == "centralised.fanout_threshold") c.centralised.fanout_threshold = static_cast<int>(parse_int(key, value));
    else if (key == "centralised.fanout_policy") {
        if (value == "release") c.centralised.fanout_policy = FanoutPolicy::release;
        else if (value == "suppress") c.centralised.fanout_policy = FanoutPolicy::suppress;
        else throw ConfigError("key 'centralised.fanout_policy': expected release|suppress, got '" + value + "'");
    }
    else if (key == "attack.type") {
        if (value == "none") c.attack.type = AttackType::none;
        else if (value == "sniffer_grid") c.attack.type = AttackType::sniffer_grid;
        else if (value == "relay") c.attack.type = AttackType::relay;
        else if (value == "replay_stale") c.attack.type = AttackType::replay_stale;
        else if (value == "sybil") c.attack.type = AttackType::sybil;
        else throw ConfigError("key 'attack.type': unknown attack '" + value + "'");
    }
    else if (key == "attack.sniffer.grid_nx") c.attack.sniffer.grid_nx = static_cast<int>(parse_int(key, value));
    else if (key == "attack.sniffer.grid_ny") c.attack.sniffer.grid_ny = static_cast<int>(parse_int(key, value));
    else if (key == "attack.relay.mode") {
        if (value == "close_by_relay") c.attack.relay.mode = RelayMode::close_by_relay;
        else if (value == "remote_satellite") c.attack.relay.mode = RelayMode::remote_satellite;
        else throw ConfigError("key 'attack.relay.mode': expected close_by_relay|remote_satellite, got '" + value + "'");
    }
    else if (key == "attack.relay.captured_agents") c.attack.relay.captured_agents = parse_int_list(key, value);
    else if (key == "attack.relay.target_agents") c.attack.relay.target_agents = parse_int_list(key, value);
    else if (key == "attack.relay.latency_ticks") c.attack.relay.latency_ticks = static_cast<int>(parse_int(key, value));
    else if (key == "attack.relay.use_capture_zone") c.attack.relay.use_capture_zone = parse_bool(key, value);
    else if (key == "attack.relay.zone_x") c.attack.relay.zone_x = parse_double(key, value);
    else if (key == "attack.relay.zone_y") c.attack.relay.zone_y = parse_double(key, value);
    else if (key == "attack.relay.zone_radius") c.attack.relay.zone_radius = parse_double(key, value);
    else if (key == "attack.relay.blacklist_captured") c.attack.relay.blacklist_captured = parse_bool(key, value);
    else if (key == "attack.relay.stale_delay_ticks") c.attack.relay.stale_delay_ticks = static_cast<int>(parse_int(key, value));
    else if (key == "attack.sybil.listener_x") c.attack.sybil.listener_x = parse_double(key, value);
    else if (key == "attack.sybil.listener_y") c.attack.sybil.listener_y = parse_double(key, value);
    else if (key == "attack.sybil.bucket_intervals") c.attack.sybil.bucket_intervals = static_cast<int>(parse_int(key, value));
    else if (key == "attack.sybil.accounts_requested") c.attack.sybil.accounts_requested = static_cast<int>(parse_int(key, value));
    else return false;
    return true;
}

void validate(ScenarioConfig& c) {
    require(c.world_width_m > 0 && c.world_height_m > 0,
            "world dimensions must be > 0 (world_width_m, world_height_m)");
    require(c.n_agents >= 0, "n_agents must be set and >= 0");
    require(c.adoption_fraction >= 0.0 && c.adoption_fraction <= 1.0,
            "adoption_fraction must be within [0, 1]");
    require(c.speed_min_mps >= 0.0, "speed_min_mps must be >= 0");
    require(c.speed_min_mps <= c.speed_max_mps, "speed_min_mps must be <= speed_max_mps");
    require(c.step_seconds > 0, "step_seconds must be > 0");
    require(kRotationSeconds % c.step_seconds == 0,
            "step_seconds must divide 900 (the identifier rotation period) exactly");
    require(c.duration_days > 0, "duration_days must be > 0");
    require(c.reporting_probability >= 0.0 && c.reporting_probability <= 1.0,
            "reporting_probability must be within [0, 1]");
    require(c.risk.proximity_threshold_m > 0, "risk.proximity_threshold_m must be > 0");
    require(c.risk.exposure_minutes_threshold > 0, "risk.exposure_minutes_threshold must be > 0");
    require(c.radio.max_range_m > 0, "radio.max_range_m must be > 0");
    require(c.radio.noise_sigma_db >= 0, "radio.noise_sigma_db must be >= 0");
    require(c.radio.path_loss_exponent > 0, "radio.path_loss_exponent must be > 0");
    auto& e = c.epidemic;
    require(e.p_transmit_per_contact_minute >= 0.0 && e.p_transmit_per_contact_minute <= 1.0,
            "epidemic.p_transmit_per_contact_minute must be within [0, 1]");
    require(e.infection_radius_m > 0, "epidemic.infection_radius_m must be > 0");
    require(e.incubation_days > 0, "epidemic.incubation_days must be > 0");
    require(e.infectious_days > 0, "epidemic.infectious_days must be > 0");
    require(e.test_delay_days > 0, "epidemic.test_delay_days must be > 0");
    require(e.initial_infected >= 0, "epidemic.initial_infected must be >= 0");
    require(e.initial_infected <= c.n_agents,
            "epidemic.initial_infected must be <= n_agents");
    for (int a : e.seed_agents) {
        require(a >= 0 && a < c.n_agents, "epidemic.seed_agents ids must be within [0, n_agents)");
    }
    require(e.quarantine_compliance >= 0.0 && e.quarantine_compliance <= 1.0,
            "epidemic.quarantine_compliance must be within [0, 1]");
    require(e.quarantine_days > 0, "epidemic.quarantine_days must be > 0");
    require(e.quarantine_transmit_factor >= 0.0 && e.quarantine_transmit_factor <= 1.0,
            "epidemic.quarantine_transmit_factor must be within [0, 1]");
    require(c.centralised.poll_interval_seconds > 0, "centralised.poll_interval_seconds must be > 0");
    require(c.centralised.per_source_limit >= 0, "centralised.per_source_limit must be >= 0");
    require(c.centralised.fanout_threshold >= 0, "centralised.fanout_threshold must be >= 0");

    auto& at = c.attack;
    if (at.type == AttackType::sniffer_grid) {
        require(at.sniffer.grid_nx > 0 && at.sniffer.grid_ny > 0,
                "attack.sniffer grid dimensions must be > 0");
    }
    if (at.type == AttackType::relay || at.type == AttackType::replay_stale) {
        require(!at.relay.target_agents.empty(), "attack.relay.target_agents must not be empty");
        require(at.relay.use_capture_zone || !at.relay.captured_agents.empty(),
                "attack.relay needs captured_agents or a capture zone");
        require(at.relay.latency_ticks >= 0, "attack.relay.latency_ticks must be >= 0");
        require(at.relay.stale_delay_ticks >= 0, "attack.relay.stale_delay_ticks must be >= 0");
        for (int a : at.relay.captured_agents) {
            require(a >= 0 && a < c.n_agents, "attack.relay.captured_agents ids must be within [0, n_agents)");
        }
        for (int a : at.relay.target_agents) {
            require(a >= 0 && a < c.n_agents, "attack.relay.target_agents ids must be within [0, n_agents)");
        }
        if (at.relay.use_capture_zone) {
            require(at.relay.zone_radius > 0, "attack.relay.zone_radius must be > 0");
        }
    }
    if (at.type == AttackType::sybil) {
        require(at.sybil.bucket_intervals > 0, "attack.sybil.bucket_intervals must be > 0");
        require(at.sybil.accounts_requested >= 0, "attack.sybil.accounts_requested must be >= 0");
        if (!at.sybil.listener_x) at.sybil.listener_x = c.world_width_m / 2.0;
        if (!at.sybil.listener_y) at.sybil.listener_y = c.world_height_m / 2.0;
        require(*at.sybil.listener_x >= 0 && *at.sybil.listener_x <= c.world_width_m &&
                *at.sybil.listener_y >= 0 && *at.sybil.listener_y <= c.world_height_m,
                "attack.sybil listener position must lie inside the world");
    }
}

} // namespace

ScenarioConfig config_from_entries(const FlatConfig& entries) {
    ScenarioConfig cfg;
    for (const auto& [key, value] : entries) {
        if (!assign(cfg, key, value)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& text) {
    return config_from_entries(parse_config_text(text));
}

FlatConfig resolved_entries(const ScenarioConfig& c) {
    FlatConfig out;
    auto add = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };
    add("world_width_m", format_double(c.world_width_m));
    add("world_height_m", format_double(c.world_height_m));
    add("n_agents", std::to_string(c.n_agents));
    add("adoption_fraction", format_double(c.adoption_fraction));
    add("speed_min_mps", format_double(c.speed_min_mps));
    add("speed_max_mps", format_double(c.speed_max_mps));
    add("step_seconds", std::to_string(c.step_seconds));
    add("duration_days", format_double(c.duration_days));
    add("rng_seed", std::to_string(c.rng_seed));
    add("protocol", to_string(c.protocol));
    add("reporting_probability", format_double(c.reporting_probability));
    add("risk.proximity_threshold_m", format_double(c.risk.proximity_threshold_m));
    add("risk.exposure_minutes_threshold", format_double(c.risk.exposure_minutes_threshold));
    add("radio.max_range_m", format_double(c.radio.max_range_m));
    add("radio.rssi_at_1m_db", format_double(c.radio.rssi_at_1m_db));
    add("radio.path_loss_exponent", format_double(c.radio.path_loss_exponent));
    add("radio.noise_sigma_db", format_double(c.radio.noise_sigma_db));
    add("radio.detection_floor_db", format_double(c.radio.detection_floor_db));
    add("radio.trace_receptions", c.radio.trace_receptions ? "true" : "false");
    add("epidemic.p_transmit_per_contact_minute", format_double(c.epidemic.p_transmit_per_contact_minute));
    add("epidemic.infection_radius_m", format_double(c.epidemic.infection_radius_m));
    add("epidemic.incubation_days", format_double(c.epidemic.incubation_days));
    add("epidemic.infectious_days", format_double(c.epidemic.infectious_days));
    add("epidemic.test_delay_days", format_double(c.epidemic.test_delay_days));
    add("epidemic.initial_infected", std::to_string(c.epidemic.initial_infected));
    add("epidemic.seed_agents", format_int_list(c.epidemic.seed_agents));
    add("epidemic.quarantine_compliance", format_double(c.epidemic.quarantine_compliance));
    add("epidemic.quarantine_days", format_double(c.epidemic.quarantine_days));
    add("epidemic.quarantine_transmit_factor", format_double(c.epidemic.quarantine_transmit_factor));
    add("centralised.poll_interval_seconds", std::to_string(c.centralised.poll_interval_seconds));
    add("centralised.per_source_limit", std::to_string(c.centralised.per_source_limit));
    add("centralised.fanout_threshold", std::to_string(c.centralised.fanout_threshold));
    add("centralised.fanout_policy", to_string(c.centralised.fanout_policy));
    add("attack.type", to_string(c.attack.type));
    if (c.attack.type == AttackType::sniffer_grid) {
        add("attack.sniffer.grid_nx", std::to_string(c.attack.sniffer.grid_nx));
        add("attack.sniffer.grid_ny", std::to_string(c.attack.sniffer.grid_ny));
    }
    if (c.attack.type == AttackType::relay || c.attack.type == AttackType::replay_stale) {
        const auto& r = c.attack.relay;
        add("attack.relay.mode", to_string(r.mode));
        add("attack.relay.captured_agents", format_int_list(r.captured_agents));
        add("attack.relay.target_agents", format_int_list(r.target_agents));
        add("attack.relay.latency_ticks", std::to_string(r.latency_ticks));
        add("attack.relay.use_capture_zone", r.use_capture_zone ? "true" : "false");
        if (r.use_capture_zone) {
            add("attack.relay.zone_x", format_double(r.zone_x));
            add("attack.relay.zone_y", format_double(r.zone_y));
            add("attack.relay.zone_radius", format_double(r.zone_radius));
        }
        add("attack.relay.blacklist_captured", r.blacklist_captured ? "true" : "false");
        add("attack.relay.stale_delay_ticks", std::to_string(r.stale_delay_ticks));
    }
    if (c.attack.type == AttackType::sybil) {
        const auto& s = c.attack.sybil;
        if (s.listener_x) add("attack.sybil.listener_x", format_double(*s.listener_x));
        if (s.listener_y) add("attack.sybil.listener_y", format_double(*s.listener_y));
        add("attack.sybil.bucket_intervals", std::to_string(s.bucket_intervals));
        add("attack.sybil.accounts_requested", std::to_string(s.accounts_requested));
    }
    return out;
}

std::string resolved_config_text(const ScenarioConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : resolved_entries(cfg)) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

} // namespace ctsim
