#ifndef CTSIM_CONFIG_HPP
#define CTSIM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/errors.hpp"

namespace ctsim {

enum class ProtocolFamily { decentralised, centralised };
enum class AttackType { none, sniffer_grid, relay, replay_stale, sybil };
enum class RelayMode { close_by_relay, remote_satellite };
enum class FanoutPolicy { release, suppress };

std::string to_string(ProtocolFamily f);
std::string to_string(AttackType t);
std::string to_string(RelayMode m);
std::string to_string(FanoutPolicy p);

// Log-distance path loss channel. Defaults model the outdoor case
// (50 m maximum range); indoor scenarios set max_range_m = 25.
struct RadioParams {
    double max_range_m = 50.0;
    double rssi_at_1m_db = -55.0;
    double path_loss_exponent = 2.0;
    double noise_sigma_db = 3.0;
    double detection_floor_db = -95.0;
    bool trace_receptions = false;
};

struct EpidemicParams {
    double p_transmit_per_contact_minute = 0.05;
    double infection_radius_m = 2.0;
    double incubation_days = 3.0;
    double infectious_days = 7.0;
    double test_delay_days = 2.0;
    int initial_infected = 1;
    std::vector<int> seed_agents; // explicit initially-infectious agents; overrides initial_infected
    double quarantine_compliance = 1.0;
    double quarantine_days = 14.0;
    double quarantine_transmit_factor = 0.0;
};

// Knobs of the risk factor: minutes of contact at close estimated range.
struct RiskParams {
    double proximity_threshold_m = 2.0;
    double exposure_minutes_threshold = 15.0;
};

struct CentralisedParams {
    int poll_interval_seconds = 3600;
    int per_source_limit = 5;
    int fanout_threshold = 100;
    FanoutPolicy fanout_policy = FanoutPolicy::release;
};

struct SnifferGridConfig {
    int grid_nx = 20;
    int grid_ny = 20;
};

struct RelayAttackConfig {
    RelayMode mode = RelayMode::close_by_relay;
    std::vector<int> captured_agents;  // "Alice": agents whose broadcasts are captured
    std::vector<int> target_agents;    // victims near the replaying device
    int latency_ticks = 1;
    bool use_capture_zone = false;     // capture anyone inside the zone instead
    double zone_x = 0.0, zone_y = 0.0, zone_radius = 0.0;
    bool blacklist_captured = false;   // countermeasure drill: blacklist relayed EIDs
    int stale_delay_ticks = 0;         // replay_stale: extra delay before re-broadcast
};

struct SybilAttackConfig {
    std::optional<double> listener_x;  // defaults to world centre
    std::optional<double> listener_y;
    int bucket_intervals = 1;          // bucket granularity in 15-min intervals
    int accounts_requested = 100;      // centralised: registration attempts from one source
};

struct AttackConfig {
    AttackType type = AttackType::none;
    SnifferGridConfig sniffer;
    RelayAttackConfig relay;
    SybilAttackConfig sybil;
};

struct ScenarioConfig {
    // required keys
    double world_width_m = 0.0;
    double world_height_m = 0.0;
    int n_agents = -1;

    double adoption_fraction = 0.8;
    double speed_min_mps = 0.5;
    double speed_max_mps = 2.0;
    int step_seconds = 60;
    double duration_days = 14.0;
    uint64_t rng_seed = 1;
    ProtocolFamily protocol = ProtocolFamily::decentralised;
    double reporting_probability = 1.0;

    RiskParams risk;
    RadioParams radio;
    EpidemicParams epidemic;
    CentralisedParams centralised;
    AttackConfig attack;

    int64_t total_ticks() const {
        return static_cast<int64_t>(duration_days * kSecondsPerDay) / step_seconds;
    }
    SimClock make_clock() const { return SimClock{0, step_seconds}; }
};

// One key=value assignment with stable ordering, as parsed or resolved.
using FlatConfig = std::vector<std::pair<std::string, std::string>>;

// Parses the flat key-value scenario format ('#' comments, blank lines
// allowed). Throws ConfigError on malformed lines or duplicate keys.
FlatConfig parse_config_text(const std::string& text);

// Builds a validated ScenarioConfig from parsed assignments. Unknown keys
// and violated invariants raise ConfigError naming the offending key.
ScenarioConfig load_scenario(const std::string& text);
ScenarioConfig config_from_entries(const FlatConfig& entries);

// Applies dotted-key overrides (--set key=value) on top of parsed entries.
void apply_override(FlatConfig& entries, const std::string& key, const std::string& value);

// Full resolved key set in canonical order, defaults included. Reloading
// the emitted text yields an identical configuration.
FlatConfig resolved_entries(const ScenarioConfig& cfg);
std::string resolved_config_text(const ScenarioConfig& cfg);

} // namespace ctsim

#endif
