#include "doctest.h"

#include <string>

#include "ctsim/config.hpp"
#include "ctsim/errors.hpp"

using namespace ctsim;

TEST_CASE("minimal document gets documented defaults") {
    ScenarioConfig cfg = load_scenario("world_width_m = 100\nworld_height_m = 100\nn_agents = 10\n");
    CHECK(cfg.world_width_m == 100.0);
    CHECK(cfg.n_agents == 10);
    CHECK(cfg.adoption_fraction == 0.8);
    CHECK(cfg.step_seconds == 60);
    CHECK(cfg.duration_days == 14.0);
    CHECK(cfg.protocol == ProtocolFamily::decentralised);
    CHECK(cfg.radio.max_range_m == 50.0);
    CHECK(cfg.radio.rssi_at_1m_db == -55.0);
    CHECK(cfg.risk.proximity_threshold_m == 2.0);
    CHECK(cfg.risk.exposure_minutes_threshold == 15.0);
    CHECK(cfg.epidemic.infection_radius_m == 2.0);
    CHECK(cfg.centralised.poll_interval_seconds == 3600);
    CHECK(cfg.centralised.fanout_threshold == 100);
    CHECK(cfg.attack.type == AttackType::none);
}

TEST_CASE("bound violation names the key") {
    std::string doc = "world_width_m = 100\nworld_height_m = 100\nn_agents = 10\n"
                      "adoption_fraction = 1.5\n";
    CHECK_THROWS_WITH_AS(load_scenario(doc),
                         "invalid scenario: adoption_fraction must be within [0, 1]",
                         ConfigError);
}

TEST_CASE("Fig. 5 scenario values echo back") {
    std::string doc = "world_width_m = 1500\nworld_height_m = 1500\nn_agents = 300\n"
                      "attack.type = sniffer_grid\n";
    ScenarioConfig cfg = load_scenario(doc);
    CHECK(cfg.world_width_m == 1500.0);
    CHECK(cfg.world_height_m == 1500.0);
    CHECK(cfg.n_agents == 300);
    // 20x20 grid = the 400 sniffing devices of the figure
    CHECK(cfg.attack.sniffer.grid_nx * cfg.attack.sniffer.grid_ny == 400);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(load_scenario("world_width_m 100\n"), ConfigError);
    CHECK_THROWS_AS(load_scenario("= 3\n"), ConfigError);
    CHECK_THROWS_AS(load_scenario("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(load_scenario("bad-key! = 1\n"), ConfigError);
}

TEST_CASE("unknown key is rejected by name") {
    try {
        load_scenario("world_width_m = 1\nworld_height_m = 1\nn_agents = 1\nnope = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("nope") != std::string::npos);
    }
}

TEST_CASE("step_seconds must divide the rotation period") {
    std::string doc = "world_width_m = 100\nworld_height_m = 100\nn_agents = 1\n"
                      "step_seconds = 70\n";
    CHECK_THROWS_AS(load_scenario(doc), ConfigError);
    // and valid divisors pass
    for (int step : {1, 60, 300, 900}) {
        ScenarioConfig cfg = load_scenario(
            "world_width_m = 100\nworld_height_m = 100\nn_agents = 1\nstep_seconds = " +
            std::to_string(step) + "\n");
        CHECK(cfg.step_seconds == step);
    }
}

TEST_CASE("speed bounds validated") {
    std::string doc = "world_width_m = 100\nworld_height_m = 100\nn_agents = 1\n"
                      "speed_min_mps = 3\nspeed_max_mps = 1\n";
    CHECK_THROWS_AS(load_scenario(doc), ConfigError);
}

TEST_CASE("comments and blank lines are fine") {
    ScenarioConfig cfg = load_scenario(
        "# scenario\n\nworld_width_m = 50 # inline\nworld_height_m = 50\nn_agents = 3\n");
    CHECK(cfg.n_agents == 3);
}

TEST_CASE("overrides replace or append") {
    FlatConfig entries = parse_config_text(
        "world_width_m = 100\nworld_height_m = 100\nn_agents = 10\n");
    apply_override(entries, "n_agents", "20");
    apply_override(entries, "rng_seed", "9");
    ScenarioConfig cfg = config_from_entries(entries);
    CHECK(cfg.n_agents == 20);
    CHECK(cfg.rng_seed == 9);
}

TEST_CASE("resolved config round-trips exactly") {
    std::string doc = "world_width_m = 123.5\nworld_height_m = 77\nn_agents = 42\n"
                      "protocol = centralised\nattack.type = relay\n"
                      "attack.relay.captured_agents = 0\nattack.relay.target_agents = 1,2\n";
    ScenarioConfig cfg = load_scenario(doc);
    std::string text = resolved_config_text(cfg);
    ScenarioConfig back = load_scenario(text);
    CHECK(resolved_config_text(back) == text);
    CHECK(back.attack.relay.target_agents == std::vector<int>{1, 2});
}

TEST_CASE("relay attack config needs targets") {
    std::string doc = "world_width_m = 100\nworld_height_m = 100\nn_agents = 10\n"
                      "attack.type = relay\nattack.relay.captured_agents = 0\n";
    CHECK_THROWS_AS(load_scenario(doc), ConfigError);
}

TEST_CASE("sybil listener defaults to the world centre") {
    std::string doc = "world_width_m = 200\nworld_height_m = 100\nn_agents = 10\n"
                      "attack.type = sybil\n";
    ScenarioConfig cfg = load_scenario(doc);
    CHECK(cfg.attack.sybil.listener_x.value() == 100.0);
    CHECK(cfg.attack.sybil.listener_y.value() == 50.0);
}
