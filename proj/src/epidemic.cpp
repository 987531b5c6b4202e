#include "ctsim/epidemic.hpp"

#include <algorithm>
#include <cmath>

#include "ctsim/errors.hpp"

namespace ctsim {

StageCounts count_stages(const World& world) {
    StageCounts c;
    for (const Agent& a : world.agents()) {
        switch (a.health.stage) {
            case Stage::Susceptible: ++c.susceptible; break;
            case Stage::Exposed: ++c.exposed; break;
            case Stage::Infectious: ++c.infectious; break;
            case Stage::Diagnosed: ++c.diagnosed; break;
            case Stage::Recovered: ++c.recovered; break;
        }
    }
    return c;
}

EpidemicModel::EpidemicModel(const ScenarioConfig& cfg, const RngStreams& streams)
    : params_(cfg.epidemic) {
    auto days_to_ticks = [&](double days) {
        return static_cast<int64_t>(std::llround(days * kSecondsPerDay / cfg.step_seconds));
    };
    incubation_ticks_ = days_to_ticks(params_.incubation_days);
    infectious_ticks_ = days_to_ticks(params_.infectious_days);
    test_delay_ticks_ = days_to_ticks(params_.test_delay_days);
    quarantine_ticks_ = days_to_ticks(params_.quarantine_days);

    double minutes_per_tick = cfg.step_seconds / 60.0;
    p_transmit_per_tick_ =
        1.0 - std::pow(1.0 - params_.p_transmit_per_contact_minute, minutes_per_tick);

    if (!params_.seed_agents.empty()) {
        seed_agents_ = params_.seed_agents;
    } else if (params_.initial_infected > 0) {
        Rng pick = streams.make("epidemic-init");
        std::vector<int> order(cfg.n_agents);
        for (int i = 0; i < cfg.n_agents; ++i) order[i] = i;
        for (int i = cfg.n_agents - 1; i > 0; --i) {
            int j = static_cast<int>(pick.uniform_index(static_cast<uint64_t>(i) + 1));
            std::swap(order[i], order[j]);
        }
        seed_agents_.assign(order.begin(), order.begin() + params_.initial_infected);
        std::sort(seed_agents_.begin(), seed_agents_.end());
    }

    infection_rng_.reserve(cfg.n_agents);
    compliance_rng_.reserve(cfg.n_agents);
    for (int i = 0; i < cfg.n_agents; ++i) {
        infection_rng_.push_back(streams.make("epidemic", static_cast<uint64_t>(i)));
        compliance_rng_.push_back(streams.make("compliance", static_cast<uint64_t>(i)));
    }
}

void EpidemicModel::seed_initial(World& world) {
    for (int id : seed_agents_) {
        Agent& a = world.agents().at(static_cast<size_t>(id));
        a.health.stage = Stage::Infectious;
        a.health.exposed_at = 0;
        a.health.infectious_at = 0;
        ++ever_infected_;
    }
}

void EpidemicModel::transmit_step(World& world, const SpatialGrid& grid, const SimClock& clock,
                                  std::vector<ContactEvent>& contact_log) {
    auto& agents = world.agents();

    auto transmissible = [&](const Agent& a) {
        return a.health.stage == Stage::Infectious || a.health.stage == Stage::Diagnosed;
    };

    // Log ground-truth contacts (all pairs within the radius) and collect
    // infectious neighbours per susceptible agent, in id order.
    std::vector<int> newly_exposed;
    for (Agent& a : agents) {
        std::vector<int> infectious_neighbours;
        grid.for_each_within(a.pos, params_.infection_radius_m, agents, [&](int j) {
            if (j == a.id) return;
            if (j > a.id) contact_log.push_back({clock.tick, a.id, j});
            if (a.health.stage == Stage::Susceptible && transmissible(agents[j])) {
                infectious_neighbours.push_back(j);
            }
        });
        if (infectious_neighbours.empty()) continue;
        std::sort(infectious_neighbours.begin(), infectious_neighbours.end());
        Rng& rng = infection_rng_[a.id];
        for (int j : infectious_neighbours) {
            double p = p_transmit_per_tick_;
            if (agents[j].quarantined) p *= params_.quarantine_transmit_factor;
            if (rng.bernoulli(p)) {
                newly_exposed.push_back(a.id);
                break;
            }
        }
    }
    for (int id : newly_exposed) {
        Agent& a = agents[static_cast<size_t>(id)];
        a.health.stage = Stage::Exposed;
        a.health.exposed_at = clock.tick;
        ++ever_infected_;
    }
}

std::vector<int> EpidemicModel::progress_and_diagnose(World& world, const SimClock& clock) {
    std::vector<int> diagnosed;
    for (Agent& a : world.agents()) {
        HealthState& h = a.health;
        if (h.stage == Stage::Exposed && clock.tick - h.exposed_at >= incubation_ticks_) {
            h.stage = Stage::Infectious;
            h.infectious_at = clock.tick;
        }
        if ((h.stage == Stage::Infectious || h.stage == Stage::Diagnosed) &&
            clock.tick - h.infectious_at >= infectious_ticks_) {
            h.stage = Stage::Recovered;
            if (a.quarantined && a.quarantine_until < 0) a.quarantined = false;
            continue;
        }
        if (h.stage == Stage::Infectious && clock.tick - h.infectious_at >= test_delay_ticks_) {
            h.stage = Stage::Diagnosed;
            h.diagnosed_at = clock.tick;
            a.quarantined = true;       // diagnosed agents always quarantine
            a.quarantine_until = -1;    // until recovery
            diagnosed.push_back(a.id);
        }
        // release notified quarantines that ran out
        if (a.quarantined && a.quarantine_until >= 0 && clock.tick >= a.quarantine_until) {
            a.quarantined = false;
            a.quarantine_until = -1;
        }
    }
    return diagnosed;
}

void EpidemicModel::apply_quarantine(World& world, const std::vector<ExposureNotification>& delivered,
                                     const SimClock& clock) {
    for (const ExposureNotification& n : delivered) {
        Agent& a = world.agents().at(static_cast<size_t>(n.agent_id));
        if (!compliance_rng_[a.id].bernoulli(params_.quarantine_compliance)) continue;
        if (a.quarantined && a.quarantine_until < 0) continue; // already isolating until recovery
        int64_t until = clock.tick + quarantine_ticks_;
        a.quarantined = true;
        a.quarantine_until = std::max(a.quarantine_until, until);
    }
}

} // namespace ctsim
