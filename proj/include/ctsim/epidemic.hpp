#ifndef CTSIM_EPIDEMIC_HPP
#define CTSIM_EPIDEMIC_HPP

#include <cstdint>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/config.hpp"
#include "ctsim/exposure.hpp"
#include "ctsim/rng.hpp"
#include "ctsim/world.hpp"

namespace ctsim {

// Ground-truth proximity event: agents a < b were within the infection
// radius at this tick, app or no app. Logged independently of any
// protocol; it is the oracle for matching equivalence.
struct ContactEvent {
    int64_t tick = 0;
    int a = 0;
    int b = 0;
};

struct StageCounts {
    int susceptible = 0;
    int exposed = 0;
    int infectious = 0;
    int diagnosed = 0;
    int recovered = 0;

    int total() const { return susceptible + exposed + infectious + diagnosed + recovered; }
};

StageCounts count_stages(const World& world);

// Contact-driven SEIR-style disease with deterministic stage durations.
// Infection uses true distance only, never radio receptions, so
// non-adopters infect and get infected like everyone else.
class EpidemicModel {
public:
    EpidemicModel(const ScenarioConfig& cfg, const RngStreams& streams);

    // Marks the initially infectious agents (explicit list or seeded draw).
    void seed_initial(World& world);

    // Logs ground-truth contacts for this tick and draws transmissions.
    void transmit_step(World& world, const SpatialGrid& grid, const SimClock& clock,
                       std::vector<ContactEvent>& contact_log);

    // Stage progression; returns agents newly diagnosed this tick.
    // Diagnosed agents always quarantine.
    std::vector<int> progress_and_diagnose(World& world, const SimClock& clock);

    // Notified agents quarantine with probability quarantine_compliance.
    void apply_quarantine(World& world, const std::vector<ExposureNotification>& delivered,
                          const SimClock& clock);

    int ever_infected() const { return ever_infected_; }

private:
    EpidemicParams params_;
    int64_t incubation_ticks_;
    int64_t infectious_ticks_;
    int64_t test_delay_ticks_;
    int64_t quarantine_ticks_;
    double p_transmit_per_tick_;
    std::vector<int> seed_agents_;
    std::vector<Rng> infection_rng_;  // per-agent draws, susceptible side
    std::vector<Rng> compliance_rng_; // per-agent quarantine compliance draws
    int ever_infected_ = 0;
};

} // namespace ctsim

#endif
