#ifndef CTSIM_SIMULATION_HPP
#define CTSIM_SIMULATION_HPP

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ctsim/attacks.hpp"
#include "ctsim/clock.hpp"
#include "ctsim/config.hpp"
#include "ctsim/epidemic.hpp"
#include "ctsim/protocol_centralised.hpp"
#include "ctsim/protocol_decentralised.hpp"
#include "ctsim/radio.hpp"
#include "ctsim/world.hpp"

namespace ctsim {

// Common face of the two protocol families inside the event loop.
class ProtocolEngine {
public:
    virtual ~ProtocolEngine() = default;

    // Day-boundary housekeeping: key generation / issuance and pruning.
    virtual void begin_day(const SimClock& clock) = 0;

    // Start-of-tick deliveries (decentralised 24h batch matching).
    virtual std::vector<ExposureNotification> begin_tick(const SimClock& clock) = 0;

    virtual const EphemeralId* current_eid(int agent, const SimClock& clock) = 0;

    virtual void deliver_reception(int receiver, const EphemeralId& eid, const SimClock& clock,
                                   double rssi_db, SampleOrigin origin) = 0;

    // Files the diagnosis report for an agent (consent already sampled).
    // Returns a report id, or -1 when the agent has no working device.
    virtual int report_diagnosis(int agent, const SimClock& clock) = 0;

    // End-of-tick deliveries (centralised polls).
    virtual std::vector<ExposureNotification> end_tick(const SimClock& clock) = 0;

    virtual void add_blacklist(const std::vector<EphemeralId>& eids) = 0;

    virtual PrivacyLedger ledger() const = 0;
    virtual int64_t oversight_alerts() const { return 0; }
    virtual int64_t held_notifications() const { return 0; }
    virtual int64_t report_count() const = 0;
    virtual int max_upload_keys() const { return 0; }

    // Decentralised only: the attacker-visible key publication.
    virtual const std::vector<DiagnosisUpload>* published_uploads() const { return nullptr; }
};

struct ReportEvent {
    int64_t tick = 0;
    int agent = -1;
    int report_id = -1;
};

struct TimeseriesRow {
    int64_t tick = 0;
    StageCounts stages;
    int64_t diagnosed_cum = 0;
    int quarantined = 0;
};

struct SybilResult {
    std::vector<SybilListener::Attribution> attributions;
    int reidentified_victims = 0;     // distinct uploads uniquely attributed
    int accounts_granted = 0;         // centralised registration flood
    int accounts_denied = 0;
    std::map<int64_t, std::set<int>> gt_agents_by_bucket; // oracle input
    std::map<int, int> upload_reporter;                    // oracle input
};

struct AttackResult {
    AttackType type = AttackType::none;
    int64_t injected_receptions = 0;
    int64_t attack_notifications = 0; // delivered with an attack cause
    int64_t oversight_alerts = 0;
    std::vector<EphemeralId> captured_eids;
    std::vector<ReconstructedTrack> tracks;
    double max_track_position_error_m = 0.0;
    bool track_points_within_range = true;
    std::optional<SybilResult> sybil;
};

struct RunResult {
    ScenarioConfig cfg;
    int64_t final_tick = 0;

    std::vector<ExposureNotification> notifications; // delivered, in delivery order
    std::vector<ReportEvent> reports;
    std::vector<ContactEvent> contacts;
    std::vector<TimeseriesRow> timeseries;
    std::vector<uint8_t> has_app; // per agent

    PrivacyLedger ledger;
    int64_t oversight_alerts = 0;
    int64_t held_notifications = 0;

    int ever_infected = 0;
    double attack_rate = 0.0;
    int peak_infectious = 0;
    double quarantine_person_days = 0.0;

    int64_t reception_count = 0;
    int max_upload_keys = 0;
    int64_t report_count = 0;

    std::optional<AttackResult> attack;
    std::vector<Reception> reception_trace; // only when radio.trace_receptions
};

// One deterministic run: same config (including seed) in, bit-identical
// event logs out.
class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg);

    RunResult run();

private:
    ScenarioConfig cfg_;
};

} // namespace ctsim

#endif
