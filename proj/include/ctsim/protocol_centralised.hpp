#ifndef CTSIM_PROTOCOL_CENTRALISED_HPP
#define CTSIM_PROTOCOL_CENTRALISED_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/config.hpp"
#include "ctsim/contact_store.hpp"
#include "ctsim/crypto.hpp"
#include "ctsim/exposure.hpp"

namespace ctsim {

using Pseudonym = int;

// Stand-in for ROBERT's CAPTCHA: a token plus a per-source rate limit.
// The effect (sybil friction) is modeled, not the mechanism.
struct RegistrationChallenge {
    int source_id = 0;
    bool token_valid = true;
};

struct PrivacyLedger {
    int64_t health_status_entries = 0;
    int64_t social_graph_edges = 0;
    int64_t location_observations = 0;
};

// The central backend of the ROBERT-style flow. It issues every ephemeral
// identifier, links them to long-term pseudonyms, performs the matching on
// uploaded *received* lists, and exercises oversight over notifications.
class CentralisedServer {
public:
    CentralisedServer(const CentralisedParams& params, const RiskParams& risk,
                      const RadioParams& radio, Rng master_stream);

    // nullopt on challenge failure or rate limit; both are counted.
    std::optional<Pseudonym> register_user(int agent_id, const RegistrationChallenge& challenge);

    // 96 fresh identifiers for one day, recorded in the issuance table.
    // Idempotent per (pseudonym, day). Throws on an unknown pseudonym.
    const std::array<EphemeralId, kIntervalsPerDay>& issue_ids(Pseudonym p, int64_t day);

    struct ReportOutcome {
        bool accepted = false;           // false on duplicate report
        std::vector<Pseudonym> flagged;  // risk threshold met, in evidence order
        int resolved_contacts = 0;       // distinct pseudonyms seen in the list
        int unresolvable = 0;            // EIDs the server never issued
        int stale_rejected = 0;          // EIDs heard outside their validity interval
        int blacklisted = 0;
        bool alert = false;              // mass-notification oversight tripped
        int held = 0;                    // notifications withheld under suppress policy
    };

    // Fig. 3 step 3: the diagnosed user uploads the list of *received*
    // identifiers; the server resolves them against the issuance table,
    // flags exposed pseudonyms, and runs mass-notification detection.
    ReportOutcome report_received_list(Pseudonym reporter, const ContactStore& received,
                                       const SimClock& clock);

    // Fig. 3 steps 4-6: delivers pending exposure notifications for the
    // polling pseudonym. agent_id only labels the returned notification.
    std::vector<ExposureNotification> poll_status(Pseudonym p, int agent_id,
                                                  const SimClock& clock);

    // Oversight countermeasure: blacklisted EIDs stop resolving.
    void blacklist_ids(const std::vector<EphemeralId>& eids);

    PrivacyLedger ledger() const;
    int64_t alerts() const { return alerts_; }
    int64_t held_notifications() const { return held_total_; }
    int64_t rejected_challenges() const { return rejected_challenges_; }
    int64_t rejected_rate_limited() const { return rejected_rate_limited_; }
    size_t registered_count() const { return registrations_.size(); }
    int64_t issuance_entries() const { return static_cast<int64_t>(eid_index_.size()); }
    const std::set<std::pair<Pseudonym, Pseudonym>>& social_edges() const { return social_edges_; }

private:
    struct PendingFlag {
        Pseudonym pseudonym;
        double risk_minutes;
        NotificationCause cause;
        int64_t flag_tick;
        int64_t report_tick;
        bool held;
        bool delivered;
    };

    CentralisedParams params_;
    RiskParams risk_;
    RadioParams radio_;
    std::array<uint8_t, 16> master_secret_{};

    std::map<Pseudonym, int> registrations_; // pseudonym -> registered agent
    std::map<int, int> source_counts_;
    Pseudonym next_pseudonym_ = 0;

    std::map<std::pair<Pseudonym, int64_t>, std::array<EphemeralId, kIntervalsPerDay>> issued_;
    std::unordered_map<EphemeralId, std::pair<Pseudonym, int64_t>, EphemeralIdHash> eid_index_;
    std::set<EphemeralId> blacklist_;

    std::set<Pseudonym> reported_;
    std::set<std::pair<Pseudonym, Pseudonym>> social_edges_;
    std::vector<PendingFlag> flags_;
    std::map<Pseudonym, std::vector<size_t>> flags_by_pseudonym_;

    int64_t alerts_ = 0;
    int64_t held_total_ = 0;
    int64_t rejected_challenges_ = 0;
    int64_t rejected_rate_limited_ = 0;
};

// Device-side state in the centralised flow: server-issued identifiers for
// the current day plus the received-contact store.
class CentralisedDevice {
public:
    CentralisedDevice(int agent_id, Pseudonym pseudonym)
        : agent_id_(agent_id), pseudonym_(pseudonym) {}

    int agent_id() const { return agent_id_; }
    Pseudonym pseudonym() const { return pseudonym_; }

    void begin_day(CentralisedServer& server, const SimClock& clock);
    const EphemeralId& current_eid(const SimClock& clock) const;

    void on_reception(const EphemeralId& eid, const SimClock& clock, double rssi_db,
                      SampleOrigin origin);

    bool has_reported() const { return reported_; }
    void mark_reported() { reported_ = true; }

    ContactStore& store() { return store_; }
    const ContactStore& store() const { return store_; }

private:
    int agent_id_;
    Pseudonym pseudonym_;
    std::array<EphemeralId, kIntervalsPerDay> day_ids_{};
    int64_t ids_day_ = -1;
    ContactStore store_;
    bool reported_ = false;
};

} // namespace ctsim

#endif
