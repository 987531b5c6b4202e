#ifndef CTSIM_EXPOSURE_HPP
#define CTSIM_EXPOSURE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ctsim/config.hpp"
#include "ctsim/contact_store.hpp"
#include "ctsim/radio.hpp"

namespace ctsim {

// Ground-truth label used only for scoring; protocol logic never reads it.
enum class NotificationCause : uint8_t { true_contact, relay_attack, replay_attack };

std::string to_string(NotificationCause c);

struct ExposureNotification {
    int agent_id = -1;
    int64_t trigger_tick = 0;
    double risk_score = 0.0; // minutes of close contact
    NotificationCause cause = NotificationCause::true_contact;
    int64_t report_tick = 0; // when the diagnosis report behind it was filed
    bool held = false;       // retained by centralised oversight, not delivered
};

// Risk minutes split by sample provenance. The split exists for scoring;
// the protocol decision uses total() only.
struct RiskBreakdown {
    double genuine_minutes = 0.0;
    double relay_minutes = 0.0;
    double replay_minutes = 0.0;

    double total() const { return genuine_minutes + relay_minutes + replay_minutes; }

    NotificationCause cause(double exposure_minutes_threshold) const {
        if (genuine_minutes >= exposure_minutes_threshold) return NotificationCause::true_contact;
        return relay_minutes >= replay_minutes ? NotificationCause::relay_attack
                                               : NotificationCause::replay_attack;
    }
};

// The risk factor: minutes of contact whose estimated distance is at or
// below the proximity threshold, summed across the given records.
RiskBreakdown compute_risk(const std::vector<const ContactRecord*>& records,
                           const RadioParams& radio, const RiskParams& risk,
                           double minutes_per_tick);

} // namespace ctsim

#endif
