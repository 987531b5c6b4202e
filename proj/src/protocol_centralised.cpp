#include "ctsim/protocol_centralised.hpp"

#include <algorithm>

#include "ctsim/errors.hpp"

namespace ctsim {

CentralisedServer::CentralisedServer(const CentralisedParams& params, const RiskParams& risk,
                                     const RadioParams& radio, Rng master_stream)
    : params_(params), risk_(risk), radio_(radio) {
    for (int i = 0; i < 2; ++i) {
        uint64_t word = master_stream.next_u64();
        for (int b = 0; b < 8; ++b) {
            master_secret_[i * 8 + b] = static_cast<uint8_t>(word >> (8 * b));
        }
    }
}

std::optional<Pseudonym> CentralisedServer::register_user(int agent_id,
                                                          const RegistrationChallenge& challenge) {
    if (!challenge.token_valid) {
        ++rejected_challenges_;
        return std::nullopt;
    }
    int& count = source_counts_[challenge.source_id];
    if (count >= params_.per_source_limit) {
        ++rejected_rate_limited_;
        return std::nullopt;
    }
    ++count;
    Pseudonym p = next_pseudonym_++;
    registrations_.emplace(p, agent_id);
    return p;
}

const std::array<EphemeralId, kIntervalsPerDay>& CentralisedServer::issue_ids(Pseudonym p,
                                                                              int64_t day) {
    if (!registrations_.count(p)) {
        throw InvariantViolation("issue_ids: unknown pseudonym " + std::to_string(p));
    }
    auto key = std::make_pair(p, day);
    auto it = issued_.find(key);
    if (it != issued_.end()) return it->second;

    // Deterministic keyed derivation keeps reissue idempotent.
    std::array<uint8_t, 16> pseudonym_key =
        prf16(master_secret_, "ctsim-server-pseudonym", static_cast<uint64_t>(p));
    DiagnosisKey day_key;
    day_key.day_index = day;
    day_key.key_bytes = prf16(pseudonym_key, "ctsim-server-day", static_cast<uint64_t>(day));

    std::array<EphemeralId, kIntervalsPerDay> ids{};
    for (int i = 0; i < kIntervalsPerDay; ++i) {
        ids[i] = derive_ephemeral_id(day_key, i);
        eid_index_.emplace(ids[i], std::make_pair(p, day * kIntervalsPerDay + i));
    }
    return issued_.emplace(key, ids).first->second;
}

CentralisedServer::ReportOutcome CentralisedServer::report_received_list(
    Pseudonym reporter, const ContactStore& received, const SimClock& clock) {
    ReportOutcome outcome;
    if (reported_.count(reporter)) return outcome; // duplicate rejected
    reported_.insert(reporter);
    outcome.accepted = true;

    // Resolve the received EIDs to pseudonyms, keeping first-evidence order.
    std::vector<Pseudonym> order;
    std::map<Pseudonym, std::vector<const ContactRecord*>> evidence;
    for (const ContactRecord& rec : received.records()) {
        if (blacklist_.count(rec.eid)) {
            ++outcome.blacklisted;
            continue;
        }
        auto it = eid_index_.find(rec.eid);
        if (it == eid_index_.end()) {
            ++outcome.unresolvable;
            continue;
        }
        auto [contact, valid_interval] = it->second;
        if (rec.interval_index != valid_interval) {
            ++outcome.stale_rejected; // replayed outside the EID's validity
            continue;
        }
        if (contact == reporter) continue;
        auto [ev_it, fresh] = evidence.try_emplace(contact);
        if (fresh) order.push_back(contact);
        ev_it->second.push_back(&rec);
    }

    outcome.resolved_contacts = static_cast<int>(order.size());
    for (Pseudonym contact : order) {
        social_edges_.emplace(reporter, contact);
        RiskBreakdown breakdown =
            compute_risk(evidence[contact], radio_, risk_, clock.minutes_per_tick());
        if (breakdown.total() < risk_.exposure_minutes_threshold) continue;
        PendingFlag flag;
        flag.pseudonym = contact;
        flag.risk_minutes = breakdown.total();
        flag.cause = breakdown.cause(risk_.exposure_minutes_threshold);
        flag.flag_tick = clock.tick;
        flag.report_tick = clock.tick;
        flag.held = false;
        flag.delivered = false;
        outcome.flagged.push_back(contact);
        flags_.push_back(flag);
        flags_by_pseudonym_[contact].push_back(flags_.size() - 1);
    }

    // Pandemic oversight: one report fanning out to anomalously many
    // notifications trips an alert; the excess beyond the threshold is
    // held for review and, under the suppress policy, never delivered.
    int fanout = static_cast<int>(outcome.flagged.size());
    if (fanout > params_.fanout_threshold) {
        ++alerts_;
        outcome.alert = true;
        if (params_.fanout_policy == FanoutPolicy::suppress) {
            int excess = fanout - params_.fanout_threshold;
            size_t base = flags_.size() - static_cast<size_t>(fanout);
            for (int i = params_.fanout_threshold; i < fanout; ++i) {
                flags_[base + static_cast<size_t>(i)].held = true;
            }
            outcome.held = excess;
            held_total_ += excess;
        }
    }
    return outcome;
}

std::vector<ExposureNotification> CentralisedServer::poll_status(Pseudonym p, int agent_id,
                                                                 const SimClock& clock) {
    std::vector<ExposureNotification> out;
    auto it = flags_by_pseudonym_.find(p);
    if (it == flags_by_pseudonym_.end()) return out;
    for (size_t idx : it->second) {
        PendingFlag& flag = flags_[idx];
        if (flag.delivered || flag.held) continue;
        flag.delivered = true;
        ExposureNotification n;
        n.agent_id = agent_id;
        n.trigger_tick = clock.tick;
        n.risk_score = flag.risk_minutes;
        n.cause = flag.cause;
        n.report_tick = flag.report_tick;
        out.push_back(n);
    }
    return out;
}

void CentralisedServer::blacklist_ids(const std::vector<EphemeralId>& eids) {
    blacklist_.insert(eids.begin(), eids.end());
}

PrivacyLedger CentralisedServer::ledger() const {
    PrivacyLedger ledger;
    ledger.health_status_entries = static_cast<int64_t>(reported_.size());
    ledger.social_graph_edges = static_cast<int64_t>(social_edges_.size());
    ledger.location_observations = 0; // proximity protocol: the server sees no locations
    return ledger;
}

void CentralisedDevice::begin_day(CentralisedServer& server, const SimClock& clock) {
    int64_t day = clock.day_index();
    if (ids_day_ != day) {
        day_ids_ = server.issue_ids(pseudonym_, day);
        ids_day_ = day;
    }
    store_.prune(clock.tick, clock.retention_ticks());
}

const EphemeralId& CentralisedDevice::current_eid(const SimClock& clock) const {
    return day_ids_[static_cast<size_t>(clock.interval_in_day())];
}

void CentralisedDevice::on_reception(const EphemeralId& eid, const SimClock& clock,
                                     double rssi_db, SampleOrigin origin) {
    store_.add(eid, clock.interval_index(), clock.tick, rssi_db, origin);
}

} // namespace ctsim
