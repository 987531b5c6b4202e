#include "ctsim/contact_store.hpp"

#include <algorithm>

#include "ctsim/errors.hpp"
#include "ctsim/exposure.hpp"

namespace ctsim {

std::string to_string(NotificationCause c) {
    switch (c) {
        case NotificationCause::true_contact: return "true_contact";
        case NotificationCause::relay_attack: return "relay_attack";
        case NotificationCause::replay_attack: return "replay_attack";
    }
    return "true_contact";
}

void ContactStore::add(const EphemeralId& eid, int64_t interval_index, int64_t tick,
                       double rssi_db, SampleOrigin origin) {
    Key key{eid, interval_index};
    auto it = index_.find(key);
    if (it == index_.end()) {
        ContactRecord rec;
        rec.eid = eid;
        rec.interval_index = interval_index;
        rec.first_tick = rec.last_tick = tick;
        rec.samples.push_back({tick, static_cast<float>(rssi_db), origin});
        index_.emplace(key, records_.size());
        records_.push_back(std::move(rec));
        return;
    }
    ContactRecord& rec = records_[it->second];
    rec.first_tick = std::min(rec.first_tick, tick);
    rec.last_tick = std::max(rec.last_tick, tick);
    rec.samples.push_back({tick, static_cast<float>(rssi_db), origin});
}

void ContactStore::prune(int64_t now_tick, int64_t retention_ticks) {
    auto expired = [&](const ContactRecord& r) {
        return now_tick - r.last_tick > retention_ticks;
    };
    if (std::none_of(records_.begin(), records_.end(), expired)) return;
    std::vector<ContactRecord> kept;
    kept.reserve(records_.size());
    for (auto& rec : records_) {
        if (!expired(rec)) kept.push_back(std::move(rec));
    }
    records_ = std::move(kept);
    rebuild_index();
}

void ContactStore::rebuild_index() {
    index_.clear();
    index_.reserve(records_.size());
    for (size_t i = 0; i < records_.size(); ++i) {
        index_.emplace(Key{records_[i].eid, records_[i].interval_index}, i);
    }
}

const ContactRecord* ContactStore::find(const EphemeralId& eid, int64_t interval_index) const {
    auto it = index_.find(Key{eid, interval_index});
    return it == index_.end() ? nullptr : &records_[it->second];
}

void ContactStore::clear() {
    records_.clear();
    index_.clear();
}

RiskBreakdown compute_risk(const std::vector<const ContactRecord*>& records,
                           const RadioParams& radio, const RiskParams& risk,
                           double minutes_per_tick) {
    RiskBreakdown out;
    for (const ContactRecord* rec : records) {
        if (!rec) continue;
        for (const ContactSample& s : rec->samples) {
            if (estimate_distance(s.rssi_db, radio) > risk.proximity_threshold_m) continue;
            switch (s.origin) {
                case SampleOrigin::genuine: out.genuine_minutes += minutes_per_tick; break;
                case SampleOrigin::relay: out.relay_minutes += minutes_per_tick; break;
                case SampleOrigin::replay: out.replay_minutes += minutes_per_tick; break;
            }
        }
    }
    return out;
}

} // namespace ctsim
