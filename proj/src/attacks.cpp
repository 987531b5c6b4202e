#include "ctsim/attacks.hpp"

#include <algorithm>
#include <unordered_set>

namespace ctsim {

SnifferGrid::SnifferGrid(const SnifferGridConfig& cfg, double world_w, double world_h,
                         double range_m)
    : range_(range_m) {
    positions_.reserve(static_cast<size_t>(cfg.grid_nx) * cfg.grid_ny);
    double dx = world_w / cfg.grid_nx;
    double dy = world_h / cfg.grid_ny;
    for (int iy = 0; iy < cfg.grid_ny; ++iy) {
        for (int ix = 0; ix < cfg.grid_nx; ++ix) {
            positions_.push_back({(ix + 0.5) * dx, (iy + 0.5) * dy});
        }
    }
}

void SnifferGrid::sniff_round(const World& world, const SpatialGrid& agent_grid,
                              const EidProvider& eid_of, int64_t tick) {
    const auto& agents = world.agents();
    for (size_t s = 0; s < positions_.size(); ++s) {
        std::vector<int> in_range;
        agent_grid.for_each_within(positions_[s], range_, agents, [&](int idx) {
            if (agents[idx].has_app) in_range.push_back(idx);
        });
        std::sort(in_range.begin(), in_range.end());
        for (int idx : in_range) {
            const EphemeralId* eid = eid_of(idx);
            if (!eid) continue;
            log_.push_back({*eid, static_cast<int>(s), tick, idx});
        }
    }
}

std::vector<ReconstructedTrack> reconstruct_tracks(
    const std::vector<SnifferObservation>& observations,
    const std::vector<DiagnosisUpload>& published_uploads,
    const std::vector<Vec2>& sniffer_positions) {
    // Attacker view: published key -> its 96 EIDs per day, joined against
    // everything the grid ever heard.
    std::unordered_map<EphemeralId, int, EphemeralIdHash> eid_to_upload;
    for (size_t u = 0; u < published_uploads.size(); ++u) {
        for (const DiagnosisKey& key : published_uploads[u].keys) {
            for (const EphemeralId& eid : expand_key(key)) {
                eid_to_upload.emplace(eid, static_cast<int>(u));
            }
        }
    }

    std::vector<ReconstructedTrack> tracks(published_uploads.size());
    for (size_t u = 0; u < published_uploads.size(); ++u) {
        tracks[u].upload_id = published_uploads[u].upload_id;
    }
    for (const SnifferObservation& obs : observations) {
        auto it = eid_to_upload.find(obs.eid);
        if (it == eid_to_upload.end()) continue;
        tracks[static_cast<size_t>(it->second)].points.push_back(
            {obs.tick, sniffer_positions[static_cast<size_t>(obs.sniffer_index)]});
    }
    for (auto& track : tracks) {
        std::stable_sort(track.points.begin(), track.points.end(),
                         [](const TrackPoint& a, const TrackPoint& b) { return a.tick < b.tick; });
        int64_t last_tick = -1;
        for (const TrackPoint& p : track.points) {
            if (p.tick != last_tick) {
                ++track.matched_ticks;
                last_tick = p.tick;
            }
        }
    }
    return tracks;
}

void score_track_coverage(std::vector<ReconstructedTrack>& tracks,
                          const std::vector<SnifferObservation>& observations,
                          const std::vector<DiagnosisUpload>& published_uploads,
                          const std::map<int, int>& upload_reporter, const SimClock& clock) {
    for (size_t u = 0; u < tracks.size(); ++u) {
        ReconstructedTrack& track = tracks[u];
        auto rep = upload_reporter.find(track.upload_id);
        if (rep == upload_reporter.end()) continue;
        track.victim_agent = rep->second;

        std::set<int64_t> covered_days;
        for (const DiagnosisKey& key : published_uploads[u].keys) {
            covered_days.insert(key.day_index);
        }
        // Ground truth: distinct in-range ticks of the victim within the
        // days the published keys cover. The grid records an observation
        // for every in-range tick, so the log is exactly that set.
        std::set<int64_t> in_range_ticks;
        for (const SnifferObservation& obs : observations) {
            if (obs.agent_id != track.victim_agent) continue;
            int64_t day = obs.tick * clock.step_seconds / kSecondsPerDay;
            if (covered_days.count(day)) in_range_ticks.insert(obs.tick);
        }
        track.observed_ticks = static_cast<int64_t>(in_range_ticks.size());
        track.coverage = track.observed_ticks > 0
                             ? static_cast<double>(track.matched_ticks) / track.observed_ticks
                             : 0.0;
    }
}

RelayAttack::RelayAttack(const RelayAttackConfig& cfg, AttackType type, double strong_rssi_db)
    : cfg_(cfg),
      origin_(type == AttackType::replay_stale ? SampleOrigin::replay : SampleOrigin::relay),
      total_delay_(cfg.latency_ticks + cfg.stale_delay_ticks),
      strong_rssi_db_(strong_rssi_db) {}

void RelayAttack::capture_round(const World& world, const EidProvider& eid_of,
                                const SimClock& clock) {
    const auto& agents = world.agents();
    std::vector<int> captured;
    if (cfg_.use_capture_zone) {
        Vec2 zone{cfg_.zone_x, cfg_.zone_y};
        for (const Agent& a : agents) {
            if (distance(a.pos, zone) <= cfg_.zone_radius) captured.push_back(a.id);
        }
    } else {
        captured = cfg_.captured_agents;
        std::sort(captured.begin(), captured.end());
    }

    for (int id : captured) {
        const EphemeralId* eid = eid_of(id);
        if (!eid) continue;
        if (captured_set_.insert(*eid).second) captured_order_.push_back(*eid);
        for (int target : cfg_.target_agents) {
            if (target == id) continue;
            queue_.push_back({clock.tick + total_delay_, target, *eid, origin_});
        }
        // The bridge works both ways: the targets' identifiers reach the
        // captured agent's device too, which is what makes the attack
        // visible to a centralised server matching on *received* lists.
        for (int target : cfg_.target_agents) {
            if (target == id) continue;
            const EphemeralId* teid = eid_of(target);
            if (!teid) continue;
            queue_.push_back({clock.tick + total_delay_, id, *teid, origin_});
        }
    }
}

std::vector<RelayAttack::Injection> RelayAttack::due_injections(int64_t tick) {
    std::vector<Injection> due;
    while (!queue_.empty() && queue_.front().deliver_tick <= tick) {
        due.push_back(queue_.front());
        queue_.pop_front();
    }
    return due;
}

SybilListener::SybilListener(Vec2 pos, double range_m, int bucket_intervals)
    : pos_(pos), range_(range_m), bucket_intervals_(bucket_intervals) {}

void SybilListener::listen_round(const World& world, const SpatialGrid& agent_grid,
                                 const EidProvider& eid_of, const SimClock& clock) {
    const auto& agents = world.agents();
    int64_t bucket = clock.interval_index() / bucket_intervals_;
    std::vector<int> in_range;
    agent_grid.for_each_within(pos_, range_, agents, [&](int idx) {
        if (agents[idx].has_app) in_range.push_back(idx);
    });
    std::sort(in_range.begin(), in_range.end());
    for (int idx : in_range) {
        const EphemeralId* eid = eid_of(idx);
        if (!eid) continue;
        heard_[bucket].insert(*eid);
        gt_agents_[bucket].insert(idx);
        eid_agent_.emplace(*eid, idx);
    }
}

std::vector<SybilListener::Attribution> SybilListener::identify(
    const std::vector<DiagnosisUpload>& published_uploads) const {
    std::vector<Attribution> out;
    for (const DiagnosisUpload& upload : published_uploads) {
        std::unordered_set<EphemeralId, EphemeralIdHash> upload_eids;
        for (const DiagnosisKey& key : upload.keys) {
            for (const EphemeralId& eid : expand_key(key)) upload_eids.insert(eid);
        }
        for (const auto& [bucket, eids] : heard_) {
            bool matched = std::any_of(eids.begin(), eids.end(), [&](const EphemeralId& e) {
                return upload_eids.count(e) > 0;
            });
            if (!matched) continue;
            Attribution attr;
            attr.bucket = bucket;
            attr.upload_id = upload.upload_id;
            attr.candidate_count = static_cast<int>(eids.size());
            attr.unique = attr.candidate_count == 1;
            if (attr.unique) {
                attr.attributed_agent = eid_agent_.at(*eids.begin());
            }
            out.push_back(attr);
        }
    }
    return out;
}

} // namespace ctsim
