#include "ctsim/simulation.hpp"

#include <algorithm>
#include <unordered_map>

#include "ctsim/errors.hpp"

namespace ctsim {

namespace {

class DecentralisedEngine final : public ProtocolEngine {
public:
    DecentralisedEngine(const ScenarioConfig& cfg, const World& world, const RngStreams& streams)
        : cfg_(cfg) {
        devices_.resize(world.agents().size());
        for (const Agent& a : world.agents()) {
            if (!a.has_app) continue;
            devices_[a.id] = std::make_unique<DecentralisedDevice>(
                a.id, streams.make("device-secret", static_cast<uint64_t>(a.id)));
        }
    }

    void begin_day(const SimClock& clock) override {
        for (auto& dev : devices_) {
            if (dev) dev->begin_day(clock);
        }
    }

    std::vector<ExposureNotification> begin_tick(const SimClock& clock) override {
        std::vector<ExposureNotification> out;
        if (clock.tick == 0 || !clock.at_day_boundary()) return out;
        KeyBatch batch = server_.publish_batch(clock);
        for (const DiagnosisUpload& u : batch.uploads) published_.push_back(u);
        if (batch.uploads.empty()) return out;
        BatchIndex index(batch);
        for (auto& dev : devices_) {
            if (!dev) continue;
            auto found = match_local(*dev, index, cfg_.radio, cfg_.risk, clock);
            out.insert(out.end(), found.begin(), found.end());
        }
        return out;
    }

    const EphemeralId* current_eid(int agent, const SimClock& clock) override {
        auto& dev = devices_[static_cast<size_t>(agent)];
        return dev ? &dev->current_eid(clock) : nullptr;
    }

    void deliver_reception(int receiver, const EphemeralId& eid, const SimClock& clock,
                           double rssi_db, SampleOrigin origin) override {
        auto& dev = devices_[static_cast<size_t>(receiver)];
        if (dev) dev->on_reception(eid, clock, rssi_db, origin);
    }

    int report_diagnosis(int agent, const SimClock& clock) override {
        auto& dev = devices_[static_cast<size_t>(agent)];
        if (!dev || dev->has_reported()) return -1;
        // the upload window is pruned as of now, not the last day boundary
        dev->store().prune(clock.tick, clock.retention_ticks());
        DiagnosisUpload upload = dev->report_diagnosis(clock);
        max_upload_keys_ = std::max(max_upload_keys_, static_cast<int>(upload.keys.size()));
        return server_.submit_upload(std::move(upload.keys), clock.tick);
    }

    std::vector<ExposureNotification> end_tick(const SimClock&) override { return {}; }

    void add_blacklist(const std::vector<EphemeralId>& eids) override {
        server_.add_blacklist(eids);
    }

    PrivacyLedger ledger() const override {
        PrivacyLedger l;
        // The decentralised backend stores uploaded keys and timestamps,
        // nothing else: no pseudonyms, no contact lists, no graph edges.
        l.health_status_entries = static_cast<int64_t>(server_.upload_count());
        l.social_graph_edges = 0;
        l.location_observations = 0;
        return l;
    }

    int64_t report_count() const override { return static_cast<int64_t>(server_.upload_count()); }
    int max_upload_keys() const override { return max_upload_keys_; }
    const std::vector<DiagnosisUpload>* published_uploads() const override { return &published_; }

    DecentralisedDevice* device(int agent) { return devices_[static_cast<size_t>(agent)].get(); }

private:
    const ScenarioConfig& cfg_;
    std::vector<std::unique_ptr<DecentralisedDevice>> devices_;
    DecentralisedServer server_;
    std::vector<DiagnosisUpload> published_;
    int max_upload_keys_ = 0;
};

class CentralisedEngine final : public ProtocolEngine {
public:
    CentralisedEngine(const ScenarioConfig& cfg, const World& world, const RngStreams& streams)
        : cfg_(cfg),
          server_(cfg.centralised, cfg.risk, cfg.radio, streams.make("server-master")) {
        devices_.resize(world.agents().size());
        for (const Agent& a : world.agents()) {
            if (!a.has_app) continue;
            // honest users: one source each, valid token
            auto pseudonym = server_.register_user(a.id, RegistrationChallenge{a.id, true});
            if (pseudonym) {
                devices_[a.id] = std::make_unique<CentralisedDevice>(a.id, *pseudonym);
            }
        }
        poll_ticks_ = cfg.centralised.poll_interval_seconds / cfg.step_seconds;
        if (poll_ticks_ <= 0) poll_ticks_ = 1;
    }

    void begin_day(const SimClock& clock) override {
        for (auto& dev : devices_) {
            if (dev) dev->begin_day(server_, clock);
        }
    }

    std::vector<ExposureNotification> begin_tick(const SimClock&) override { return {}; }

    const EphemeralId* current_eid(int agent, const SimClock& clock) override {
        auto& dev = devices_[static_cast<size_t>(agent)];
        return dev ? &dev->current_eid(clock) : nullptr;
    }

    void deliver_reception(int receiver, const EphemeralId& eid, const SimClock& clock,
                           double rssi_db, SampleOrigin origin) override {
        auto& dev = devices_[static_cast<size_t>(receiver)];
        if (dev) dev->on_reception(eid, clock, rssi_db, origin);
    }

    int report_diagnosis(int agent, const SimClock& clock) override {
        auto& dev = devices_[static_cast<size_t>(agent)];
        if (!dev || dev->has_reported()) return -1;
        dev->store().prune(clock.tick, clock.retention_ticks());
        auto outcome = server_.report_received_list(dev->pseudonym(), dev->store(), clock);
        if (!outcome.accepted) return -1;
        dev->mark_reported();
        return report_seq_++;
    }

    std::vector<ExposureNotification> end_tick(const SimClock& clock) override {
        std::vector<ExposureNotification> out;
        if (clock.tick == 0 || clock.tick % poll_ticks_ != 0) return out;
        for (auto& dev : devices_) {
            if (!dev) continue;
            auto delivered = server_.poll_status(dev->pseudonym(), dev->agent_id(), clock);
            out.insert(out.end(), delivered.begin(), delivered.end());
        }
        return out;
    }

    void add_blacklist(const std::vector<EphemeralId>& eids) override {
        server_.blacklist_ids(eids);
    }

    PrivacyLedger ledger() const override { return server_.ledger(); }
    int64_t oversight_alerts() const override { return server_.alerts(); }
    int64_t held_notifications() const override { return server_.held_notifications(); }
    int64_t report_count() const override { return report_seq_; }

    CentralisedServer& server() { return server_; }

private:
    const ScenarioConfig& cfg_;
    CentralisedServer server_;
    std::vector<std::unique_ptr<CentralisedDevice>> devices_;
    int64_t poll_ticks_ = 1;
    int report_seq_ = 0;
};

} // namespace

Simulation::Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}

RunResult Simulation::run() {
    const ScenarioConfig& cfg = cfg_;
    RngStreams streams(cfg.rng_seed);
    SimClock clock = cfg.make_clock();
    const int64_t total_ticks = cfg.total_ticks();

    World world(cfg, streams);
    SpatialGrid grid(cfg.world_width_m, cfg.world_height_m,
                     std::max(cfg.radio.max_range_m, cfg.epidemic.infection_radius_m));
    EpidemicModel epidemic(cfg, streams);
    epidemic.seed_initial(world);

    std::unique_ptr<ProtocolEngine> engine;
    DecentralisedEngine* dec_engine = nullptr;
    CentralisedEngine* cent_engine = nullptr;
    if (cfg.protocol == ProtocolFamily::decentralised) {
        auto e = std::make_unique<DecentralisedEngine>(cfg, world, streams);
        dec_engine = e.get();
        engine = std::move(e);
    } else {
        auto e = std::make_unique<CentralisedEngine>(cfg, world, streams);
        cent_engine = e.get();
        engine = std::move(e);
    }

    Rng radio_rng = streams.make("radio");
    std::vector<Rng> consent_rng;
    consent_rng.reserve(world.agents().size());
    for (size_t i = 0; i < world.agents().size(); ++i) {
        consent_rng.push_back(streams.make("consent", i));
    }

    EidProvider eid_of = [&](int agent) { return engine->current_eid(agent, clock); };

    // attack hooks
    std::optional<SnifferGrid> sniffer;
    std::optional<RelayAttack> relay;
    std::optional<SybilListener> sybil_listener;
    std::optional<SybilResult> sybil_result;
    size_t blacklisted_upto = 0;
    const AttackConfig& attack_cfg = cfg.attack;
    if (attack_cfg.type == AttackType::sniffer_grid) {
        sniffer.emplace(attack_cfg.sniffer, cfg.world_width_m, cfg.world_height_m,
                        cfg.radio.max_range_m);
    }
    if (attack_cfg.type == AttackType::relay || attack_cfg.type == AttackType::replay_stale) {
        relay.emplace(attack_cfg.relay, attack_cfg.type, cfg.radio.rssi_at_1m_db);
    }
    if (attack_cfg.type == AttackType::sybil) {
        sybil_result.emplace();
        if (cfg.protocol == ProtocolFamily::decentralised) {
            sybil_listener.emplace(
                Vec2{attack_cfg.sybil.listener_x.value_or(cfg.world_width_m / 2.0),
                     attack_cfg.sybil.listener_y.value_or(cfg.world_height_m / 2.0)},
                cfg.radio.max_range_m, attack_cfg.sybil.bucket_intervals);
        } else if (cent_engine) {
            // registration flood from a single source
            for (int i = 0; i < attack_cfg.sybil.accounts_requested; ++i) {
                auto granted =
                    cent_engine->server().register_user(-1, RegistrationChallenge{-1, true});
                if (granted) ++sybil_result->accounts_granted;
                else ++sybil_result->accounts_denied;
            }
        }
    }

    // trajectory trace for sniffer ground-truth scoring
    const bool keep_trajectory = attack_cfg.type == AttackType::sniffer_grid;
    std::vector<std::pair<float, float>> trajectory;
    if (keep_trajectory) {
        trajectory.resize(static_cast<size_t>(total_ticks) * world.agents().size());
    }

    // Rotation ledger: every identifier ever broadcast, with the single
    // interval it was seen in. Broadcasting one EID across two intervals
    // is an invariant violation.
    std::unordered_map<EphemeralId, int64_t, EphemeralIdHash> broadcast_intervals;

    RunResult result;
    result.cfg = cfg;
    result.has_app.resize(world.agents().size());
    for (const Agent& a : world.agents()) result.has_app[a.id] = a.has_app ? 1 : 0;

    std::map<int, int> upload_reporter; // report id -> agent (ground truth)
    int64_t diagnosed_cum = 0;
    const double person_days_per_tick = static_cast<double>(cfg.step_seconds) / kSecondsPerDay;

    auto deliver_all = [&](std::vector<ExposureNotification>&& batch) {
        for (ExposureNotification& n : batch) {
            result.notifications.push_back(n);
        }
        epidemic.apply_quarantine(world, batch, clock);
    };

    auto run_protocol_phase_begin = [&]() -> std::vector<ExposureNotification> {
        if (clock.at_day_boundary()) engine->begin_day(clock);
        return engine->begin_tick(clock);
    };

    for (int64_t tick = 0; tick < total_ticks; ++tick) {
        clock.tick = tick;

        std::vector<ExposureNotification> delivered = run_protocol_phase_begin();

        world.step_mobility();
        grid.rebuild(world.agents());
        if (keep_trajectory) {
            for (const Agent& a : world.agents()) {
                trajectory[static_cast<size_t>(tick) * world.agents().size() + a.id] = {
                    static_cast<float>(a.pos.x), static_cast<float>(a.pos.y)};
            }
        }

        epidemic.transmit_step(world, grid, clock, result.contacts);
        std::vector<int> newly_diagnosed = epidemic.progress_and_diagnose(world, clock);
        diagnosed_cum += static_cast<int64_t>(newly_diagnosed.size());
        for (int agent : newly_diagnosed) {
            if (!world.agents()[agent].has_app) continue;
            if (!consent_rng[agent].bernoulli(cfg.reporting_probability)) continue;
            int report_id = engine->report_diagnosis(agent, clock);
            if (report_id >= 0) {
                result.reports.push_back({clock.tick, agent, report_id});
                upload_reporter[report_id] = agent;
            }
        }

        auto receptions = broadcast_round(world, grid, eid_of, cfg.radio, tick, radio_rng);
        result.reception_count += static_cast<int64_t>(receptions.size());
        for (const Reception& r : receptions) {
            engine->deliver_reception(r.receiver_agent, r.eid, clock, r.rssi_db,
                                      SampleOrigin::genuine);
        }
        if (cfg.radio.trace_receptions) {
            result.reception_trace.insert(result.reception_trace.end(), receptions.begin(),
                                          receptions.end());
        }

        // rotation invariant, checked at the source
        for (const Agent& a : world.agents()) {
            if (!a.has_app) continue;
            const EphemeralId* eid = engine->current_eid(a.id, clock);
            if (!eid) continue;
            auto [it, fresh] = broadcast_intervals.emplace(*eid, clock.interval_index());
            if (!fresh && it->second != clock.interval_index()) {
                throw InvariantViolation(
                    "rotation: an ephemeral id was broadcast in more than one 900s interval");
            }
        }

        if (sniffer) sniffer->sniff_round(world, grid, eid_of, tick);
        if (sybil_listener) sybil_listener->listen_round(world, grid, eid_of, clock);
        if (relay) {
            relay->capture_round(world, eid_of, clock);
            if (attack_cfg.relay.blacklist_captured) {
                const auto& captured = relay->captured_eids();
                if (captured.size() > blacklisted_upto) {
                    engine->add_blacklist(std::vector<EphemeralId>(
                        captured.begin() + static_cast<long>(blacklisted_upto), captured.end()));
                    blacklisted_upto = captured.size();
                }
            }
            for (const auto& inj : relay->due_injections(tick)) {
                engine->deliver_reception(inj.target_agent, inj.eid, clock,
                                          relay->injection_rssi_db(), inj.origin);
                relay->count_delivered(1);
            }
        }

        auto polled = engine->end_tick(clock);
        delivered.insert(delivered.end(), polled.begin(), polled.end());
        deliver_all(std::move(delivered));

        StageCounts stages = count_stages(world);
        if (stages.total() != cfg.n_agents) {
            throw InvariantViolation("conservation: health stages no longer sum to n_agents");
        }
        int quarantined = 0;
        for (const Agent& a : world.agents()) quarantined += a.quarantined ? 1 : 0;
        result.quarantine_person_days += quarantined * person_days_per_tick;
        result.peak_infectious =
            std::max(result.peak_infectious, stages.infectious + stages.diagnosed);
        TimeseriesRow row;
        row.tick = tick;
        row.stages = stages;
        row.diagnosed_cum = diagnosed_cum;
        row.quarantined = quarantined;
        result.timeseries.push_back(row);
    }

    // Closing bookkeeping tick: the final 24h boundary and poll, so every
    // report filed during the run gets its delivery opportunity. No
    // mobility or disease here.
    clock.tick = total_ticks;
    {
        std::vector<ExposureNotification> delivered = run_protocol_phase_begin();
        auto polled = engine->end_tick(clock);
        delivered.insert(delivered.end(), polled.begin(), polled.end());
        for (ExposureNotification& n : delivered) result.notifications.push_back(n);
    }
    result.final_tick = total_ticks;

    result.ledger = engine->ledger();
    result.oversight_alerts = engine->oversight_alerts();
    result.held_notifications = engine->held_notifications();
    result.ever_infected = epidemic.ever_infected();
    result.attack_rate =
        cfg.n_agents > 0 ? static_cast<double>(result.ever_infected) / cfg.n_agents : 0.0;
    result.report_count = engine->report_count();
    result.max_upload_keys = engine->max_upload_keys();

    if (attack_cfg.type != AttackType::none) {
        AttackResult attack;
        attack.type = attack_cfg.type;
        attack.oversight_alerts = result.oversight_alerts;
        for (const ExposureNotification& n : result.notifications) {
            if (n.cause != NotificationCause::true_contact) ++attack.attack_notifications;
        }
        if (relay) {
            attack.injected_receptions = relay->injected_count();
            attack.captured_eids = relay->captured_eids();
        }
        if (sniffer && dec_engine) {
            const auto& published = *dec_engine->published_uploads();
            attack.tracks =
                reconstruct_tracks(sniffer->observations(), published, sniffer->positions());
            score_track_coverage(attack.tracks, sniffer->observations(), published,
                                 upload_reporter, clock);
            for (const ReconstructedTrack& track : attack.tracks) {
                if (track.victim_agent < 0) continue;
                for (const TrackPoint& p : track.points) {
                    auto [fx, fy] =
                        trajectory[static_cast<size_t>(p.tick) * world.agents().size() +
                                   track.victim_agent];
                    double err = distance(p.sniffer_pos, Vec2{fx, fy});
                    attack.max_track_position_error_m =
                        std::max(attack.max_track_position_error_m, err);
                    if (err > sniffer->range() + 1e-6) attack.track_points_within_range = false;
                }
            }
        }
        if (sybil_result) {
            if (sybil_listener && dec_engine) {
                sybil_result->attributions =
                    sybil_listener->identify(*dec_engine->published_uploads());
                std::set<int> unique_uploads;
                for (const auto& attr : sybil_result->attributions) {
                    if (attr.unique) unique_uploads.insert(attr.upload_id);
                }
                sybil_result->reidentified_victims = static_cast<int>(unique_uploads.size());
                sybil_result->gt_agents_by_bucket = sybil_listener->agents_by_bucket();
                sybil_result->upload_reporter = upload_reporter;
            }
            attack.sybil = std::move(*sybil_result);
        }
        result.attack = std::move(attack);
    }

    return result;
}

} // namespace ctsim
