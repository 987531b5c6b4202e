#include "ctsim/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"

#include "ctsim/errors.hpp"

namespace ctsim {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v, int precision = 3) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Delivery opportunity of a report inside the run, or -1 when the run
// ended before the pipeline could deliver it.
int64_t delivery_tick(const RunResult& run, int64_t report_tick) {
    const ScenarioConfig& cfg = run.cfg;
    if (cfg.protocol == ProtocolFamily::decentralised) {
        int64_t tpd = kSecondsPerDay / cfg.step_seconds;
        int64_t next_batch = (report_tick / tpd + 1) * tpd;
        return next_batch <= run.final_tick ? next_batch : -1;
    }
    int64_t poll_ticks = std::max<int64_t>(1, cfg.centralised.poll_interval_seconds / cfg.step_seconds);
    int64_t next_poll = (report_tick + poll_ticks - 1) / poll_ticks * poll_ticks;
    if (next_poll == 0) next_poll = poll_ticks;
    return next_poll <= run.final_tick ? next_poll : -1;
}

} // namespace

std::set<std::pair<int, int>> exposed_pairs(const RunResult& run) {
    const ScenarioConfig& cfg = run.cfg;
    SimClock clock = cfg.make_clock();
    int64_t tpd = clock.ticks_per_day();

    // contact ticks per (reporter, other) pair
    std::map<int, std::pair<int64_t, int64_t>> reporters; // agent -> (report_tick, eval_tick)
    for (const ReportEvent& r : run.reports) {
        int64_t eval = delivery_tick(run, r.tick);
        if (eval >= 0) reporters.emplace(r.agent, std::make_pair(r.tick, eval));
    }
    if (reporters.empty()) return {};

    std::map<std::pair<int, int>, int64_t> qualifying_ticks;
    auto consider = [&](int reporter, int other, int64_t t) {
        auto it = reporters.find(reporter);
        if (it == reporters.end()) return;
        if (!run.has_app[static_cast<size_t>(other)]) return;
        auto [report_tick, eval_tick] = it->second;
        if (t >= report_tick) return; // post-report identifiers are never published
        int64_t day = t * cfg.step_seconds / kSecondsPerDay;
        int64_t report_day = report_tick * cfg.step_seconds / kSecondsPerDay;
        if (day < report_day - (kRetentionDays - 1)) return; // outside the uploaded key window
        if (eval_tick - t > kRetentionDays * tpd) return;    // aged out of the receiver store
        ++qualifying_ticks[{reporter, other}];
    };
    for (const ContactEvent& c : run.contacts) {
        consider(c.a, c.b, c.tick);
        consider(c.b, c.a, c.tick);
    }

    double minutes_per_tick = clock.minutes_per_tick();
    std::set<std::pair<int, int>> exposed;
    for (const auto& [pair, ticks] : qualifying_ticks) {
        if (ticks * minutes_per_tick >= cfg.risk.exposure_minutes_threshold) {
            exposed.insert(pair);
        }
    }
    return exposed;
}

std::set<int> exposed_agents(const RunResult& run) {
    std::set<int> out;
    for (const auto& [reporter, agent] : exposed_pairs(run)) out.insert(agent);
    return out;
}

Confusion score_notifications(const RunResult& run) {
    return score_notifications(run, exposed_agents(run));
}

Confusion score_notifications(const RunResult& run, const std::set<int>& exposed) {
    Confusion c;
    std::map<int, bool> notified_attack_cause; // agent -> any attack-caused notification
    for (const ExposureNotification& n : run.notifications) {
        bool attack = n.cause != NotificationCause::true_contact;
        auto [it, fresh] = notified_attack_cause.emplace(n.agent_id, attack);
        if (!fresh) it->second = it->second || attack;
    }
    for (const auto& [agent, attack_cause] : notified_attack_cause) {
        if (exposed.count(agent)) {
            ++c.true_positive;
        } else if (attack_cause) {
            ++c.false_positive_attack;
        } else {
            ++c.false_positive_noise;
        }
    }
    for (int agent : exposed) {
        if (!notified_attack_cause.count(agent)) ++c.false_negative;
    }
    return c;
}

LatencySummary latency_summary(const RunResult& run) {
    LatencySummary s;
    std::vector<double> latencies;
    for (const ExposureNotification& n : run.notifications) {
        latencies.push_back(static_cast<double>(n.trigger_tick - n.report_tick) *
                            run.cfg.step_seconds);
    }
    if (latencies.empty()) return s;
    std::sort(latencies.begin(), latencies.end());
    s.count = static_cast<int64_t>(latencies.size());
    s.min_seconds = latencies.front();
    s.max_seconds = latencies.back();
    double sum = 0.0;
    for (double v : latencies) sum += v;
    s.mean_seconds = sum / static_cast<double>(latencies.size());
    size_t mid = latencies.size() / 2;
    s.median_seconds = latencies.size() % 2 == 1
                           ? latencies[mid]
                           : 0.5 * (latencies[mid - 1] + latencies[mid]);
    return s;
}

std::string build_manifest_json(const RunResult& run) {
    ordered_json manifest;
    manifest["artifact"] = {{"name", "ctsim"}, {"version", "0.1.0"}};
    manifest["rng_seed"] = run.cfg.rng_seed;
    ordered_json config = ordered_json::object();
    for (const auto& [k, v] : resolved_entries(run.cfg)) config[k] = v;
    manifest["resolved_config"] = config;
    return manifest.dump(2) + "\n";
}

std::string build_report_json(const RunResult& run) {
    std::set<int> exposed = exposed_agents(run);
    Confusion confusion = score_notifications(run, exposed);
    LatencySummary latency = latency_summary(run);
    const TimeseriesRow* last = run.timeseries.empty() ? nullptr : &run.timeseries.back();

    ordered_json j;
    j["schema_version"] = 1;
    j["artifact"] = {{"name", "ctsim"}, {"version", "0.1.0"}};
    j["seed"] = run.cfg.rng_seed;
    j["protocol"] = to_string(run.cfg.protocol);
    j["scenario"] = {{"n_agents", run.cfg.n_agents},
                     {"world_width_m", run.cfg.world_width_m},
                     {"world_height_m", run.cfg.world_height_m},
                     {"duration_days", run.cfg.duration_days},
                     {"adoption_fraction", run.cfg.adoption_fraction}};
    j["notifications"] = {{"delivered", run.notifications.size()},
                          {"true_positive", confusion.true_positive},
                          {"false_positive_attack", confusion.false_positive_attack},
                          {"false_positive_noise", confusion.false_positive_noise},
                          {"false_negative", confusion.false_negative},
                          {"ground_truth_exposed", exposed.size()}};
    j["latency_seconds"] = {{"count", latency.count},
                            {"median", latency.median_seconds},
                            {"mean", latency.mean_seconds},
                            {"min", latency.min_seconds},
                            {"max", latency.max_seconds}};
    j["epidemic"] = {
        {"ever_infected", run.ever_infected},
        {"attack_rate", run.attack_rate},
        {"peak_infectious", run.peak_infectious},
        {"quarantine_person_days", run.quarantine_person_days},
        {"final",
         last ? ordered_json{{"susceptible", last->stages.susceptible},
                             {"exposed", last->stages.exposed},
                             {"infectious", last->stages.infectious},
                             {"diagnosed", last->stages.diagnosed},
                             {"recovered", last->stages.recovered}}
              : ordered_json()}};

    double coverage_mean = 0.0;
    int coverage_n = 0;
    if (run.attack && !run.attack->tracks.empty()) {
        for (const auto& t : run.attack->tracks) {
            if (t.victim_agent >= 0) {
                coverage_mean += t.coverage;
                ++coverage_n;
            }
        }
        if (coverage_n > 0) coverage_mean /= coverage_n;
    }
    j["privacy_ledger"] = {{"health_status_entries", run.ledger.health_status_entries},
                           {"social_graph_edges", run.ledger.social_graph_edges},
                           {"location_observations", run.ledger.location_observations},
                           {"sniffer_track_coverage", coverage_mean}};
    j["oversight"] = {{"alerts", run.oversight_alerts},
                      {"held_notifications", run.held_notifications}};
    j["counts"] = {{"reports", run.report_count},
                   {"contact_events", run.contacts.size()},
                   {"receptions", run.reception_count},
                   {"max_upload_keys", run.max_upload_keys}};
    j["attack"] = run.attack ? ordered_json(to_string(run.attack->type)) : ordered_json();
    j["manifest"] = "manifest.json";
    return j.dump(2) + "\n";
}

std::string build_attack_report_json(const RunResult& run) {
    if (!run.attack) return "";
    const AttackResult& a = *run.attack;
    ordered_json j;
    j["attack_type"] = to_string(a.type);
    j["injected_receptions"] = a.injected_receptions;
    j["attack_notifications"] = a.attack_notifications;
    j["oversight_alerts"] = a.oversight_alerts;
    j["reidentified_victims"] = a.sybil ? a.sybil->reidentified_victims : 0;

    ordered_json coverage = ordered_json::object();
    ordered_json tracks = ordered_json::array();
    for (const ReconstructedTrack& t : a.tracks) {
        if (t.victim_agent >= 0) {
            coverage[std::to_string(t.victim_agent)] = t.coverage;
        }
        tracks.push_back({{"upload_id", t.upload_id},
                          {"victim_agent", t.victim_agent},
                          {"points", t.points.size()},
                          {"matched_ticks", t.matched_ticks},
                          {"observed_ticks", t.observed_ticks},
                          {"coverage", t.coverage}});
    }
    j["track_coverage_per_victim"] = coverage;
    if (!a.tracks.empty()) {
        j["tracks"] = tracks;
        j["max_track_position_error_m"] = a.max_track_position_error_m;
        j["track_points_within_range"] = a.track_points_within_range;
    }
    if (!a.captured_eids.empty()) {
        ordered_json eids = ordered_json::array();
        for (const EphemeralId& e : a.captured_eids) eids.push_back(e.hex());
        j["captured_eids"] = eids;
    }
    if (a.sybil) {
        ordered_json attributions = ordered_json::array();
        for (const auto& attr : a.sybil->attributions) {
            attributions.push_back({{"bucket", attr.bucket},
                                    {"upload_id", attr.upload_id},
                                    {"candidates", attr.candidate_count},
                                    {"unique", attr.unique},
                                    {"attributed_agent", attr.attributed_agent}});
        }
        j["sybil"] = {{"attributions", attributions},
                      {"accounts_granted", a.sybil->accounts_granted},
                      {"accounts_denied", a.sybil->accounts_denied}};
    }
    return j.dump(2) + "\n";
}

std::string timeseries_csv(const RunResult& run) {
    std::string out = "tick,S,E,I,diagnosed_cum,quarantined\n";
    for (const TimeseriesRow& row : run.timeseries) {
        out += std::to_string(row.tick) + "," + std::to_string(row.stages.susceptible) + "," +
               std::to_string(row.stages.exposed) + "," + std::to_string(row.stages.infectious) +
               "," + std::to_string(row.diagnosed_cum) + "," + std::to_string(row.quarantined) +
               "\n";
    }
    return out;
}

std::string notifications_csv(const RunResult& run) {
    std::string out = "tick,agent_id,protocol,risk_score,cause\n";
    std::string protocol = to_string(run.cfg.protocol);
    for (const ExposureNotification& n : run.notifications) {
        out += std::to_string(n.trigger_tick) + "," + std::to_string(n.agent_id) + "," + protocol +
               "," + fmt(n.risk_score) + "," + to_string(n.cause) + "\n";
    }
    return out;
}

std::string contacts_csv(const RunResult& run) {
    std::string out = "tick,agent_a,agent_b\n";
    for (const ContactEvent& c : run.contacts) {
        out += std::to_string(c.tick) + "," + std::to_string(c.a) + "," + std::to_string(c.b) +
               "\n";
    }
    return out;
}

std::string reports_csv(const RunResult& run) {
    std::string out = "tick,agent_id,report_id\n";
    for (const ReportEvent& r : run.reports) {
        out += std::to_string(r.tick) + "," + std::to_string(r.agent) + "," +
               std::to_string(r.report_id) + "\n";
    }
    return out;
}

std::string receptions_csv(const RunResult& run) {
    std::string out = "tick,receiver_agent,sender_eid_hex,rssi_db\n";
    for (const Reception& r : run.reception_trace) {
        out += std::to_string(r.tick) + "," + std::to_string(r.receiver_agent) + "," +
               r.eid.hex() + "," + fmt(r.rssi_db) + "\n";
    }
    return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

} // namespace

void write_run_outputs(const RunResult& run, const std::string& dir) {
    fs::path base(dir);
    if (fs::exists(base) && !fs::is_empty(base)) {
        throw ConfigError("output directory '" + dir + "' exists and is not empty");
    }
    fs::create_directories(base);
    write_file(base / "manifest.json", build_manifest_json(run));
    write_file(base / "resolved.cfg", resolved_config_text(run.cfg));
    write_file(base / "report.json", build_report_json(run));
    write_file(base / "timeseries.csv", timeseries_csv(run));
    write_file(base / "notifications.csv", notifications_csv(run));
    write_file(base / "contacts.csv", contacts_csv(run));
    write_file(base / "reports.csv", reports_csv(run));
    if (run.cfg.radio.trace_receptions) {
        write_file(base / "receptions.csv", receptions_csv(run));
    }
    if (run.attack) {
        write_file(base / "attack_report.json", build_attack_report_json(run));
    }
}

std::vector<std::array<std::string, 3>> compare_protocols(const RunResult& a, const RunResult& b) {
    if (a.cfg.rng_seed != b.cfg.rng_seed) {
        throw ConfigError("compare: runs use different seeds");
    }
    auto ea = resolved_entries(a.cfg);
    auto eb = resolved_entries(b.cfg);
    auto strip = [](FlatConfig& entries) {
        entries.erase(std::remove_if(entries.begin(), entries.end(),
                                     [](const auto& kv) { return kv.first == "protocol"; }),
                      entries.end());
    };
    strip(ea);
    strip(eb);
    if (ea != eb) {
        throw ConfigError("compare: scenarios differ beyond the protocol family");
    }

    Confusion ca = score_notifications(a);
    Confusion cb = score_notifications(b);
    LatencySummary la = latency_summary(a);
    LatencySummary lb = latency_summary(b);

    auto num = [](double v) { return fmt(v); };
    std::vector<std::array<std::string, 3>> rows;
    rows.push_back({"protocol", to_string(a.cfg.protocol), to_string(b.cfg.protocol)});
    rows.push_back({"notifications_delivered", std::to_string(a.notifications.size()),
                    std::to_string(b.notifications.size())});
    rows.push_back({"true_positive", std::to_string(ca.true_positive),
                    std::to_string(cb.true_positive)});
    rows.push_back({"false_positive_attack", std::to_string(ca.false_positive_attack),
                    std::to_string(cb.false_positive_attack)});
    rows.push_back({"false_positive_noise", std::to_string(ca.false_positive_noise),
                    std::to_string(cb.false_positive_noise)});
    rows.push_back({"false_negative", std::to_string(ca.false_negative),
                    std::to_string(cb.false_negative)});
    rows.push_back({"median_latency_seconds", num(la.median_seconds), num(lb.median_seconds)});
    rows.push_back({"health_status_entries", std::to_string(a.ledger.health_status_entries),
                    std::to_string(b.ledger.health_status_entries)});
    rows.push_back({"social_graph_edges", std::to_string(a.ledger.social_graph_edges),
                    std::to_string(b.ledger.social_graph_edges)});
    rows.push_back({"location_observations", std::to_string(a.ledger.location_observations),
                    std::to_string(b.ledger.location_observations)});
    rows.push_back({"oversight_alerts", std::to_string(a.oversight_alerts),
                    std::to_string(b.oversight_alerts)});
    rows.push_back({"held_notifications", std::to_string(a.held_notifications),
                    std::to_string(b.held_notifications)});
    rows.push_back({"attack_rate", num(a.attack_rate), num(b.attack_rate)});
    rows.push_back({"ever_infected", std::to_string(a.ever_infected),
                    std::to_string(b.ever_infected)});
    return rows;
}

std::string comparison_csv(const RunResult& a, const RunResult& b) {
    std::string out = "metric,run_a,run_b\n";
    for (const auto& row : compare_protocols(a, b)) {
        out += row[0] + "," + row[1] + "," + row[2] + "\n";
    }
    return out;
}

} // namespace ctsim
