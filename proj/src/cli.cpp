#include "ctsim/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ctsim/config.hpp"
#include "ctsim/errors.hpp"
#include "ctsim/metrics.hpp"
#include "ctsim/simulation.hpp"

namespace ctsim {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Override {
    std::string key;
    std::string value;
};

std::vector<Override> parse_overrides(const std::vector<std::string>& sets) {
    std::vector<Override> out;
    for (const std::string& s : sets) {
        size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects key=value, got '" + s + "'");
        }
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

ScenarioConfig load_with_overrides(const std::string& path, const std::vector<Override>& sets) {
    FlatConfig entries = parse_config_text(read_file(path));
    for (const Override& o : sets) apply_override(entries, o.key, o.value);
    return config_from_entries(entries);
}

std::string default_out_root() {
    const char* env = std::getenv("CTSIM_OUT_ROOT");
    return env && *env ? env : "out";
}

// seed list: either one seed or an inclusive A..B range
std::vector<uint64_t> parse_seeds(const std::string& spec) {
    size_t dots = spec.find("..");
    if (dots == std::string::npos) {
        return {static_cast<uint64_t>(std::stoull(spec))};
    }
    uint64_t lo = std::stoull(spec.substr(0, dots));
    uint64_t hi = std::stoull(spec.substr(dots + 2));
    if (hi < lo) throw ConfigError("--seeds range must be ascending (got '" + spec + "')");
    std::vector<uint64_t> seeds;
    for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
}

struct SweepSpec {
    std::string key;
    std::vector<std::string> values;
};

SweepSpec parse_sweep(const std::string& spec) {
    size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--sweep expects key=v1,v2,..., got '" + spec + "'");
    }
    SweepSpec sweep;
    sweep.key = spec.substr(0, eq);
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) sweep.values.push_back(item);
    if (sweep.values.empty()) throw ConfigError("--sweep needs at least one value");
    // map friendly aliases onto config keys
    if (sweep.key == "adoption") sweep.key = "adoption_fraction";
    return sweep;
}

std::string sanitize(const std::string& v) {
    std::string out;
    for (char c : v) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

int do_run(const std::string& scenario, const std::vector<std::string>& sets,
           const std::string& seeds_spec, const std::string& sweep_spec,
           const std::string& protocol, std::string out_dir) {
    std::vector<Override> overrides = parse_overrides(sets);
    if (!protocol.empty()) overrides.push_back({"protocol", protocol});

    std::vector<uint64_t> seeds;
    if (!seeds_spec.empty()) seeds = parse_seeds(seeds_spec);

    std::optional<SweepSpec> sweep;
    if (!sweep_spec.empty()) sweep = parse_sweep(sweep_spec);

    if (out_dir.empty()) {
        out_dir = (fs::path(default_out_root()) / fs::path(scenario).stem()).string();
    }

    bool single = seeds.size() <= 1 && !sweep;
    if (single) {
        std::vector<Override> all = overrides;
        if (!seeds.empty()) all.push_back({"rng_seed", std::to_string(seeds[0])});
        ScenarioConfig cfg = load_with_overrides(scenario, all);
        RunResult result = Simulation(cfg).run();
        write_run_outputs(result, out_dir);
        Confusion confusion = score_notifications(result);
        std::cout << "run complete: " << out_dir << "\n"
                  << "  notifications=" << result.notifications.size()
                  << " tp=" << confusion.true_positive
                  << " fp_attack=" << confusion.false_positive_attack
                  << " fp_noise=" << confusion.false_positive_noise
                  << " fn=" << confusion.false_negative
                  << " attack_rate=" << result.attack_rate << "\n";
        return 0;
    }

    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        throw ConfigError("output directory '" + out_dir + "' exists and is not empty");
    }
    fs::create_directories(out_dir);
    if (seeds.empty()) seeds.push_back(0); // sweep with the scenario's own seed

    std::string summary = "seed,sweep_key,sweep_value,notifications,true_positive,"
                          "false_positive_attack,false_positive_noise,false_negative,"
                          "median_latency_seconds,attack_rate,ever_infected\n";
    std::vector<std::string> sweep_values = sweep ? sweep->values : std::vector<std::string>{""};
    for (const std::string& value : sweep_values) {
        for (uint64_t seed : seeds) {
            std::vector<Override> all = overrides;
            if (!seeds_spec.empty()) all.push_back({"rng_seed", std::to_string(seed)});
            if (sweep) all.push_back({sweep->key, value});
            ScenarioConfig cfg = load_with_overrides(scenario, all);
            RunResult result = Simulation(cfg).run();

            std::string name = "seed" + std::to_string(cfg.rng_seed);
            if (sweep) name += "_" + sanitize(sweep->key) + "_" + sanitize(value);
            write_run_outputs(result, (fs::path(out_dir) / name).string());

            Confusion confusion = score_notifications(result);
            LatencySummary latency = latency_summary(result);
            char line[256];
            snprintf(line, sizeof(line), "%llu,%s,%s,%zu,%lld,%lld,%lld,%lld,%.1f,%.6f,%d\n",
                     static_cast<unsigned long long>(cfg.rng_seed),
                     sweep ? sweep->key.c_str() : "", value.c_str(),
                     result.notifications.size(),
                     static_cast<long long>(confusion.true_positive),
                     static_cast<long long>(confusion.false_positive_attack),
                     static_cast<long long>(confusion.false_positive_noise),
                     static_cast<long long>(confusion.false_negative), latency.median_seconds,
                     result.attack_rate, result.ever_infected);
            summary += line;
        }
    }
    std::ofstream out(fs::path(out_dir) / "sweep_summary.csv", std::ios::binary);
    out << summary;
    std::cout << "sweep complete: " << out_dir << " ("
              << seeds.size() * sweep_values.size() << " runs)\n";
    return 0;
}

int do_compare(const std::string& scenario_a, const std::string& scenario_b,
               const std::vector<std::string>& sets, const std::string& seed_spec,
               std::string out_dir) {
    std::vector<Override> overrides = parse_overrides(sets);
    if (!seed_spec.empty()) overrides.push_back({"rng_seed", seed_spec});

    ScenarioConfig cfg_a = load_with_overrides(scenario_a, overrides);
    ScenarioConfig cfg_b;
    if (scenario_b.empty()) {
        // same scenario with the protocol family flipped
        std::vector<Override> flipped = overrides;
        flipped.push_back({"protocol", cfg_a.protocol == ProtocolFamily::decentralised
                                           ? "centralised"
                                           : "decentralised"});
        cfg_b = load_with_overrides(scenario_a, flipped);
    } else {
        cfg_b = load_with_overrides(scenario_b, overrides);
    }

    if (out_dir.empty()) {
        out_dir = (fs::path(default_out_root()) /
                   (fs::path(scenario_a).stem().string() + "_compare"))
                      .string();
    }
    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        throw ConfigError("output directory '" + out_dir + "' exists and is not empty");
    }
    fs::create_directories(out_dir);

    RunResult run_a = Simulation(cfg_a).run();
    RunResult run_b = Simulation(cfg_b).run();
    std::string csv = comparison_csv(run_a, run_b); // validates compatibility
    write_run_outputs(run_a, (fs::path(out_dir) / "run_a").string());
    write_run_outputs(run_b, (fs::path(out_dir) / "run_b").string());
    std::ofstream out(fs::path(out_dir) / "comparison.csv", std::ios::binary);
    out << csv;
    std::cout << "comparison written: " << (fs::path(out_dir) / "comparison.csv").string() << "\n";
    return 0;
}

int do_validate(const std::string& scenario, const std::vector<std::string>& sets) {
    ScenarioConfig cfg = load_with_overrides(scenario, parse_overrides(sets));
    std::cout << resolved_config_text(cfg);
    return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"ctsim - proximity contact tracing protocol and attack simulator"};
    app.require_subcommand(1);

    std::string scenario, scenario_b, out_dir, seeds_spec, seed_spec, sweep_spec, protocol;
    std::vector<std::string> sets;

    CLI::App* run = app.add_subcommand("run", "run one scenario, a seed range, or a sweep");
    run->add_option("--scenario", scenario, "scenario file")->required();
    run->add_option("--seed", seeds_spec, "seed (overrides rng_seed)");
    run->add_option("--seeds", seeds_spec, "seed range A..B");
    run->add_option("--sweep", sweep_spec, "sweep spec key=v1,v2,...");
    run->add_option("--out", out_dir, "output directory (default $CTSIM_OUT_ROOT/<scenario>)");
    run->add_option("--set", sets, "config override key=value (repeatable)");
    run->add_option("--protocol", protocol, "protocol family override");

    CLI::App* cmp = app.add_subcommand("compare", "paired run of both protocol families");
    cmp->add_option("--scenario", scenario, "scenario file")->required();
    cmp->add_option("--scenario-b", scenario_b, "second scenario (default: protocol flipped)");
    cmp->add_option("--seed", seed_spec, "seed for both runs");
    cmp->add_option("--out", out_dir, "output directory");
    cmp->add_option("--set", sets, "config override key=value (repeatable)");

    CLI::App* val = app.add_subcommand("validate", "parse and echo the resolved scenario");
    val->add_option("--scenario", scenario, "scenario file")->required();
    val->add_option("--set", sets, "config override key=value (repeatable)");

    std::vector<std::string> argv_store = args;
    std::vector<const char*> argv;
    argv.push_back("ctsim");
    for (const std::string& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (run->parsed()) {
            return do_run(scenario, sets, seeds_spec, sweep_spec, protocol, out_dir);
        }
        if (cmp->parsed()) {
            return do_compare(scenario, scenario_b, sets, seed_spec, out_dir);
        }
        if (val->parsed()) {
            return do_validate(scenario, sets);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ctsim
