// pgam: precompute acceptable error maps, evaluate particle sets against
// them, and run the synthetic execute/defer experiments.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgam/config.hpp"

namespace {

using namespace pgam;
using nlohmann::json;
namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kConfigError = 2, kNominalFailure = 3, kIoError = 4, kGridMismatch = 5 };

json load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
    json j = load_json(path);
    for (const auto& o : overrides) apply_override(j, o);
    return j;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (!part.empty()) out.push_back(part);
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------------------

struct PrecomputeArgs {
    std::string config;
    std::string out;
    unsigned workers = 0;
    std::vector<std::string> overrides;
};

AcceptableErrorMap build_map(const Scenario& s, unsigned workers) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    auto now = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    return precompute(s.grid, *s.evaluator, workers, s.hash, now);
}

int run_precompute(const PrecomputeArgs& a) {
    Scenario s = scenario_from_json(load_with_overrides(a.config, a.overrides));
    auto start = std::chrono::steady_clock::now();
    AcceptableErrorMap map = build_map(s, a.workers);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::path out = a.out.empty() ? fs::path(s.name + ".pgam") : fs::path(a.out);
    save(map, out);
    std::cout << "scenario    " << s.name << "\n"
              << "evaluator   " << s.evaluator->name() << "\n"
              << "cells       " << s.grid.size() << "\n"
              << "acceptable  " << map.accept_bits().count() << " (" << format_double(map.acceptable_fraction()) << ")\n"
              << "unstable    " << map.unstable_bits().count() << "\n"
              << "wall time   " << format_double(seconds) << " s\n"
              << "wrote       " << out.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string map;
    std::string particles;
    std::string config;
    std::vector<std::string> overrides;
    double p_thres = kDefaultPThres;
    bool renormalize = false;
    std::vector<std::string> policies;
    PolicyConfig thresholds;
    bool json_out = false;
};

int run_evaluate(const EvaluateArgs& a) {
    AcceptableErrorMap map = load(a.map);
    ParticleSet ps = read_particles(fs::path(a.particles));

    std::string warning;
    bool executable = true;
    if (!a.config.empty()) {
        Scenario s = scenario_from_json(load_with_overrides(a.config, a.overrides));
        if (!(s.grid == map.grid())) throw GridMismatch("scenario grid differs from the map's grid");
        warning = provenance_warning(map, s.hash);
        executable = s.evaluator->executable(ps.estimate());
    }

    ErrorDistribution d = threshold(bin(ps, map.grid()), a.p_thres, a.renormalize);
    SuccessEstimate est = success_probability(d, map);

    std::vector<std::pair<std::string, Decision>> decisions;
    for (const auto& name : split_list(a.policies)) {
        auto kind = parse_policy(name);
        if (!kind) throw ConfigError("unknown policy '" + name + "'");
        PolicyConfig p = a.thresholds;
        p.kind = *kind;
        decisions.emplace_back(std::string(short_name(*kind)), decide(p, ps, d, map, executable));
    }

    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    if (a.json_out) {
        json out = {{"probability", est.probability},
                    {"unacceptable_mass", est.unacceptable_mass},
                    {"discarded_mass", est.discarded_mass},
                    {"support_size", est.support_size},
                    {"executable", executable}};
        json dec = json::object();
        for (const auto& [name, decision] : decisions) dec[name] = to_string(decision);
        out["decisions"] = dec;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "probability        " << format_double(est.probability) << "\n"
                  << "support size       " << est.support_size << "\n"
                  << "discarded mass     " << format_double(est.discarded_mass) << "\n"
                  << "unacceptable mass  " << format_double(est.unacceptable_mass) << "\n";
        for (const auto& [name, decision] : decisions) std::cout << name << ": " << to_string(decision) << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::vector<std::string> policies;
    std::string format = "markdown";
    std::string out;
    bool build_missing = false;
    std::string maps_dir;
    unsigned workers = 0;
};

int run_simulate(const SimulateArgs& a) {
    json j = load_with_overrides(a.config, a.overrides);
    if (!a.maps_dir.empty()) j["maps_dir"] = fs::absolute(a.maps_dir).string();
    if (!a.policies.empty()) j["policies"] = split_list(a.policies);
    ExperimentSpec spec = experiment_from_json(j, fs::path(a.config).parent_path());

    auto format = parse_report_format(a.format);
    if (!format) throw ConfigError("unknown report format '" + a.format + "'");

    std::vector<AcceptableErrorMap> maps;
    maps.reserve(spec.config.scenarios.size());
    for (std::size_t i = 0; i < spec.config.scenarios.size(); ++i) {
        const Scenario& s = spec.config.scenarios[i];
        const fs::path& path = spec.map_paths[i];
        if (fs::exists(path)) {
            maps.push_back(load(path));
            if (!(maps.back().grid() == s.grid)) throw GridMismatch("map " + path.string() + " does not match scenario grid");
            if (auto w = provenance_warning(maps.back(), s.hash); !w.empty()) std::cerr << "warning: " << path.string() << ": " << w << "\n";
        } else if (a.build_missing) {
            std::cerr << "building " << path.string() << " (" << s.grid.size() << " cells)\n";
            maps.push_back(build_map(s, a.workers));
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            save(maps.back(), path);
        } else {
            throw MapFileError(MapFileError::Kind::io, "missing map " + path.string() + " (use --build-missing)");
        }
    }
    std::vector<const AcceptableErrorMap*> ptrs;
    for (const auto& m : maps) ptrs.push_back(&m);

    ExperimentReport report = run_experiment(spec.config, ptrs, a.trials, a.seed.value_or(spec.config.seed), a.workers);
    std::string text = render_report(report, *format);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(a.out);
        if (!(f << text)) throw MapFileError(MapFileError::Kind::io, "cannot write " + a.out);
    }
    return kOk;
}

// ---------------------------------------------------------------------------

int run_report(const std::string& in, const std::string& format_name) {
    auto format = parse_report_format(format_name);
    if (!format) throw ConfigError("unknown report format '" + format_name + "'");
    std::ifstream f(in);
    if (!f) throw MapFileError(MapFileError::Kind::io, "cannot open " + in);
    std::stringstream ss;
    ss << f.rdbuf();
    std::cout << render_report(parse_csv_report(ss.str()), *format);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task success prediction from acceptable and estimated pose-error spaces"};
    app.require_subcommand(1);

    PrecomputeArgs pre;
    auto* pre_cmd = app.add_subcommand("precompute", "Build the acceptable error map of a scenario");
    pre_cmd->add_option("-c,--config", pre.config, "Scenario JSON")->required();
    pre_cmd->add_option("-o,--out", pre.out, "Output .pgam path (default <name>.pgam)");
    pre_cmd->add_option("-w,--workers", pre.workers, "Worker threads (0 = hardware)");
    pre_cmd->add_option("--set", pre.overrides, "Config override key.path=value");

    EvaluateArgs ev;
    ev.policies = {"OURS"};
    auto* ev_cmd = app.add_subcommand("evaluate", "Success probability and decisions for one particle set");
    ev_cmd->add_option("-m,--map", ev.map, ".pgam map")->required();
    ev_cmd->add_option("-p,--particles", ev.particles, ".particles file")->required();
    ev_cmd->add_option("-c,--config", ev.config, "Scenario JSON; checks grid and provenance, enables the executable check");
    ev_cmd->add_option("--set", ev.overrides, "Config override key.path=value");
    ev_cmd->add_option("--p-thres", ev.p_thres, "Cell mass threshold")->check(CLI::NonNegativeNumber);
    ev_cmd->add_flag("--renormalize", ev.renormalize, "Rescale retained mass to one after thresholding");
    ev_cmd->add_option("--policy", ev.policies, "Policies to decide (BE, VC, GU, OURS; comma separated)");
    ev_cmd->add_option("--vc-threshold", ev.thresholds.vc_threshold)->check(CLI::Range(0.0, 1.0));
    ev_cmd->add_option("--gu-alpha", ev.thresholds.gu_alpha)->check(CLI::Range(0.0, 1.0));
    ev_cmd->add_option("--ours-threshold", ev.thresholds.ours_threshold)->check(CLI::Range(0.0, 1.0));
    ev_cmd->add_flag("--json", ev.json_out, "JSON output");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run an experiment and print the report");
    sim_cmd->add_option("-c,--config", sim.config, "Experiment JSON")->required();
    sim_cmd->add_option("--set", sim.overrides, "Config override key.path=value");
    sim_cmd->add_option("--seed", sim.seed, "Experiment seed (default from config)");
    sim_cmd->add_option("--trials", sim.trials, "Trials per (scenario, occlusion level), overriding the config")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--policies", sim.policies, "Policies to run (comma separated)");
    sim_cmd->add_option("-f,--format", sim.format, "markdown, csv or plot");
    sim_cmd->add_option("-o,--out", sim.out, "Report path (default stdout)");
    sim_cmd->add_flag("--build-missing", sim.build_missing, "Precompute maps that do not exist yet");
    sim_cmd->add_option("--maps-dir", sim.maps_dir, "Directory holding <scenario>.pgam maps");
    sim_cmd->add_option("-w,--workers", sim.workers, "Worker threads (0 = hardware)");

    std::string report_in, report_format = "markdown";
    auto* rep_cmd = app.add_subcommand("report", "Re-render a csv report");
    rep_cmd->add_option("-i,--in", report_in, "csv report")->required();
    rep_cmd->add_option("-f,--format", report_format, "markdown, csv or plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*pre_cmd) return run_precompute(pre);
        if (*ev_cmd) return run_evaluate(ev);
        if (*sim_cmd) return run_simulate(sim);
        if (*rep_cmd) return run_report(report_in, report_format);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NominalFailure& e) {
        std::cerr << "nominal failure: " << e.what() << "\n";
        return kNominalFailure;
    } catch (const GridMismatch& e) {
        std::cerr << "grid mismatch: " << e.what() << "\n";
        return kGridMismatch;
    } catch (const MapFileError& e) {
        std::cerr << "map error: " << e.what() << "\n";
        return kIoError;
    } catch (const ParticleFileError& e) {
        std::cerr << "particle file error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoError;
    }
    return kOk;
}
