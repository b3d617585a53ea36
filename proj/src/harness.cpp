#include "pgam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace pgam {

int ViewpointSchedule::view_count() const {
    int n = static_cast<int>(viewpoints.size());
    return max_views > 0 ? std::min(max_views, n) : n;
}

void ViewpointSchedule::validate() const {
    if (viewpoints.empty()) throw std::invalid_argument("schedule needs at least one viewpoint");
    if (max_views < 0) throw std::invalid_argument("max_views must be >= 0");
    for (const auto& v : viewpoints) {
        if (!(v.occlusion >= 0 && v.occlusion <= 1)) throw std::invalid_argument("viewpoint occlusion must be in [0, 1]");
        if (!(v.texture_exposure >= 0 && v.texture_exposure <= 1)) throw std::invalid_argument("texture_exposure must be in [0, 1]");
        for (double s : v.noise_scale) {
            if (!(s >= 0)) throw std::invalid_argument("noise scales must be >= 0");
        }
    }
}

void EstimatorModel::validate() const {
    for (double s : noise) {
        if (!(s >= 0)) throw std::invalid_argument("estimator noise must be >= 0");
    }
    auto unit = [](double v, const char* what) {
        if (!(v >= 0 && v <= 1)) throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
    };
    unit(ambiguity, "ambiguity");
    unit(texture, "texture");
    unit(confusion, "confusion");
    if (!(occlusion_noise_gain >= 0 && occlusion_ambiguity_gain >= 0)) throw std::invalid_argument("estimator gains must be >= 0");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

}  // namespace

std::uint64_t view_seed(std::uint64_t trial, int view) { return mix(trial, static_cast<std::uint64_t>(view)); }

std::uint64_t trial_seed(std::uint64_t experiment_seed, std::size_t scenario, std::size_t level, std::size_t trial) {
    return mix(mix(mix(experiment_seed, scenario), level), trial);
}

ParticleSet observe(const Scenario& scenario, const Viewpoint& view, double trial_occlusion, const Pose& truth,
                    std::uint64_t seed, const HarnessOptions& options) {
    const EstimatorModel& est = scenario.estimator;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double occlusion = trial_occlusion * view.occlusion;
    NoiseSigmas sigma{};
    for (int a = 0; a < kAxes; ++a) sigma[a] = est.noise[a] * view.noise_scale[a] * (1 + est.occlusion_noise_gain * occlusion);

    const bool collapsed = unit(rng) < est.texture * view.texture_exposure;
    double alt_mass = 0;
    if (!collapsed && !est.symmetry_modes.empty()) {
        alt_mass = std::clamp(est.ambiguity + est.occlusion_ambiguity_gain * occlusion, 0.0, 1.0);
    }

    std::vector<Mode> modes{{ErrorVector::zero(), 1.0 - alt_mass}};
    if (alt_mass > 0) {
        const double each = alt_mass / static_cast<double>(est.symmetry_modes.size());
        for (const auto& m : est.symmetry_modes) modes.push_back({m, each});
        if (unit(rng) < est.confusion * alt_mass) {
            std::size_t wrong = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(est.symmetry_modes.size()));
            wrong = std::min(wrong, modes.size() - 1);
            std::swap(modes[0].weight, modes[wrong].weight);
        }
    }

    const auto& vc = options.visual_confidence;
    double jitter = vc.noise > 0 ? std::normal_distribution<double>(0.0, vc.noise)(rng) : 0.0;
    double confidence = std::clamp(1 - vc.occlusion_gain * occlusion + jitter, 0.0, 1.0);

    return synth_multimodal(truth, modes, sigma, options.particles, rng(), confidence);
}

std::string_view to_string(TrialOutcome o) {
    switch (o) {
        case TrialOutcome::success: return "success";
        case TrialOutcome::success_unstable: return "success_unstable";
        case TrialOutcome::failure: return "failure";
        case TrialOutcome::not_attempted: return "not_attempted";
    }
    return "unknown";
}

TrialRecord run_trial(const ViewpointSchedule& schedule, const Scenario& scenario, const AcceptableErrorMap& map,
                      const PolicyConfig& policy, const Pose& truth, double trial_occlusion, std::uint64_t seed,
                      const HarnessOptions& options) {
    if (!(map.grid() == scenario.grid)) throw GridMismatch("map grid differs from scenario grid for " + scenario.name);
    TrialRecord rec;
    rec.policy = policy.kind;
    rec.scenario = scenario.name;
    rec.occlusion = trial_occlusion;

    const int views = schedule.view_count();
    for (int v = 0; v < views; ++v) {
        ParticleSet ps = observe(scenario, schedule.viewpoints[static_cast<std::size_t>(v)], trial_occlusion, truth,
                                 view_seed(seed, v), options);
        ErrorDistribution d = threshold(bin(ps, scenario.grid), options.p_thres, options.renormalize);
        bool executable = scenario.evaluator->executable(ps.estimate());
        if (decide(policy, ps, d, map, executable) == Decision::execute) {
            rec.views_used = v + 1;
            rec.attempted = true;
            switch (scenario.evaluator->evaluate(error_of(ps.estimate(), truth))) {
                case Outcome::success: rec.outcome = TrialOutcome::success; break;
                case Outcome::success_unstable: rec.outcome = TrialOutcome::success_unstable; break;
                case Outcome::failure: rec.outcome = TrialOutcome::failure; break;
            }
            return rec;
        }
    }
    rec.views_used = views;
    return rec;
}

void ExperimentConfig::validate() const {
    if (scenarios.empty()) throw std::invalid_argument("experiment needs at least one scenario");
    if (occlusion_levels.empty()) throw std::invalid_argument("experiment needs at least one occlusion level");
    if (policies.empty()) throw std::invalid_argument("experiment needs at least one policy");
    if (options.particles == 0) throw std::invalid_argument("particle count must be >= 1");
    if (!(options.p_thres >= 0)) throw std::invalid_argument("p_thres must be >= 0");
    schedule.validate();
    for (const auto& l : occlusion_levels) {
        if (!(l.occlusion >= 0 && l.occlusion <= 1)) throw std::invalid_argument("occlusion levels must be in [0, 1]");
        if (l.trials < 0) throw std::invalid_argument("trial counts must be >= 0");
    }
    for (const auto& p : policies) p.validate();
    for (const auto& s : scenarios) {
        if (!s.evaluator) throw std::invalid_argument("scenario " + s.name + " has no evaluator");
        if (s.name.find_first_of(",\n") != std::string::npos) throw std::invalid_argument("scenario names must not contain commas");
        s.estimator.validate();
    }
}

ExperimentReport run_experiment(const ExperimentConfig& config, const std::vector<const AcceptableErrorMap*>& maps,
                                std::optional<int> trials_per_cell, std::uint64_t seed, unsigned workers) {
    config.validate();
    if (maps.size() != config.scenarios.size()) throw std::invalid_argument("one acceptable map per scenario is required");
    if (trials_per_cell && *trials_per_cell < 1) throw std::invalid_argument("trials_per_cell must be >= 1");

    struct Job {
        std::size_t scenario, level, trial, policy;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        if (!maps[s]) throw std::invalid_argument("missing map for scenario " + config.scenarios[s].name);
        if (!(maps[s]->grid() == config.scenarios[s].grid))
            throw GridMismatch("map grid differs from scenario grid for " + config.scenarios[s].name);
        for (std::size_t l = 0; l < config.occlusion_levels.size(); ++l) {
            int trials = trials_per_cell.value_or(config.occlusion_levels[l].trials);
            for (int t = 0; t < trials; ++t) {
                for (std::size_t p = 0; p < config.policies.size(); ++p) jobs.push_back({s, l, static_cast<std::size_t>(t), p});
            }
        }
    }

    std::vector<TrialRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        try {
            for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            const Scenario& sc = config.scenarios[job.scenario];
            records[j] = run_trial(config.schedule, sc, *maps[job.scenario], config.policies[job.policy], sc.truth,
                                   config.occlusion_levels[job.level].occlusion,
                                   trial_seed(seed, job.scenario, job.level, job.trial), config.options);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = jobs.size();
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);

    std::vector<std::string> methods, objects;
    for (const auto& p : config.policies) methods.emplace_back(short_name(p.kind));
    for (const auto& s : config.scenarios) objects.push_back(s.name);

    ExperimentReport report;
    report.rows = summarize(records, methods, objects);
    report.records = std::move(records);
    return report;
}

std::vector<ReportRow> summarize(const std::vector<TrialRecord>& records, const std::vector<std::string>& methods,
                                 const std::vector<std::string>& objects) {
    std::vector<ReportRow> rows;
    for (const auto& method : methods) {
        ReportRow all{method, "All"};
        long total_views_all = 0;
        for (const auto& object : objects) {
            ReportRow row{method, object};
            long total_views = 0;
            for (const auto& r : records) {
                if (short_name(r.policy) != method || r.scenario != object) continue;
                ++row.trials;
                total_views += r.views_used;
                if (!r.attempted) continue;
                ++row.attempts;
                if (r.outcome == TrialOutcome::failure) {
                    ++row.failures;
                } else {
                    ++row.successes;
                    if (r.outcome == TrialOutcome::success_unstable) ++row.unstable;
                }
            }
            if (row.trials == 0) continue;
            row.avg_views = static_cast<double>(total_views) / row.trials;
            all.trials += row.trials;
            all.attempts += row.attempts;
            all.successes += row.successes;
            all.unstable += row.unstable;
            all.failures += row.failures;
            total_views_all += total_views;
            rows.push_back(row);
        }
        if (all.trials == 0) continue;
        all.avg_views = static_cast<double>(total_views_all) / all.trials;
        rows.push_back(all);
    }
    return rows;
}

const ReportRow* ExperimentReport::find(std::string_view method, std::string_view object) const {
    for (const auto& r : rows) {
        if (r.method == method && r.object == object) return &r;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Rendering

std::optional<ReportFormat> parse_report_format(std::string_view s) {
    if (s == "markdown" || s == "md" || s == "markdown-table") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    if (s == "plot" || s == "plot-data") return ReportFormat::plot;
    return std::nullopt;
}

namespace {

constexpr const char* kCsvHeader = "method,object,trials,attempts,successes,unstable,failures,avg_views";

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string compact(double v) {
    std::string s = fixed(v, 2);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::markdown:
            out << "| Method | Object | Trials | Attempts | Successes | Failures | Avg. views |\n";
            out << "|---|---|---:|---:|---:|---:|---:|\n";
            for (const auto& r : report.rows) {
                out << "| " << r.method << " | " << r.object << " | " << r.trials << " | " << r.attempts << " | " << r.successes
                    << " (" << r.unstable << ") | " << r.failures << " | " << compact(r.avg_views) << " |\n";
            }
            break;
        case ReportFormat::csv:
            out << kCsvHeader << '\n';
            for (const auto& r : report.rows) {
                out << r.method << ',' << r.object << ',' << r.trials << ',' << r.attempts << ',' << r.successes << ',' << r.unstable
                    << ',' << r.failures << ',' << fixed(r.avg_views, 4) << '\n';
            }
            break;
        case ReportFormat::plot:
            out << "# method object trials attempts successes unstable failures avg_views success_rate failure_rate\n";
            for (const auto& r : report.rows) {
                double denom = r.trials > 0 ? r.trials : 1;
                out << r.method << ' ' << r.object << ' ' << r.trials << ' ' << r.attempts << ' ' << r.successes << ' ' << r.unstable
                    << ' ' << r.failures << ' ' << fixed(r.avg_views, 4) << ' ' << fixed(r.successes / denom, 4) << ' '
                    << fixed(r.failures / denom, 4) << '\n';
            }
            break;
    }
    return out.str();
}

ExperimentReport parse_csv_report(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("csv report: unexpected header");
    ExperimentReport report;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 8) throw std::invalid_argument("csv report: line " + std::to_string(line_no) + " needs 8 fields");
        try {
            ReportRow r;
            r.method = fields[0];
            r.object = fields[1];
            r.trials = std::stoi(fields[2]);
            r.attempts = std::stoi(fields[3]);
            r.successes = std::stoi(fields[4]);
            r.unstable = std::stoi(fields[5]);
            r.failures = std::stoi(fields[6]);
            r.avg_views = std::stod(fields[7]);
            report.rows.push_back(r);
        } catch (const std::logic_error&) {
            throw std::invalid_argument("csv report: line " + std::to_string(line_no) + " has a malformed number");
        }
    }
    return report;
}

}  // namespace pgam
