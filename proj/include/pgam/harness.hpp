#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgam/acceptable_space.hpp"
#include "pgam/decision.hpp"
#include "pgam/pose_distribution.hpp"
#include "pgam/task_evaluators.hpp"

namespace pgam {

// One observation step. `occlusion` is the fraction of the trial's occlusion
// still present from this viewpoint; `texture_exposure` is how much of the
// object's unique texture this viewpoint shows.
struct Viewpoint {
    std::array<double, kAxes> noise_scale{1, 1, 1, 1, 1, 1};
    double occlusion = 1.0;
    double texture_exposure = 0.0;
};

struct ViewpointSchedule {
    std::vector<Viewpoint> viewpoints;
    int max_views = 0;  // 0 means all viewpoints

    int view_count() const;
    void validate() const;
};

// Synthetic stand-in for a pose estimator. Noise grows with occlusion;
// symmetry modes carry mass unless unique texture is seen, which collapses
// them for that view.
struct EstimatorModel {
    NoiseSigmas noise{};                 // meters / radians at zero occlusion
    double occlusion_noise_gain = 0.0;   // sigma × (1 + gain·occlusion)
    std::vector<ErrorVector> symmetry_modes;  // alternatives to the true mode
    double ambiguity = 0.0;              // symmetry-mode mass at zero occlusion
    double occlusion_ambiguity_gain = 0.0;
    double texture = 1.0;                // P(collapse) = texture · exposure
    double confusion = 0.0;              // P(estimate locks onto a wrong mode) = confusion · mode mass

    void validate() const;
};

struct VisualConfidenceModel {
    double occlusion_gain = 1.0;  // confidence = 1 - gain·occlusion + noise
    double noise = 0.05;
};

struct Scenario {
    std::string name;
    ErrorGrid grid;
    std::shared_ptr<const TaskEvaluator> evaluator;
    Pose truth;  // true object pose in the estimator's frame
    EstimatorModel estimator;
    std::uint64_t hash = 0;
};

struct HarnessOptions {
    std::size_t particles = 500;
    double p_thres = kDefaultPThres;
    bool renormalize = false;
    VisualConfidenceModel visual_confidence;
};

// Deterministic synthetic observation for one (trial, view).
ParticleSet observe(const Scenario& scenario, const Viewpoint& view, double trial_occlusion, const Pose& truth,
                    std::uint64_t seed, const HarnessOptions& options);

enum class TrialOutcome { success, success_unstable, failure, not_attempted };

std::string_view to_string(TrialOutcome o);

struct TrialRecord {
    PolicyKind policy = PolicyKind::ours;
    std::string scenario;
    double occlusion = 0;
    int views_used = 0;
    bool attempted = false;
    TrialOutcome outcome = TrialOutcome::not_attempted;
};

TrialRecord run_trial(const ViewpointSchedule& schedule, const Scenario& scenario, const AcceptableErrorMap& map,
                      const PolicyConfig& policy, const Pose& truth, double trial_occlusion, std::uint64_t seed,
                      const HarnessOptions& options);

struct OcclusionLevel {
    double occlusion = 0;
    int trials = 1;
};

struct ExperimentConfig {
    std::string task;
    std::vector<Scenario> scenarios;
    ViewpointSchedule schedule;
    std::vector<OcclusionLevel> occlusion_levels;
    std::vector<PolicyConfig> policies;
    HarnessOptions options;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ReportRow {
    std::string method;
    std::string object;  // "All" for the per-method aggregate
    int trials = 0;
    int attempts = 0;
    int successes = 0;
    int unstable = 0;
    int failures = 0;
    double avg_views = 0;

    bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::vector<TrialRecord> records;

    const ReportRow* find(std::string_view method, std::string_view object) const;
};

// Seed derivation shared by every policy, so all policies see the same
// observation stream within a trial.
std::uint64_t trial_seed(std::uint64_t experiment_seed, std::size_t scenario, std::size_t level, std::size_t trial);
std::uint64_t view_seed(std::uint64_t trial_seed, int view);

// maps[i] belongs to config.scenarios[i]. trials_per_cell, when set,
// overrides every occlusion level's trial count.
ExperimentReport run_experiment(const ExperimentConfig& config, const std::vector<const AcceptableErrorMap*>& maps,
                                std::optional<int> trials_per_cell, std::uint64_t seed, unsigned workers = 0);

std::vector<ReportRow> summarize(const std::vector<TrialRecord>& records, const std::vector<std::string>& methods,
                                 const std::vector<std::string>& objects);

enum class ReportFormat { markdown, csv, plot };

std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string render_report(const ExperimentReport& report, ReportFormat format);
ExperimentReport parse_csv_report(std::string_view csv);

}  // namespace pgam
