#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "pgam/acceptable_space.hpp"
#include "pgam/pose_distribution.hpp"

namespace pgam {

class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SuccessEstimate {
    double probability = 0;        // acceptable mass within E_est
    double unacceptable_mass = 0;  // E_est mass outside E_acc
    double discarded_mass = 0;     // out-of-range and sub-threshold mass
    std::size_t support_size = 0;
};

// Σ over E_est of 1_acc(ε_n) · P(ε_n | Ô). Grids must be parameter-exact.
SuccessEstimate success_probability(const ErrorDistribution& d, const AcceptableErrorMap& map);

// ---------------------------------------------------------------------------
// Henze–Zirkler multivariate normality test.

struct HzResult {
    double statistic = 0;
    double p_value = 1;
    bool rejected = false;
    bool degenerate = false;  // covariance singular even after regularization
};

// Rows are samples. Requires rows > cols + 1. Uses the MLE covariance, the
// standard smoothing parameter and the lognormal approximation of the null.
HzResult hz_normality(const Eigen::MatrixXd& samples, double alpha);

// Smoothing parameter β(n, d) and the lognormal null moments, exposed for tests.
double hz_beta(std::size_t n, std::size_t d);
double hz_pvalue(double statistic, std::size_t n, std::size_t d);

// ---------------------------------------------------------------------------
// Execute/defer policies.

enum class PolicyKind { blind_execution, visual_confidence, gaussian_uncertainty, ours };

std::string_view short_name(PolicyKind k);  // BE, VC, GU, OURS
std::optional<PolicyKind> parse_policy(std::string_view s);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::ours;
    double vc_threshold = 0.5;
    double gu_alpha = 0.05;
    double ours_threshold = 0.6;

    void validate() const;
};

enum class Decision { execute, defer };

std::string_view to_string(Decision d);

// GU runs the normality test on the particle errors restricted to the grid's
// non-degenerate axes; unequal weights are resampled systematically first.
// Every threshold is a strict "exceeds".
Decision decide(const PolicyConfig& policy, const ParticleSet& ps, const ErrorDistribution& d, const AcceptableErrorMap& map,
                bool executable);

// Error samples used by GU, one row per (resampled) particle.
Eigen::MatrixXd gu_samples(const ParticleSet& ps, const ErrorGrid& grid);

}  // namespace pgam
