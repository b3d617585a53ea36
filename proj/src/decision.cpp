#include "pgam/decision.hpp"

#include <cctype>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace pgam {

SuccessEstimate success_probability(const ErrorDistribution& d, const AcceptableErrorMap& map) {
    if (!(d.grid() == map.grid())) throw GridMismatch("distribution grid differs from acceptable-map grid");
    SuccessEstimate est;
    for (const auto& [i, w] : d.weights()) {
        if (map.is_acceptable(i)) {
            est.probability += w;
        } else {
            est.unacceptable_mass += w;
        }
    }
    est.probability /= d.total_weight();
    est.unacceptable_mass /= d.total_weight();
    est.discarded_mass = d.discarded_mass();
    est.support_size = d.support_size();
    return est;
}

// ---------------------------------------------------------------------------

double hz_beta(std::size_t n, std::size_t d) {
    double dd = static_cast<double>(d);
    return std::pow((2 * dd + 1) * static_cast<double>(n) / 4, 1 / (dd + 4)) / std::sqrt(2.0);
}

double hz_pvalue(double statistic, std::size_t n, std::size_t d) {
    const double p = static_cast<double>(d);
    const double b = hz_beta(n, d);
    const double b2 = b * b, b4 = b2 * b2, b8 = b4 * b4;
    const double a = 1 + 2 * b2;
    const double w = (1 + b2) * (1 + 3 * b2);
    const double mu = 1 - std::pow(a, -p / 2) * (1 + p * b2 / a + p * (p + 2) * b4 / (2 * a * a));
    const double var = 2 * std::pow(1 + 4 * b2, -p / 2) +
                       2 * std::pow(a, -p) * (1 + 2 * p * b4 / (a * a) + 3 * p * (p + 2) * b8 / (4 * std::pow(a, 4))) -
                       4 * std::pow(w, -p / 2) * (1 + 3 * p * b4 / (2 * w) + p * (p + 2) * b8 / (2 * w * w));
    const double log_mu = std::log(std::sqrt(std::pow(mu, 4) / (var + mu * mu)));
    const double log_sigma = std::sqrt(std::log((var + mu * mu) / (mu * mu)));
    if (!(statistic > 0)) return 1.0;
    double z = (std::log(statistic) - log_mu) / log_sigma;
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

HzResult hz_normality(const Eigen::MatrixXd& samples, double alpha) {
    const auto n = static_cast<std::size_t>(samples.rows());
    const auto d = static_cast<std::size_t>(samples.cols());
    if (d == 0 || n <= d + 1) throw std::invalid_argument("normality test needs more than dimension + 1 samples");
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must be in (0, 1)");

    Eigen::RowVectorXd mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);

    HzResult result;
    const double trace = cov.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (trace > 0 && eig.eigenvalues().minCoeff() <= 1e-12 * trace) {
        cov += Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) * (1e-12 * trace);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (!(trace > 0) || llt.info() != Eigen::Success) {
        result.degenerate = true;
        result.statistic = 4.0 * static_cast<double>(n);
        result.p_value = 0;
        result.rejected = true;
        return result;
    }

    // Rows of y are whitened samples: D_ij = |y_i - y_j|^2, D_i = |y_i|^2.
    Eigen::MatrixXd y = llt.matrixL().solve(centered.transpose()).transpose();
    Eigen::VectorXd sq = y.rowwise().squaredNorm();
    Eigen::MatrixXd gram = y * y.transpose();

    const double b2 = std::pow(hz_beta(n, d), 2);
    const double dd = static_cast<double>(d);
    double pair_sum = 0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
            double dij = std::max(0.0, sq[i] + sq[j] - 2 * gram(i, j));
            pair_sum += std::exp(-b2 / 2 * dij);
        }
    }
    double center_sum = 0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) center_sum += std::exp(-b2 / (2 * (1 + b2)) * sq[i]);

    const double nn = static_cast<double>(n);
    result.statistic = pair_sum / nn - 2 * std::pow(1 + b2, -dd / 2) * center_sum + nn * std::pow(1 + 2 * b2, -dd / 2);
    result.p_value = hz_pvalue(result.statistic, n, d);
    result.rejected = result.p_value < alpha;
    return result;
}

// ---------------------------------------------------------------------------

std::string_view short_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::blind_execution: return "BE";
        case PolicyKind::visual_confidence: return "VC";
        case PolicyKind::gaussian_uncertainty: return "GU";
        case PolicyKind::ours: return "OURS";
    }
    return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view s) {
    std::string lower(s);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "be" || lower == "blind") return PolicyKind::blind_execution;
    if (lower == "vc" || lower == "visual") return PolicyKind::visual_confidence;
    if (lower == "gu" || lower == "gaussian") return PolicyKind::gaussian_uncertainty;
    if (lower == "ours") return PolicyKind::ours;
    return std::nullopt;
}

void PolicyConfig::validate() const {
    if (!(vc_threshold >= 0 && vc_threshold <= 1)) throw std::invalid_argument("vc_threshold must be in [0, 1]");
    if (!(gu_alpha > 0 && gu_alpha < 1)) throw std::invalid_argument("gu_alpha must be in (0, 1)");
    if (!(ours_threshold >= 0 && ours_threshold <= 1)) throw std::invalid_argument("ours_threshold must be in [0, 1]");
}

std::string_view to_string(Decision d) { return d == Decision::execute ? "execute" : "defer"; }

Eigen::MatrixXd gu_samples(const ParticleSet& ps, const ErrorGrid& grid) {
    const auto axes = grid.active_axes();
    const auto errors = ps.errors();
    const auto& particles = ps.particles();
    const std::size_t n = particles.size();

    bool uniform = true;
    for (const auto& p : particles) uniform = uniform && p.weight == particles.front().weight;

    std::vector<std::size_t> rows;
    rows.reserve(n);
    if (uniform) {
        for (std::size_t i = 0; i < n; ++i) rows.push_back(i);
    } else {
        double total = 0;
        for (const auto& p : particles) total += p.weight;
        double cumulative = particles[0].weight / total;
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            while (u > cumulative && k + 1 < n) cumulative += particles[++k].weight / total;
            rows.push_back(k);
        }
    }

    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(axes.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < axes.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = errors[rows[r]][axes[c]];
        }
    }
    return out;
}

Decision decide(const PolicyConfig& policy, const ParticleSet& ps, const ErrorDistribution& d, const AcceptableErrorMap& map,
                bool executable) {
    if (!executable) return Decision::defer;
    switch (policy.kind) {
        case PolicyKind::blind_execution:
            return Decision::execute;
        case PolicyKind::visual_confidence:
            return ps.visual_confidence() > policy.vc_threshold ? Decision::execute : Decision::defer;
        case PolicyKind::gaussian_uncertainty: {
            Eigen::MatrixXd samples = gu_samples(ps, map.grid());
            if (samples.cols() == 0 || samples.rows() <= samples.cols() + 1) return Decision::defer;
            return hz_normality(samples, policy.gu_alpha).rejected ? Decision::defer : Decision::execute;
        }
        case PolicyKind::ours:
            return success_probability(d, map).probability > policy.ours_threshold ? Decision::execute : Decision::defer;
    }
    return Decision::defer;
}

}  // namespace pgam
