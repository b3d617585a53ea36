#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pgam/error_grid.hpp"
#include "pgam/se3.hpp"

namespace pgam {

struct Particle {
    Pose pose;
    double weight = 1.0;
};

// Weighted samples of p(x | I) together with the estimator's point estimate Ô
// and its self-reported visual confidence.
class ParticleSet {
public:
    ParticleSet(Pose estimate, std::vector<Particle> particles, double visual_confidence = 1.0);

    const Pose& estimate() const { return estimate_; }
    const std::vector<Particle>& particles() const { return particles_; }
    double visual_confidence() const { return visual_confidence_; }
    std::size_t size() const { return particles_.size(); }

    // Weights rescaled to sum to one.
    ParticleSet normalized() const;

    // Per-particle errors relative to Ô in the error chart.
    std::vector<ErrorVector> errors() const;

private:
    Pose estimate_;
    std::vector<Particle> particles_;
    double visual_confidence_;
};

// Binned mass over grid cells, sorted by cell index.
// Cells carry raw weights; mass = weight / total. Sums are taken over raw
// weights and divided once, so 3 of 5 equal particles gives exactly 0.6.
class ErrorDistribution {
public:
    using Cell = std::pair<CellIndex, double>;

    ErrorDistribution(ErrorGrid grid, std::vector<Cell> weights, double discarded_weight, double total = 1.0);

    const ErrorGrid& grid() const { return grid_; }
    const std::vector<Cell>& cells() const { return mass_; }  // normalized
    const std::vector<Cell>& weights() const { return weights_; }
    double total_weight() const { return total_; }
    double discarded_weight() const { return discarded_; }
    double discarded_mass() const { return discarded_ / total_; }
    std::size_t support_size() const { return mass_.size(); }
    double retained_mass() const;
    double mass_at(CellIndex i) const;

private:
    ErrorGrid grid_;
    std::vector<Cell> weights_;
    std::vector<Cell> mass_;
    double discarded_;
    double total_;
};

inline constexpr double kDefaultPThres = 1e-4;

// P(ε_n | Ô): each particle's error to Ô is quantized; out-of-range particles
// go to discarded mass. Weights need not be normalized.
ErrorDistribution bin(const ParticleSet& ps, const ErrorGrid& grid);

// E_est: cells with mass <= p_thres move to discarded mass. Remaining masses
// are left as is unless `renormalize` is set.
ErrorDistribution threshold(const ErrorDistribution& d, double p_thres, bool renormalize = false);

using NoiseSigmas = std::array<double, kAxes>;  // meters / radians

struct Mode {
    ErrorVector offset;  // mode location relative to the true pose
    double weight;
};

// Unimodal Gaussian cloud in the error chart around `truth`; Ô is one extra draw.
ParticleSet synth_unimodal(const Pose& truth, const NoiseSigmas& noise, std::size_t n, std::uint64_t seed,
                           double visual_confidence = 1.0);

// Mixture of unimodal clouds at truth ∘ mode.offset. Each particle picks its
// mode from the weights and carries weight 1/n; Ô is drawn from the
// highest-weight mode.
ParticleSet synth_multimodal(const Pose& truth, const std::vector<Mode>& modes, const NoiseSigmas& noise, std::size_t n,
                             std::uint64_t seed, double visual_confidence = 1.0);

// ---------------------------------------------------------------------------
// .particles text format:
//   header:   tx ty tz qx qy qz qw confidence     (estimate Ô)
//   per line: tx ty tz qx qy qz qw w
// Blank lines and lines starting with '#' are ignored.

class ParticleFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_particles(std::ostream& out, const ParticleSet& ps);
ParticleSet read_particles(std::istream& in);
ParticleSet read_particles(const std::filesystem::path& path);

}  // namespace pgam
