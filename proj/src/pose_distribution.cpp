#include "pgam/pose_distribution.hpp"

#include <optional>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

namespace pgam {

ParticleSet::ParticleSet(Pose estimate, std::vector<Particle> particles, double visual_confidence)
    : estimate_(std::move(estimate)), particles_(std::move(particles)), visual_confidence_(visual_confidence) {
    if (particles_.empty()) throw std::invalid_argument("particle set must not be empty");
    if (!(visual_confidence_ >= 0 && visual_confidence_ <= 1)) throw std::invalid_argument("visual confidence must be in [0, 1]");
    for (const auto& p : particles_) {
        if (!(p.weight >= 0) || !std::isfinite(p.weight)) throw std::invalid_argument("particle weights must be finite and >= 0");
    }
}

ParticleSet ParticleSet::normalized() const {
    double total = 0;
    for (const auto& p : particles_) total += p.weight;
    if (!(total > 0)) throw std::invalid_argument("particle weights sum to zero");
    std::vector<Particle> out = particles_;
    for (auto& p : out) p.weight /= total;
    return {estimate_, std::move(out), visual_confidence_};
}

std::vector<ErrorVector> ParticleSet::errors() const {
    std::vector<ErrorVector> out;
    out.reserve(particles_.size());
    Pose inv = invert(estimate_);
    for (const auto& p : particles_) out.push_back(from_pose(compose(inv, p.pose)));
    return out;
}

ErrorDistribution::ErrorDistribution(ErrorGrid grid, std::vector<Cell> weights, double discarded_weight, double total)
    : grid_(std::move(grid)), weights_(std::move(weights)), discarded_(discarded_weight), total_(total) {
    if (!(total_ > 0) || !std::isfinite(total_)) throw std::invalid_argument("total weight must be > 0");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i].first >= grid_.size()) throw std::out_of_range("distribution cell outside grid");
        if (!(weights_[i].second > 0)) throw std::invalid_argument("distribution masses must be > 0");
        if (i > 0 && weights_[i - 1].first >= weights_[i].first) throw std::invalid_argument("distribution cells must be sorted and unique");
    }
    if (!(discarded_ >= 0)) throw std::invalid_argument("discarded mass must be >= 0");
    mass_ = weights_;
    if (total_ != 1.0) {
        for (auto& c : mass_) c.second /= total_;
    }
}

double ErrorDistribution::retained_mass() const {
    double sum = 0;
    for (const auto& [i, w] : weights_) sum += w;
    return sum / total_;
}

double ErrorDistribution::mass_at(CellIndex i) const {
    auto it = std::lower_bound(mass_.begin(), mass_.end(), i, [](const Cell& c, CellIndex k) { return c.first < k; });
    return it != mass_.end() && it->first == i ? it->second : 0.0;
}

ErrorDistribution bin(const ParticleSet& ps, const ErrorGrid& grid) {
    std::unordered_map<CellIndex, double> acc;
    double discarded = 0, total = 0;
    Pose inv = invert(ps.estimate());
    for (const auto& p : ps.particles()) {
        total += p.weight;
        if (p.weight == 0) continue;
        Quantized q = grid.quantize(from_pose(compose(inv, p.pose)));
        if (q.out_of_range) {
            discarded += p.weight;
        } else {
            acc[q.index] += p.weight;
        }
    }
    if (!(total > 0)) throw std::invalid_argument("particle weights sum to zero");
    std::vector<ErrorDistribution::Cell> cells(acc.begin(), acc.end());
    std::sort(cells.begin(), cells.end());
    return {grid, std::move(cells), discarded, total};
}

ErrorDistribution threshold(const ErrorDistribution& d, double p_thres, bool renormalize) {
    if (!(p_thres >= 0)) throw std::invalid_argument("p_thres must be >= 0");
    std::vector<ErrorDistribution::Cell> kept;
    double discarded = d.discarded_weight();
    const auto& w = d.weights();
    const auto& m = d.cells();
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (m[k].second > p_thres) {
            kept.push_back(w[k]);
        } else {
            discarded += w[k].second;
        }
    }
    double total = d.total_weight();
    if (renormalize && !kept.empty()) {
        total = 0;
        for (const auto& c : kept) total += c.second;
        discarded = 0;
    }
    return {d.grid(), std::move(kept), discarded, total};
}

namespace {

ErrorVector draw_error(std::mt19937_64& rng, const NoiseSigmas& noise) {
    ErrorVector e;
    for (int a = 0; a < kAxes; ++a) {
        if (noise[a] > 0) e[a] = std::normal_distribution<double>(0.0, noise[a])(rng);
    }
    return e;
}

}  // namespace

ParticleSet synth_unimodal(const Pose& truth, const NoiseSigmas& noise, std::size_t n, std::uint64_t seed,
                           double visual_confidence) {
    return synth_multimodal(truth, {Mode{ErrorVector::zero(), 1.0}}, noise, n, seed, visual_confidence);
}

ParticleSet synth_multimodal(const Pose& truth, const std::vector<Mode>& modes, const NoiseSigmas& noise, std::size_t n,
                             std::uint64_t seed, double visual_confidence) {
    if (n == 0) throw std::invalid_argument("particle count must be >= 1");
    if (modes.empty()) throw std::invalid_argument("at least one mode is required");
    double total = 0;
    for (const auto& m : modes) {
        if (!(m.weight >= 0)) throw std::invalid_argument("mode weights must be >= 0");
        total += m.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mode weights must sum to 1");

    std::mt19937_64 rng(seed);
    std::vector<Pose> centers;
    std::vector<double> weights;
    for (const auto& m : modes) {
        centers.push_back(apply_error(truth, m.offset));
        weights.push_back(m.weight);
    }
    auto top = static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
    Pose estimate = apply_error(centers[top], draw_error(rng, noise));

    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::vector<Particle> particles;
    particles.reserve(n);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = modes.size() == 1 ? 0 : pick(rng);
        particles.push_back({apply_error(centers[k], draw_error(rng, noise)), w});
    }
    return {estimate, std::move(particles), visual_confidence};
}

// ---------------------------------------------------------------------------

void write_particles(std::ostream& out, const ParticleSet& ps) {
    auto put_pose = [&](const Pose& p) {
        const auto& t = p.translation();
        const auto& q = p.rotation();
        out << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w();
    };
    out << std::setprecision(17);
    out << "# estimate: tx ty tz qx qy qz qw confidence\n";
    put_pose(ps.estimate());
    out << ' ' << ps.visual_confidence() << '\n';
    out << "# particles: tx ty tz qx qy qz qw w\n";
    for (const auto& p : ps.particles()) {
        put_pose(p.pose);
        out << ' ' << p.weight << '\n';
    }
}

namespace {

bool parse_record(const std::string& line, std::array<double, 8>& v) {
    std::istringstream in(line);
    for (auto& x : v) {
        if (!(in >> x)) return false;
    }
    std::string rest;
    return !(in >> rest);
}

Pose record_pose(const std::array<double, 8>& v, std::size_t line_no) {
    Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
    if (!(q.norm() > 1e-6)) throw ParticleFileError("line " + std::to_string(line_no) + ": zero quaternion");
    return {q, Eigen::Vector3d(v[0], v[1], v[2])};
}

}  // namespace

ParticleSet read_particles(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<Pose> estimate;
    double confidence = 1.0;
    std::vector<Particle> particles;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::array<double, 8> v{};
        if (!parse_record(line, v)) throw ParticleFileError("line " + std::to_string(line_no) + ": expected 8 numbers");
        if (!estimate) {
            estimate = record_pose(v, line_no);
            confidence = v[7];
            if (!(confidence >= 0 && confidence <= 1)) throw ParticleFileError("line " + std::to_string(line_no) + ": confidence must be in [0, 1]");
        } else {
            if (!(v[7] >= 0)) throw ParticleFileError("line " + std::to_string(line_no) + ": negative weight");
            particles.push_back({record_pose(v, line_no), v[7]});
        }
    }
    if (!estimate) throw ParticleFileError("missing estimate header line");
    if (particles.empty()) throw ParticleFileError("no particles");
    return {*estimate, std::move(particles), confidence};
}

ParticleSet read_particles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParticleFileError("cannot open " + path.string());
    return read_particles(in);
}

}  // namespace pgam
