#include "pgam/error_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pgam {

namespace {

constexpr double kDivisibilityTolerance = 1e-9;
constexpr double kRangeSlack = 1e-9;

const char* axis_name(int axis) {
    static constexpr const char* names[kAxes] = {"t_x", "t_y", "t_z", "r_x", "r_y", "r_z"};
    return names[axis];
}

}  // namespace

ErrorGrid ErrorGrid::build(const AxisArray& limits, const AxisArray& steps, std::uint64_t cell_cap) {
    ErrorGrid g;
    for (int a = 0; a < kAxes; ++a) {
        double limit = limits[a];
        double step = steps[a];
        if (!std::isfinite(limit) || limit < 0) {
            throw GridError(std::string("axis ") + axis_name(a) + ": limit must be finite and >= 0");
        }
        if (a >= 3 && limit > kPi + kDivisibilityTolerance) {
            throw GridError(std::string("axis ") + axis_name(a) + ": angular limit exceeds 180 degrees");
        }
        if (limit == 0) {
            g.limits_[a] = 0;
            g.steps_[a] = 0;
            g.counts_[a] = 1;
            continue;
        }
        if (!std::isfinite(step) || step <= 0) {
            throw GridError(std::string("axis ") + axis_name(a) + ": step must be > 0 on a non-degenerate axis");
        }
        double ratio = limit / step;
        double whole = std::round(ratio);
        if (whole < 1 || std::abs(ratio - whole) > kDivisibilityTolerance * std::max(1.0, ratio)) {
            std::ostringstream msg;
            msg << "axis " << axis_name(a) << ": limit " << limit << " is not an integer multiple of step " << step;
            throw GridError(msg.str());
        }
        g.limits_[a] = limit;
        g.steps_[a] = step;
        g.counts_[a] = 2 * static_cast<int>(whole) + 1;
    }

    // Guard the product against overflow before comparing with the cap.
    long double total = 1;
    for (int a = 0; a < kAxes; ++a) total *= g.counts_[a];
    if (total > static_cast<long double>(cell_cap)) {
        std::ostringstream msg;
        msg << "grid has " << static_cast<double>(total) << " cells, above the cap of " << cell_cap;
        throw GridError(msg.str());
    }

    std::uint64_t stride = 1;
    for (int a = kAxes - 1; a >= 0; --a) {
        g.strides_[a] = stride;
        stride *= static_cast<std::uint64_t>(g.counts_[a]);
    }
    g.size_ = stride;
    return g;
}

std::vector<int> ErrorGrid::active_axes() const {
    std::vector<int> axes;
    for (int a = 0; a < kAxes; ++a) {
        if (!degenerate(a)) axes.push_back(a);
    }
    return axes;
}

bool ErrorGrid::full_turn(int axis) const { return axis >= 3 && limits_[axis] >= kPi - kDivisibilityTolerance; }

Quantized ErrorGrid::quantize(const ErrorVector& e) const {
    Quantized q;
    std::array<int, kAxes> offsets{};
    for (int a = 0; a < kAxes; ++a) {
        double v = e[a];
        if (a >= 3 && std::abs(v) > kPi + kRangeSlack) v = wrap_angle(v);
        int half = half_count(a);
        if (half == 0) {
            if (std::abs(v) > kRangeSlack) q.out_of_range = true;
            continue;
        }
        if (!full_turn(a) && std::abs(v) > limits_[a] + kRangeSlack) q.out_of_range = true;
        double k = std::round(v / steps_[a]);
        offsets[a] = static_cast<int>(std::clamp(k, -static_cast<double>(half), static_cast<double>(half)));
    }
    q.index = flatten(offsets);
    return q;
}

ErrorVector ErrorGrid::cell_center(CellIndex i) const {
    auto offsets = unflatten(i);
    ErrorVector e;
    for (int a = 0; a < kAxes; ++a) e[a] = offsets[a] * steps_[a];
    return e;
}

std::array<int, kAxes> ErrorGrid::unflatten(CellIndex i) const {
    if (i >= size_) throw std::out_of_range("cell index " + std::to_string(i) + " >= " + std::to_string(size_));
    std::array<int, kAxes> offsets{};
    for (int a = 0; a < kAxes; ++a) {
        offsets[a] = static_cast<int>(i / strides_[a]) - half_count(a);
        i %= strides_[a];
    }
    return offsets;
}

CellIndex ErrorGrid::flatten(const std::array<int, kAxes>& offsets) const {
    CellIndex i = 0;
    for (int a = 0; a < kAxes; ++a) {
        int k = offsets[a] + half_count(a);
        if (k < 0 || k >= counts_[a]) throw std::out_of_range(std::string("offset out of range on axis ") + axis_name(a));
        i += static_cast<CellIndex>(k) * strides_[a];
    }
    return i;
}

CellRange::CellRange(const ErrorGrid& grid, CellIndex first, CellIndex last) : grid_(&grid), first_(first), last_(last) {
    if (first > last || last > grid.size()) throw std::out_of_range("invalid cell range");
}

CellRange iter_cells(const ErrorGrid& grid) { return {grid, 0, grid.size()}; }

std::vector<CellRange> partition_cells(const ErrorGrid& grid, unsigned parts) {
    if (parts == 0) throw std::invalid_argument("partition count must be positive");
    std::vector<CellRange> ranges;
    ranges.reserve(parts);
    std::uint64_t n = grid.size();
    for (unsigned p = 0; p < parts; ++p) {
        CellIndex first = n * p / parts;
        CellIndex last = n * (p + 1) / parts;
        ranges.emplace_back(grid, first, last);
    }
    return ranges;
}

}  // namespace pgam
