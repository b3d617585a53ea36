#pragma once

#include <array>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pgam/se3.hpp"

namespace pgam {

inline constexpr int kAxes = 6;
inline constexpr std::uint64_t kDefaultCellCap = 16'000'000;

using CellIndex = std::uint64_t;
using AxisArray = std::array<double, kAxes>;

class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Quantized {
    CellIndex index = 0;
    bool out_of_range = false;
};

// Regular 6D grid over the error chart, axes ordered t_x, t_y, t_z, r_x, r_y, r_z.
// Flat index is row-major with t_x slowest and r_z fastest.
class ErrorGrid {
public:
    // limits/steps in meters (t axes) and radians (r axes). Each limit must be an
    // integer multiple of its step; a zero limit makes the axis degenerate.
    static ErrorGrid build(const AxisArray& limits, const AxisArray& steps, std::uint64_t cell_cap = kDefaultCellCap);

    const AxisArray& limits() const { return limits_; }
    const AxisArray& steps() const { return steps_; }
    int count(int axis) const { return counts_[axis]; }
    int half_count(int axis) const { return (counts_[axis] - 1) / 2; }
    std::uint64_t size() const { return size_; }
    CellIndex center_index() const { return size_ / 2; }
    bool degenerate(int axis) const { return counts_[axis] == 1; }
    std::vector<int> active_axes() const;

    Quantized quantize(const ErrorVector& e) const;
    ErrorVector cell_center(CellIndex i) const;

    std::array<int, kAxes> unflatten(CellIndex i) const;  // signed per-axis offsets from center
    CellIndex flatten(const std::array<int, kAxes>& offsets) const;

    // Parameter-exact comparison (bitwise equal limits and steps).
    bool operator==(const ErrorGrid& other) const { return limits_ == other.limits_ && steps_ == other.steps_; }

private:
    ErrorGrid() = default;
    bool full_turn(int axis) const;

    AxisArray limits_{};
    AxisArray steps_{};
    std::array<int, kAxes> counts_{};
    std::array<std::uint64_t, kAxes> strides_{};
    std::uint64_t size_ = 1;
};

// Half-open flat-index range; yields (index, cell center) pairs in index order.
class CellRange {
public:
    class iterator {
    public:
        using value_type = std::pair<CellIndex, ErrorVector>;
        using difference_type = std::ptrdiff_t;
        using iterator_category = std::input_iterator_tag;

        iterator(const ErrorGrid* grid, CellIndex i) : grid_(grid), i_(i) {}
        value_type operator*() const { return {i_, grid_->cell_center(i_)}; }
        iterator& operator++() {
            ++i_;
            return *this;
        }
        iterator operator++(int) {
            iterator tmp = *this;
            ++i_;
            return tmp;
        }
        bool operator==(const iterator& o) const { return i_ == o.i_; }

    private:
        const ErrorGrid* grid_;
        CellIndex i_;
    };

    CellRange(const ErrorGrid& grid, CellIndex first, CellIndex last);

    iterator begin() const { return {grid_, first_}; }
    iterator end() const { return {grid_, last_}; }
    CellIndex first() const { return first_; }
    CellIndex last() const { return last_; }
    std::uint64_t size() const { return last_ - first_; }

private:
    const ErrorGrid* grid_;
    CellIndex first_;
    CellIndex last_;
};

CellRange iter_cells(const ErrorGrid& grid);

// Splits [0, N) into `parts` disjoint contiguous ranges covering every cell.
std::vector<CellRange> partition_cells(const ErrorGrid& grid, unsigned parts);

}  // namespace pgam
