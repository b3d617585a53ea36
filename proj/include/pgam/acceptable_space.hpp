#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgam/error_grid.hpp"
#include "pgam/task_evaluators.hpp"

namespace pgam {

// Fixed-length bitset packed LSB-first into bytes; the byte layout is the
// on-disk payload format.
class BitSet {
public:
    BitSet() = default;
    explicit BitSet(std::uint64_t size) : size_(size), bytes_((size + 7) / 8, 0) {}

    std::uint64_t size() const { return size_; }
    bool test(std::uint64_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1u; }
    void set(std::uint64_t i) { bytes_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7)); }
    std::uint64_t count() const;
    bool is_subset_of(const BitSet& other) const;

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

    bool operator==(const BitSet&) const = default;

private:
    std::uint64_t size_ = 0;
    std::vector<std::uint8_t> bytes_;
};

struct Provenance {
    std::string evaluator;  // at most 31 bytes are stored
    std::uint64_t scenario_hash = 0;
    std::int64_t created_unix = 0;

    bool operator==(const Provenance&) const = default;
};

// E_acc as two bitsets over the grid: accepted cells and the subset whose
// success was unstable.
class AcceptableErrorMap {
public:
    AcceptableErrorMap(ErrorGrid grid, BitSet accept, BitSet unstable, Provenance provenance);

    const ErrorGrid& grid() const { return grid_; }
    const BitSet& accept_bits() const { return accept_; }
    const BitSet& unstable_bits() const { return unstable_; }
    const Provenance& provenance() const { return provenance_; }

    // Indicator of E_acc; throws std::out_of_range for i >= N.
    bool is_acceptable(CellIndex i) const;
    bool is_unstable(CellIndex i) const;
    double acceptable_fraction() const;

    bool operator==(const AcceptableErrorMap& o) const {
        return grid_ == o.grid_ && accept_ == o.accept_ && unstable_ == o.unstable_ && provenance_ == o.provenance_;
    }

private:
    ErrorGrid grid_;
    BitSet accept_;
    BitSet unstable_;
    Provenance provenance_;
};

class NominalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Evaluates every cell; output is independent of `workers`. Throws
// NominalFailure when the zero-error cell is not a success.
AcceptableErrorMap precompute(const ErrorGrid& grid, const TaskEvaluator& evaluator, unsigned workers,
                              std::uint64_t scenario_hash = 0, std::int64_t created_unix = 0);

// ---------------------------------------------------------------------------
// .pgam file format, all integers and floats little-endian:
//
//   0  char[4]   magic "PGAM"
//   4  u32       format version (1)
//   8  f64[12]   (limit, step) per axis t_x..r_z, meters / radians
// 104  u64       cell count N
// 112  u64       scenario hash
// 120  i64       creation time, unix seconds (not covered by the checksum)
// 128  char[32]  evaluator name, NUL padded
// 160  u32       CRC-32 (zlib polynomial) of the payload
// 164  u32       reserved, zero
// 168  payload:  accept bitset then unstable bitset, ceil(N/8) bytes each,
//                bit i at byte i/8, bit position i%8

inline constexpr std::uint32_t kMapFormatVersion = 1;
inline constexpr std::size_t kMapHeaderSize = 168;

class MapFileError : public std::runtime_error {
public:
    enum class Kind { io, bad_magic, version_mismatch, truncated, checksum_mismatch, inconsistent_header };

    MapFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::vector<std::uint8_t> serialize(const AcceptableErrorMap& map);
AcceptableErrorMap deserialize(const std::vector<std::uint8_t>& bytes);

void save(const AcceptableErrorMap& map, const std::filesystem::path& path);
AcceptableErrorMap load(const std::filesystem::path& path);

// Empty when the map was built from the scenario with this hash, otherwise a
// human-readable warning.
std::string provenance_warning(const AcceptableErrorMap& map, std::uint64_t scenario_hash);

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

}  // namespace pgam
