#include "pgam/acceptable_space.hpp"

#include <optional>
#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include <zlib.h>

namespace pgam {

std::uint64_t BitSet::count() const {
    std::uint64_t n = 0;
    for (auto b : bytes_) n += static_cast<std::uint64_t>(std::popcount(b));
    return n;
}

bool BitSet::is_subset_of(const BitSet& other) const {
    if (size_ != other.size_) return false;
    for (std::size_t i = 0; i < bytes_.size(); ++i) {
        if (bytes_[i] & ~other.bytes_[i]) return false;
    }
    return true;
}

AcceptableErrorMap::AcceptableErrorMap(ErrorGrid grid, BitSet accept, BitSet unstable, Provenance provenance)
    : grid_(std::move(grid)), accept_(std::move(accept)), unstable_(std::move(unstable)), provenance_(std::move(provenance)) {
    if (accept_.size() != grid_.size() || unstable_.size() != grid_.size()) {
        throw std::invalid_argument("bitset length does not match grid cell count");
    }
    if (!unstable_.is_subset_of(accept_)) throw std::invalid_argument("unstable cells must be a subset of accepted cells");
    if (provenance_.evaluator.size() > 31) provenance_.evaluator.resize(31);
}

bool AcceptableErrorMap::is_acceptable(CellIndex i) const {
    if (i >= grid_.size()) throw std::out_of_range("cell index out of range");
    return accept_.test(i);
}

bool AcceptableErrorMap::is_unstable(CellIndex i) const {
    if (i >= grid_.size()) throw std::out_of_range("cell index out of range");
    return unstable_.test(i);
}

double AcceptableErrorMap::acceptable_fraction() const {
    return static_cast<double>(accept_.count()) / static_cast<double>(grid_.size());
}

AcceptableErrorMap precompute(const ErrorGrid& grid, const TaskEvaluator& evaluator, unsigned workers,
                              std::uint64_t scenario_hash, std::int64_t created_unix) {
    if (workers == 0) throw std::invalid_argument("workers must be positive");
    if (!is_success(evaluator.evaluate(ErrorVector::zero()))) {
        throw NominalFailure(evaluator.name() + ": zero-error outcome is not a success");
    }

    const std::uint64_t n = grid.size();
    std::vector<Outcome> outcomes(n, Outcome::failure);
    auto ranges = partition_cells(grid, workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(ranges.size());
        for (const auto& range : ranges) {
            pool.emplace_back([&outcomes, &evaluator, range] {
                for (auto [i, e] : range) outcomes[i] = evaluator.evaluate(e);
            });
        }
    }

    BitSet accept(n), unstable(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (outcomes[i] == Outcome::failure) continue;
        accept.set(i);
        if (outcomes[i] == Outcome::success_unstable) unstable.set(i);
    }
    return {grid, std::move(accept), std::move(unstable), {evaluator.name(), scenario_hash, created_unix}};
}

std::string provenance_warning(const AcceptableErrorMap& map, std::uint64_t scenario_hash) {
    if (map.provenance().scenario_hash == scenario_hash) return {};
    std::ostringstream msg;
    msg << "map was built from scenario hash " << std::hex << map.provenance().scenario_hash
        << ", current scenario hashes to " << scenario_hash;
    return msg.str();
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    while (size > 0) {
        auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = ::crc32(crc, data, chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'P', 'G', 'A', 'M'};

template <typename T>
void put(std::vector<std::uint8_t>& out, std::size_t offset, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    std::memcpy(out.data() + offset, raw.data(), sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t offset) {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), in.data() + offset, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<T>(raw);
}

}  // namespace

std::vector<std::uint8_t> serialize(const AcceptableErrorMap& map) {
    const auto& grid = map.grid();
    const std::size_t bitset_bytes = map.accept_bits().bytes().size();
    std::vector<std::uint8_t> out(kMapHeaderSize + 2 * bitset_bytes, 0);

    std::memcpy(out.data(), kMagic, 4);
    put<std::uint32_t>(out, 4, kMapFormatVersion);
    for (int a = 0; a < kAxes; ++a) {
        put<double>(out, 8 + 16 * a, grid.limits()[a]);
        put<double>(out, 16 + 16 * a, grid.steps()[a]);
    }
    put<std::uint64_t>(out, 104, grid.size());
    put<std::uint64_t>(out, 112, map.provenance().scenario_hash);
    put<std::int64_t>(out, 120, map.provenance().created_unix);
    const auto& name = map.provenance().evaluator;
    std::memcpy(out.data() + 128, name.data(), std::min<std::size_t>(name.size(), 31));

    std::uint8_t* payload = out.data() + kMapHeaderSize;
    std::memcpy(payload, map.accept_bits().bytes().data(), bitset_bytes);
    std::memcpy(payload + bitset_bytes, map.unstable_bits().bytes().data(), bitset_bytes);
    put<std::uint32_t>(out, 160, crc32(payload, 2 * bitset_bytes));
    return out;
}

AcceptableErrorMap deserialize(const std::vector<std::uint8_t>& bytes) {
    using Kind = MapFileError::Kind;
    if (bytes.size() < 8) throw MapFileError(Kind::truncated, "map file shorter than its header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw MapFileError(Kind::bad_magic, "not a PGAM map file");
    auto version = get<std::uint32_t>(bytes, 4);
    if (version != kMapFormatVersion) {
        throw MapFileError(Kind::version_mismatch, "unsupported map format version " + std::to_string(version));
    }
    if (bytes.size() < kMapHeaderSize) throw MapFileError(Kind::truncated, "map file shorter than its header");

    AxisArray limits{}, steps{};
    for (int a = 0; a < kAxes; ++a) {
        limits[a] = get<double>(bytes, 8 + 16 * a);
        steps[a] = get<double>(bytes, 16 + 16 * a);
    }
    auto n = get<std::uint64_t>(bytes, 104);
    Provenance prov;
    prov.scenario_hash = get<std::uint64_t>(bytes, 112);
    prov.created_unix = get<std::int64_t>(bytes, 120);
    const char* name = reinterpret_cast<const char*>(bytes.data() + 128);
    prov.evaluator.assign(name, strnlen(name, 32));
    auto expected_crc = get<std::uint32_t>(bytes, 160);

    std::optional<ErrorGrid> grid;
    try {
        grid = ErrorGrid::build(limits, steps, std::numeric_limits<std::uint64_t>::max());
    } catch (const GridError& e) {
        throw MapFileError(Kind::inconsistent_header, std::string("invalid grid in header: ") + e.what());
    }
    if (grid->size() != n) throw MapFileError(Kind::inconsistent_header, "cell count does not match grid parameters");

    const std::size_t bitset_bytes = (n + 7) / 8;
    const std::size_t expected_size = kMapHeaderSize + 2 * bitset_bytes;
    if (bytes.size() < expected_size) throw MapFileError(Kind::truncated, "map payload is truncated");
    if (bytes.size() > expected_size) throw MapFileError(Kind::inconsistent_header, "trailing bytes after map payload");

    const std::uint8_t* payload = bytes.data() + kMapHeaderSize;
    if (crc32(payload, 2 * bitset_bytes) != expected_crc) throw MapFileError(Kind::checksum_mismatch, "map payload checksum mismatch");

    BitSet accept(n), unstable(n);
    std::memcpy(accept.bytes().data(), payload, bitset_bytes);
    std::memcpy(unstable.bytes().data(), payload + bitset_bytes, bitset_bytes);
    try {
        return {*grid, std::move(accept), std::move(unstable), std::move(prov)};
    } catch (const std::invalid_argument& e) {
        throw MapFileError(Kind::inconsistent_header, e.what());
    }
}

void save(const AcceptableErrorMap& map, const std::filesystem::path& path) {
    auto bytes = serialize(map);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MapFileError(MapFileError::Kind::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw MapFileError(MapFileError::Kind::io, "write failed for " + path.string());
}

AcceptableErrorMap load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MapFileError(MapFileError::Kind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace pgam
