#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pgam/error_grid.hpp"

using namespace pgam;

namespace {

ErrorGrid grasp_grid() {
    double r = deg2rad(60), s = deg2rad(15);
    return ErrorGrid::build({0.05, 0.05, 0.05, r, r, r}, {0.01, 0.01, 0.01, s, s, s});
}

ErrorGrid small_grid(int half) {  // (2·half+1)^6 cells
    double r = deg2rad(20.0 * half), s = deg2rad(20);
    double t = 0.01 * half;
    return ErrorGrid::build({t, t, t, r, r, r}, {0.01, 0.01, 0.01, s, s, s});
}

}  // namespace

TEST_CASE("build counts") {
    ErrorGrid g = grasp_grid();
    int expect[6] = {11, 11, 11, 9, 9, 9};
    for (int a = 0; a < 6; ++a) CHECK(g.count(a) == expect[a]);
    CHECK(g.size() == 970299);

    ErrorGrid z = ErrorGrid::build({0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0});
    CHECK(z.size() == 1);
    CHECK(z.cell_center(0) == ErrorVector::zero());
    CHECK(z.active_axes().empty());
}

TEST_CASE("build rejects bad parameters") {
    CHECK_THROWS_AS(ErrorGrid::build({0.05, 0, 0, 0, 0, 0}, {0.02, 0, 0, 0, 0, 0}), GridError);
    CHECK_THROWS_AS(ErrorGrid::build({-0.01, 0, 0, 0, 0, 0}, {0.01, 0, 0, 0, 0, 0}), GridError);
    CHECK_THROWS_AS(ErrorGrid::build({0.05, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}), GridError);
    // 201^3 · 9^3 > 16e6
    CHECK_THROWS_AS(ErrorGrid::build({1, 1, 1, 1, 1, 1}, {0.01, 0.01, 0.01, 0.25, 0.25, 0.25}), GridError);
    CHECK_NOTHROW(ErrorGrid::build({0.05, 0, 0, 0, 0, 0}, {0.01, 0, 0, 0, 0, 0}, 11));
    CHECK_THROWS_AS(ErrorGrid::build({0.05, 0, 0, 0, 0, 0}, {0.01, 0, 0, 0, 0, 0}, 10), GridError);
}

TEST_CASE("quantize simple cases") {
    ErrorGrid g = grasp_grid();
    CHECK(g.quantize(ErrorVector::zero()).index == g.center_index());
    CHECK_FALSE(g.quantize(ErrorVector::zero()).out_of_range);
    ErrorVector e;
    e.t.x() = 0.012;
    ErrorVector c = g.cell_center(g.quantize(e).index);
    CHECK(c.t.x() == doctest::Approx(0.01));

    e.t.x() = 0.07;
    Quantized q = g.quantize(e);
    CHECK(q.out_of_range);
    CHECK(g.cell_center(q.index).t.x() == doctest::Approx(0.05));
}

TEST_CASE("cell_center ordering") {
    ErrorGrid g = grasp_grid();
    CHECK(g.cell_center(g.center_index()) == ErrorVector::zero());
    ErrorVector corner = g.cell_center(0);
    for (int a = 0; a < 6; ++a) CHECK(corner[a] == doctest::Approx(-g.limits()[a]));
    // r_z is the fastest axis.
    CHECK(g.cell_center(1).r.z() == doctest::Approx(-g.limits()[5] + g.steps()[5]));
    CHECK_THROWS_AS(g.cell_center(g.size()), std::out_of_range);
}

TEST_CASE("exhaustive round trip on a 3^6 grid") {
    ErrorGrid g = small_grid(1);
    REQUIRE(g.size() == 729);
    for (CellIndex i = 0; i < g.size(); ++i) {
        ErrorVector c = g.cell_center(i);
        Quantized q = g.quantize(c);
        CHECK(q.index == i);
        CHECK_FALSE(q.out_of_range);
        CHECK(g.cell_center(q.index) == c);
        CHECK(g.flatten(g.unflatten(i)) == i);
    }
}

TEST_CASE("quantize equals exhaustive argmin") {
    ErrorGrid g = small_grid(2);  // 5^6
    std::mt19937_64 rng(11);
    for (double lambda : {0.001, 0.01, 0.1, 1.0}) {
        for (int i = 0; i < 50; ++i) {
            ErrorVector e = oracle::random_error(rng, g.limits()[0], g.limits()[3]);
            CHECK(g.quantize(e).index == oracle::argmin_cell(g, e, lambda));
        }
    }
}

TEST_CASE("half-cell bound") {
    ErrorGrid g = grasp_grid();
    std::mt19937_64 rng(12);
    for (int i = 0; i < 10000; ++i) {
        ErrorVector e = oracle::random_error(rng, 0.05, deg2rad(60));
        Quantized q = g.quantize(e);
        REQUIRE_FALSE(q.out_of_range);
        ErrorVector c = g.cell_center(q.index);
        for (int a = 0; a < 6; ++a) CHECK(std::abs(e[a] - c[a]) <= g.steps()[a] / 2 + 1e-12);
    }
}

TEST_CASE("angle wrapping near +-pi") {
    double s = deg2rad(15);
    ErrorGrid full = ErrorGrid::build({0, 0, 0, 0, 0, kPi}, {0, 0, 0, 0, 0, s});
    REQUIRE(full.size() == 25);
    ErrorVector a, b;
    a.r.z() = kPi - 0.01;
    b.r.z() = -kPi + 0.01;
    CHECK_FALSE(full.quantize(a).out_of_range);
    CHECK_FALSE(full.quantize(b).out_of_range);
    // Both land on the ±π seam; the seam cells are the same rotation.
    CHECK(std::abs(std::abs(full.cell_center(full.quantize(a).index).r.z()) - kPi) < 1e-12);
    CHECK(std::abs(std::abs(full.cell_center(full.quantize(b).index).r.z()) - kPi) < 1e-12);
    // Values beyond π wrap rather than clamp.
    ErrorVector c;
    c.r.z() = kPi + 0.2;
    CHECK(full.cell_center(full.quantize(c).index).r.z() == doctest::Approx(-kPi + s));

    ErrorGrid part = ErrorGrid::build({0, 0, 0, 0, 0, deg2rad(150)}, {0, 0, 0, 0, 0, s});
    CHECK(part.quantize(a).out_of_range);
    CHECK(part.quantize(b).out_of_range);
    CHECK(part.quantize(a).index != part.quantize(b).index);
}

TEST_CASE("degenerate axes") {
    ErrorGrid g = ErrorGrid::build({0.3, 0.3, 0, 0, 0, deg2rad(90)}, {0.05, 0.05, 0, 0, 0, deg2rad(22.5)});
    CHECK(g.size() == 13 * 13 * 9);
    CHECK(g.active_axes() == std::vector<int>{0, 1, 5});
    ErrorVector e;
    e.t.z() = 1e-3;
    CHECK(g.quantize(e).out_of_range);
    CHECK(g.quantize(e).index == g.center_index());
}

TEST_CASE("iteration and partitions") {
    ErrorGrid one = ErrorGrid::build({0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0});
    int n = 0;
    for (auto [i, e] : iter_cells(one)) {
        CHECK(i == 0);
        CHECK(e == ErrorVector::zero());
        ++n;
    }
    CHECK(n == 1);

    ErrorGrid g = grasp_grid();
    std::uint64_t count = 0;
    CellIndex expect = 0;
    for (auto it = iter_cells(g).begin(); it != iter_cells(g).end(); ++it) {
        if ((*it).first != expect) FAIL("out of order");
        ++expect;
        ++count;
    }
    CHECK(count == 970299);

    ErrorGrid s = small_grid(1);
    std::vector<CellIndex> joined;
    auto parts = partition_cells(s, 8);
    CHECK(parts.size() == 8);
    for (const auto& part : parts) {
        for (auto [i, e] : part) {
            joined.push_back(i);
            CHECK(e == s.cell_center(i));
        }
    }
    REQUIRE(joined.size() == s.size());
    for (CellIndex i = 0; i < s.size(); ++i) CHECK(joined[i] == i);
}
