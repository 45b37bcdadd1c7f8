#include <doctest.h>

#include <cmath>
#include <random>

#include "gammalab/error.hpp"
#include "gammalab/functionals.hpp"
#include "gammalab/recovery.hpp"

using namespace gammalab;

namespace {

double tv_inside(const GridFunction& phi, double x0, double x1, double y0, double y1)
{
    auto d = weighted_tv_energy(phi, GridFunction(phi.grid(), 1.0)).density;
    CompensatedSum s;
    for (std::size_t c = 0; c < d.weights().size(); ++c) {
        auto p = phi.grid().center_of(c);
        if (p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1)
            s.add(d.weights()[c]);
    }
    return s.value();
}

}  // namespace

TEST_CASE("wriggling map keeps the cube and its boundary")
{
    WrigglingMap map;
    map.b = 1.5;
    map.n = 4;
    map.L = 0.5;
    map.center = {0.5, 0.5};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.25, 0.75);
    for (int i = 0; i < 200; ++i) {
        Point x{u(rng), u(rng)};
        auto v = wriggling_map_eval(map, x);
        CHECK(v.x[0] == x[0]);
        CHECK(v.x[1] >= 0.25);
        CHECK(v.x[1] <= 0.75);
    }
    for (double s : {0.25, 0.4, 0.6, 0.75}) {
        CHECK(wriggling_map_eval(map, {s, 0.25}).x[1] == doctest::Approx(0.25));
        CHECK(wriggling_map_eval(map, {s, 0.75}).x[1] == doctest::Approx(0.75));
        CHECK(wriggling_map_eval(map, {0.25, s}).x[1] == doctest::Approx(s));
    }
    CHECK_THROWS_AS(wriggling_map_eval(map, {0.1, 0.5}), Error);
}

TEST_CASE("wriggling jacobian matches finite differences")
{
    WrigglingMap map;
    map.b = 1.0;
    map.n = 3;
    map.L = 1.0;
    const double h = 1e-7;
    for (Point x : {Point{0.31, 0.42}, Point{0.57, 0.66}, Point{0.2, 0.5}}) {
        auto v = wriggling_map_eval(map, x);
        for (int a = 0; a < 2; ++a) {
            Point p = x, m = x;
            p[a] += h;
            m[a] -= h;
            auto vp = wriggling_map_eval(map, p), vm = wriggling_map_eval(map, m);
            for (int r = 0; r < 2; ++r)
                CHECK(v.jacobian[r][a] == doctest::Approx((vp.x[r] - vm.x[r]) / (2.0 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("energy factor approaches its limit")
{
    CHECK(wriggling_factor_limit(std::sqrt(3.0), 1.0, 2) == doctest::Approx(2.0));
    CHECK(wriggling_factor_limit(1.0, 2.0, 2) == doctest::Approx(2.0));
    for (double r : {1.0, 1.3, 2.0, 5.0}) {
        for (double p : {1.0, 2.0, 3.0})
            CHECK(wriggling_factor_limit(solve_b_for_factor(r, p, 2), p, 2) == doctest::Approx(r));
    }
    CHECK_THROWS_AS(solve_b_for_factor(0.5, 1.0, 2), Error);

    WrigglingMap map;
    map.b = std::sqrt(3.0);
    map.p = 1.0;
    CHECK(wriggled_energy_factor({0.0, 1.0}, WrigglingMap{}, 64) == 1.0);
    double previous = 1.0;
    for (int n : {4, 8, 16, 32}) {
        map.n = n;
        const double err = std::abs(wriggled_energy_factor({0.0, 1.0}, map, 1024) - 2.0);
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 0.02);
    CHECK_THROWS_AS(wriggled_energy_factor({1.0, 1.0}, map, 64), Error);
}

TEST_CASE("wriggle_field scales the interface energy")
{
    Grid g(2, 32);
    auto phi = GridFunction::from_function(g, [](const Point& x) { return std::clamp((x[1] - 0.5) * 8.0 + 0.5, 0.0, 1.0); });
    MultiplierField none;
    auto same = wriggle_field(phi, none, 4);
    CHECK(same.wriggled_cubes == 0);
    CHECK(same.phi.grid() == g);

    MultiplierField field;
    field.regions.push_back({0.25, 0.75, 0.25, 0.75, 2.0});
    WriggleOptions opt;
    opt.oscillations = 8;
    auto out = wriggle_field(phi, field, 4, opt);
    CHECK(out.wriggled_cubes == 4);
    CHECK(out.phi.grid().n == 4 * out.cells_per_cube);
    const double before = tv_inside(resample(phi, out.phi.grid()), 0.25, 0.75, 0.25, 0.75);
    const double after = tv_inside(out.phi, 0.25, 0.75, 0.25, 0.75);
    CHECK(after / before == doctest::Approx(2.0).epsilon(0.05));
    const double outside_before = tv_inside(resample(phi, out.phi.grid()), 0.0, 0.25, 0.0, 1.0);
    CHECK(tv_inside(out.phi, 0.0, 0.25, 0.0, 1.0) == doctest::Approx(outside_before).epsilon(1e-9));
}

TEST_CASE("wriggle_field rejects bad regions")
{
    Grid g(2, 32);
    GridFunction phi(g, 0.0);
    auto with = [&](MultiplierRegion r) {
        MultiplierField f;
        f.regions.push_back(r);
        return f;
    };
    CHECK_THROWS_AS(wriggle_field(phi, with({0.1, 0.5, 0.0, 0.5, 2.0}), 4), Error);
    CHECK_THROWS_AS(wriggle_field(phi, with({0.0, 0.5, 0.0, 0.5, 0.5}), 4), Error);
    MultiplierField overlap;
    overlap.regions = {{0.0, 0.5, 0.0, 0.5, 2.0}, {0.25, 0.75, 0.0, 0.5, 2.0}};
    CHECK_THROWS_AS(wriggle_field(phi, overlap, 4), Error);
    CHECK_THROWS_AS(wriggle_field(GridFunction(Grid(1, 32), 0.0), with({0.0, 0.5, 0.0, 1.0, 2.0}), 4), Error);
}
