#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "gammalab/envelope.hpp"
#include "gammalab/error.hpp"

using namespace gammalab;

namespace {

// Lower envelope by exhaustive search over grid pairs around each node.
std::vector<double> two_point_oracle(const SampledFunction& f)
{
    const std::size_t K = f.size();
    std::vector<double> out(K);
    for (std::size_t k = 0; k < K; ++k) {
        double best = f[k];
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = k + 1; b < K; ++b) {
                const double lambda = static_cast<double>(b - k) / static_cast<double>(b - a);
                best = std::min(best, lambda * f[a] + (1.0 - lambda) * f[b]);
            }
        }
        out[k] = best;
    }
    return out;
}

}  // namespace

TEST_CASE("sampled function validates its table")
{
    CHECK_THROWS_AS(SampledFunction(1.0, {1.0}), Error);
    CHECK_THROWS_AS(SampledFunction(0.0, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(SampledFunction(1.0, {1.0, 0.0}), Error);
    CHECK_THROWS_AS(SampledFunction(1.0, {1.0, NAN}), Error);
    SampledFunction f(2.0, {1.0, 2.0, 5.0});
    CHECK(f.step() == doctest::Approx(1.0));
    CHECK(f(0.5) == doctest::Approx(1.5));
    CHECK(f(1.5) == doctest::Approx(3.5));
    CHECK(f(10.0) == doctest::Approx(5.0));
}

TEST_CASE("builtin functions")
{
    auto rv = builtin_function("ratz-voigt", 8.0, 81);
    CHECK(rv(2.0) == doctest::Approx(3.0));
    auto shifted = builtin_function("capped-parabola+1", 3.0, 31);
    CHECK(shifted(1.0) == doctest::Approx(0.5 + 1.0));
    CHECK(shifted(3.0) == doctest::Approx(2.0));
    auto affine = builtin_function("affine:2:1", 4.0, 5);
    CHECK(affine(3.0) == doctest::Approx(7.0));
    CHECK_THROWS_AS(builtin_function("nope", 1.0, 10), Error);
    CHECK_THROWS_AS(builtin_function("affine:-1:0", 4.0, 5), Error);
}

TEST_CASE("convex hull matches the two-point oracle")
{
    auto f = builtin_function("capped-parabola", 3.0, 201);
    auto hull = convex_envelope(f);
    auto oracle = two_point_oracle(f);
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(hull[k] == doctest::Approx(oracle[k]).epsilon(1e-10));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    std::vector<double> v(101);
    for (auto& x : v)
        x = u(rng);
    SampledFunction g(5.0, v);
    auto h = convex_envelope(g);
    auto o = two_point_oracle(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(std::abs(h[k] - o[k]) < 1e-10);
        CHECK(h[k] <= g[k] + 1e-15);
    }
}

TEST_CASE("convex input is returned unchanged")
{
    auto f = builtin_function("ratz-voigt", 8.0, 801);
    CHECK(convex_envelope(f) == f.values());
}

TEST_CASE("ratz-voigt recession constant")
{
    auto env = convex_subadditive_envelope(builtin_function("ratz-voigt", 8.0, 8001));
    CHECK(env.t0_finite());
    CHECK(std::abs(env.t0 - std::sqrt(2.0)) < 1e-4);
    CHECK(std::abs(env.theta_cs - std::sqrt(2.0)) < 1e-4);
    CHECK(env.eval_convex_subadditive(3.0) == doctest::Approx(3.0 * env.theta_cs));
    CHECK(env.eval_convex_subadditive(1.0) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(env.eval_convex_subadditive(0.0) == doctest::Approx(1.0));
}

TEST_CASE("max-affine has its kink at the recession point")
{
    auto env = convex_subadditive_envelope(builtin_function("max-affine", 4.0, 4001));
    CHECK(env.t0 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(env.theta_cs == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant function flags t0 beyond tmax")
{
    auto env = convex_subadditive_envelope(builtin_function("const:1", 8.0, 81));
    CHECK_FALSE(env.t0_finite());
    CHECK(env.t0_beyond_tmax);
    CHECK(env.theta_cs == doctest::Approx(0.0));
    CHECK(env.branch_index == 81);
    CHECK(env.eval_convex_subadditive(5.0) == doctest::Approx(1.0));
}

TEST_CASE("convex-subadditive envelope is subadditive and below f")
{
    auto f = builtin_function("capped-parabola", 3.0, 301);
    auto env = convex_subadditive_envelope(f);
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(env.convex_subadditive[k] <= f[k] + 1e-12);
    for (double a = 0.05; a < 1.5; a += 0.1) {
        for (double b = 0.05; b < 1.5; b += 0.1)
            CHECK(env.eval_convex_subadditive(a + b) <=
                  env.eval_convex_subadditive(a) + env.eval_convex_subadditive(b) + 1e-12);
    }
}

TEST_CASE("cs of the convex envelope equals cs")
{
    for (const char* name : {"ratz-voigt", "capped-parabola", "quartic-well-cost", "max-affine"}) {
        auto check = cs_of_c_equals_cs_check(builtin_function(name, 6.0, 601), 1e-10);
        CHECK(check.ok);
        CHECK(check.max_deviation <= 1e-10);
    }
}

TEST_CASE("affine minorant dual reconstructs the envelope")
{
    auto f = builtin_function("capped-parabola", 3.0, 301);
    auto env = convex_subadditive_envelope(f);
    auto dual = affine_minorant_dual(f);
    REQUIRE(dual.reconstructed.size() == f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(dual.reconstructed[k] == doctest::Approx(env.convex_subadditive[k]).epsilon(1e-12));
    for (const auto& p : dual.pieces)
        CHECK(p.b >= 0.0);
    CHECK(dual.max_slope == doctest::Approx(env.theta_cs));
}

TEST_CASE("two-point decomposition spans the hull gap")
{
    auto f = builtin_function("capped-parabola", 3.0, 301);
    auto env = convex_subadditive_envelope(f);
    for (double alpha : {0.2, 1.0, 2.0, 2.6}) {
        auto tp = two_point_decomposition(env, alpha, 1e-9);
        CHECK(tp.lambda * tp.s + (1.0 - tp.lambda) * tp.t == doctest::Approx(alpha));
        CHECK(tp.lambda * f(tp.s) + (1.0 - tp.lambda) * f(tp.t) ==
              doctest::Approx(env.eval_convex(alpha)).epsilon(1e-9));
    }
    auto inside = two_point_decomposition(env, 1.0, 1e-9);
    CHECK(inside.lambda == doctest::Approx(1.0));
    CHECK_THROWS_AS(two_point_decomposition(env, 4.0, 1e-9), Error);
}

TEST_CASE("csv round trip")
{
    auto path = (std::filesystem::temp_directory_path() / "gammalab_psi.csv").string();
    auto f = builtin_function("capped-parabola", 3.0, 31);
    write_sampled_csv(path, f);
    auto g = read_sampled_csv(path);
    CHECK(g.tmax() == f.tmax());
    CHECK(g.values() == f.values());
    auto env = convex_subadditive_envelope(f);
    write_envelope_csv(path, env);
    CHECK(std::filesystem::file_size(path) > 0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_sampled_csv(path), Error);
}
