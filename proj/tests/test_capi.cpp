#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "gammalab/gammalab.h"

TEST_CASE("version and error state")
{
    CHECK(std::strlen(gl_version()) > 0);
    gl_sampled* f = nullptr;
    CHECK(gl_sampled_builtin("no-such-function", 1.0, 10, &f) == GL_INVALID_ARGUMENT);
    CHECK(f == nullptr);
    CHECK(std::strlen(gl_last_error()) > 0);
    CHECK(gl_sampled_builtin(nullptr, 1.0, 10, &f) == GL_INVALID_ARGUMENT);
}

TEST_CASE("sampled functions and envelopes")
{
    gl_sampled* f = nullptr;
    REQUIRE(gl_sampled_builtin("ratz-voigt", 8.0, 8001, &f) == GL_OK);
    CHECK(gl_sampled_size(f) == 8001);
    double v = 0.0;
    CHECK(gl_sampled_eval(f, 2.0, &v) == GL_OK);
    CHECK(v == doctest::Approx(3.0));

    gl_envelope* env = nullptr;
    REQUIRE(gl_envelope_compute(f, &env) == GL_OK);
    CHECK(std::abs(gl_envelope_t0(env) - std::sqrt(2.0)) < 1e-4);
    CHECK(std::abs(gl_envelope_theta(env) - std::sqrt(2.0)) < 1e-4);
    CHECK(gl_envelope_t0_beyond_tmax(env) == 0);
    double c = 0.0, cs = 0.0;
    CHECK(gl_envelope_eval(env, 4.0, &c, &cs) == GL_OK);
    CHECK(c == doctest::Approx(9.0));
    CHECK(cs == doctest::Approx(4.0 * gl_envelope_theta(env)));
    CHECK(gl_envelope_eval(env, -1.0, &c, &cs) == GL_DOMAIN);
    gl_envelope_free(env);
    gl_sampled_free(f);

    const double values[] = {1.0, 0.5};
    CHECK(gl_sampled_from_values(1.0, values, 1, &f) == GL_INVALID_ARGUMENT);
    CHECK(gl_sampled_from_csv("/nonexistent.csv", &f) == GL_IO);
}

TEST_CASE("measures")
{
    gl_measure* a = nullptr;
    gl_measure* b = nullptr;
    REQUIRE(gl_measure_create(2, 16, &a) == GL_OK);
    REQUIRE(gl_measure_create(2, 16, &b) == GL_OK);
    CHECK(gl_measure_set_weight(a, 5, 0.5) == GL_OK);
    CHECK(gl_measure_set_weight(a, 5, -1.0) == GL_INVALID_ARGUMENT);
    CHECK(gl_measure_add_atom(b, 0.3, 0.3, 0.5) == GL_OK);
    CHECK(gl_measure_add_atom(b, 1.3, 0.3, 0.5) == GL_INVALID_ARGUMENT);
    CHECK(gl_measure_total(a) == doctest::Approx(0.5));
    double d = -1.0;
    CHECK(gl_measure_weakstar_distance(a, b, &d) == GL_OK);
    CHECK(d > 0.0);
    gl_measure_free(a);
    gl_measure_free(b);
    CHECK(gl_measure_create(3, 16, &a) == GL_INVALID_ARGUMENT);
}

TEST_CASE("experiments")
{
    gl_experiment* exp = nullptr;
    CHECK(gl_experiment_create("nope", &exp) == GL_INVALID_ARGUMENT);
    REQUIRE(gl_experiment_create("envelope", &exp) == GL_OK);
    CHECK(gl_experiment_set(exp, "samples", "801") == GL_OK);
    CHECK(gl_experiment_load_config(exp, "/nonexistent.cfg") == GL_IO);
    auto dir = (std::filesystem::temp_directory_path() / "gammalab_capi").string();
    int code = -1;
    CHECK(gl_experiment_run(exp, dir.c_str(), &code) == GL_OK);
    CHECK(code == 0);
    CHECK(std::string(gl_experiment_message(exp)) == "ok");
    CHECK(std::filesystem::exists(dir + "/manifest.json"));
    CHECK(gl_experiment_set(exp, "psi", "bogus") == GL_OK);
    CHECK(gl_experiment_run(exp, dir.c_str(), &code) == GL_OK);
    CHECK(code == 1);
    gl_experiment_free(exp);
}
