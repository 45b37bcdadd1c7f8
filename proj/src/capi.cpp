#include "gammalab/gammalab.h"

#include <algorithm>
#include <string>

#include "gammalab/envelope.hpp"
#include "gammalab/error.hpp"
#include "gammalab/experiment.hpp"
#include "gammalab/measures.hpp"

struct gl_sampled {
    gammalab::SampledFunction f;
};

struct gl_envelope {
    gammalab::EnvelopeTable env;
};

struct gl_measure {
    gammalab::GridMeasure mu;
};

struct gl_experiment {
    std::string subcommand;
    gammalab::Config config;
    std::string message;
};

namespace {

thread_local std::string last_error;

gl_status status_of(gammalab::ErrorKind kind)
{
    switch (kind) {
    case gammalab::ErrorKind::InvalidInput: return GL_INVALID_ARGUMENT;
    case gammalab::ErrorKind::Domain: return GL_DOMAIN;
    case gammalab::ErrorKind::Infeasible: return GL_INFEASIBLE;
    case gammalab::ErrorKind::Guard: return GL_GUARD;
    case gammalab::ErrorKind::Contract: return GL_CONTRACT;
    case gammalab::ErrorKind::Io: return GL_IO;
    }
    return GL_INTERNAL;
}

template <class Fn>
gl_status guarded(Fn&& fn)
{
    try {
        fn();
        last_error.clear();
        return GL_OK;
    } catch (const gammalab::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        last_error = e.what();
        return GL_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return GL_INTERNAL;
    }
}

gl_status null_argument(const char* what)
{
    last_error = std::string("null argument: ") + what;
    return GL_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* gl_version(void) { return gammalab::library_version(); }

const char* gl_last_error(void) { return last_error.c_str(); }

gl_status gl_sampled_builtin(const char* name, double tmax, size_t samples, gl_sampled** out)
{
    if (!name || !out)
        return null_argument("name/out");
    return guarded([&] { *out = new gl_sampled{gammalab::builtin_function(name, tmax, samples)}; });
}

gl_status gl_sampled_from_csv(const char* path, gl_sampled** out)
{
    if (!path || !out)
        return null_argument("path/out");
    return guarded([&] { *out = new gl_sampled{gammalab::read_sampled_csv(path)}; });
}

gl_status gl_sampled_from_values(double tmax, const double* values, size_t count, gl_sampled** out)
{
    if (!values || !out)
        return null_argument("values/out");
    return guarded([&] {
        *out = new gl_sampled{gammalab::SampledFunction(tmax, std::vector<double>(values, values + count))};
    });
}

gl_status gl_sampled_eval(const gl_sampled* f, double t, double* out)
{
    if (!f || !out)
        return null_argument("f/out");
    return guarded([&] { *out = f->f(t); });
}

size_t gl_sampled_size(const gl_sampled* f) { return f ? f->f.size() : 0; }

void gl_sampled_free(gl_sampled* f) { delete f; }

gl_status gl_envelope_compute(const gl_sampled* f, gl_envelope** out)
{
    if (!f || !out)
        return null_argument("f/out");
    return guarded([&] { *out = new gl_envelope{gammalab::convex_subadditive_envelope(f->f)}; });
}

double gl_envelope_t0(const gl_envelope* env) { return env ? env->env.t0 : 0.0; }

double gl_envelope_theta(const gl_envelope* env) { return env ? env->env.theta_cs : 0.0; }

int gl_envelope_t0_beyond_tmax(const gl_envelope* env) { return env && env->env.t0_beyond_tmax ? 1 : 0; }

gl_status gl_envelope_eval(const gl_envelope* env, double t, double* convex, double* convex_subadditive)
{
    if (!env)
        return null_argument("env");
    return guarded([&] {
        gammalab::require(t >= 0.0, gammalab::ErrorKind::Domain, "t must be nonnegative");
        if (convex)
            *convex = env->env.eval_convex(t);
        if (convex_subadditive)
            *convex_subadditive = env->env.eval_convex_subadditive(t);
    });
}

gl_status gl_envelope_write_csv(const gl_envelope* env, const char* path)
{
    if (!env || !path)
        return null_argument("env/path");
    return guarded([&] { gammalab::write_envelope_csv(path, env->env); });
}

void gl_envelope_free(gl_envelope* env) { delete env; }

gl_status gl_measure_create(int dim, int n, gl_measure** out)
{
    if (!out)
        return null_argument("out");
    return guarded([&] { *out = new gl_measure{gammalab::GridMeasure(gammalab::Grid(dim, n))}; });
}

gl_status gl_measure_set_weight(gl_measure* mu, size_t cell, double weight)
{
    if (!mu)
        return null_argument("mu");
    return guarded([&] { mu->mu.set_weight(cell, weight); });
}

gl_status gl_measure_add_atom(gl_measure* mu, double x, double y, double mass)
{
    if (!mu)
        return null_argument("mu");
    return guarded([&] { mu->mu.add_atom({{x, y}, mass}); });
}

double gl_measure_total(const gl_measure* mu) { return mu ? mu->mu.total() : 0.0; }

gl_status gl_measure_weakstar_distance(const gl_measure* a, const gl_measure* b, double* out)
{
    if (!a || !b || !out)
        return null_argument("a/b/out");
    return guarded([&] { *out = gammalab::weakstar_distance(a->mu, b->mu); });
}

gl_status gl_measure_read_csv(const char* path, gl_measure** out)
{
    if (!path || !out)
        return null_argument("path/out");
    return guarded([&] { *out = new gl_measure{gammalab::read_measure_csv(path)}; });
}

gl_status gl_measure_write_csv(const gl_measure* mu, const char* path)
{
    if (!mu || !path)
        return null_argument("mu/path");
    return guarded([&] { gammalab::write_measure_csv(path, mu->mu); });
}

void gl_measure_free(gl_measure* mu) { delete mu; }

gl_status gl_experiment_create(const char* subcommand, gl_experiment** out)
{
    if (!subcommand || !out)
        return null_argument("subcommand/out");
    return guarded([&] {
        const auto& names = gammalab::experiment_names();
        gammalab::require(std::find(names.begin(), names.end(), subcommand) != names.end(),
                          gammalab::ErrorKind::InvalidInput, std::string("unknown subcommand '") + subcommand + "'");
        *out = new gl_experiment{subcommand, {}, {}};
    });
}

gl_status gl_experiment_set(gl_experiment* exp, const char* key, const char* value)
{
    if (!exp || !key || !value)
        return null_argument("exp/key/value");
    return guarded([&] { exp->config.set(key, value); });
}

gl_status gl_experiment_load_config(gl_experiment* exp, const char* path)
{
    if (!exp || !path)
        return null_argument("exp/path");
    return guarded([&] {
        auto loaded = gammalab::load_config(path);
        for (const auto& [k, v] : loaded.values())
            exp->config.set(k, v);
    });
}

gl_status gl_experiment_run(gl_experiment* exp, const char* out_dir, int* exit_code)
{
    if (!exp || !out_dir || !exit_code)
        return null_argument("exp/out_dir/exit_code");
    return guarded([&] {
        auto r = gammalab::run_experiment(exp->subcommand, exp->config, out_dir);
        exp->message = r.message;
        *exit_code = r.exit_code;
    });
}

const char* gl_experiment_message(const gl_experiment* exp) { return exp ? exp->message.c_str() : ""; }

void gl_experiment_free(gl_experiment* exp) { delete exp; }

}  // extern "C"
