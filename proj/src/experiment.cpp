#include "gammalab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "gammalab/envelope.hpp"
#include "gammalab/error.hpp"
#include "gammalab/functionals.hpp"
#include "gammalab/measures.hpp"
#include "gammalab/optimize.hpp"
#include "gammalab/recovery.hpp"
#include "gammalab/sandwich.hpp"

namespace gammalab {

namespace {

using Outputs = std::vector<std::string>;
namespace fs = std::filesystem;

int worker_count()
{
    if (const char* env = std::getenv("GAMMALAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs fn(i) for i < count on a small pool; results stay in index order.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn)
{
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < count;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = std::min<std::size_t>(count, static_cast<std::size_t>(worker_count()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    for (auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }
    return out;
}

SampledFunction psi_from(const Config& cfg)
{
    if (cfg.has("psi_file"))
        return read_sampled_csv(cfg.get("psi_file", ""));
    const double tmax = cfg.get_double("tmax", 8.0);
    const int samples = cfg.get_int("samples", 8001);
    require(samples >= 2, ErrorKind::InvalidInput, "samples must be at least 2");
    return builtin_function(cfg.get("psi", "ratz-voigt"), tmax, static_cast<std::size_t>(samples));
}

std::vector<double> positive_list(const Config& cfg, const std::string& key, const std::vector<double>& fallback)
{
    auto v = cfg.get_doubles(key, fallback);
    require(!v.empty(), ErrorKind::InvalidInput, "sweep list '" + key + "' is empty");
    for (double x : v)
        require(x > 0.0, ErrorKind::InvalidInput, "sweep list '" + key + "' must be positive");
    return v;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

Outputs run_envelope(const Config& cfg, const std::string& dir)
{
    auto psi = psi_from(cfg);
    auto env = convex_subadditive_envelope(psi);
    auto check = cs_of_c_equals_cs_check(psi, cfg.get_double("cs_tolerance", 1e-10));
    const auto table = path_in(dir, "envelope.csv");
    const auto summary = path_in(dir, "envelope_summary.csv");
    write_envelope_csv(table, env);
    std::string text = "quantity,value\n";
    text += "t0," + csv::num(env.t0) + "\n";
    text += "theta_cs," + csv::num(env.theta_cs) + "\n";
    text += "branch_index," + std::to_string(env.branch_index) + "\n";
    text += "t0_beyond_tmax," + std::to_string(env.t0_beyond_tmax ? 1 : 0) + "\n";
    text += "hull_vertices," + std::to_string(env.hull_vertices.size()) + "\n";
    text += "cs_of_c_deviation," + csv::num(check.max_deviation) + "\n";
    csv::write_text(summary, text);
    require(check.ok, ErrorKind::Contract, "(psi^c)^cs differs from psi^cs by " + csv::num(check.max_deviation));
    return {table, summary};
}

Outputs run_measures(const Config& cfg, const std::string& dir)
{
    const int N = cfg.get_int("N", 256);
    const int dim = cfg.get_int("dim", 2);
    const auto density = cfg.get("density", "x1");
    const auto lambdas = positive_list(cfg, "lambda", {0.25, 0.5, 0.9});
    const auto levels = cfg.get_ints("j", {2, 4, 8});
    require(density == "x1" || density == "uniform", ErrorKind::InvalidInput, "density must be x1 or uniform");
    const Grid grid(dim, N);
    auto mu = GridMeasure::from_density(grid, [&](const Point& x) { return density == "x1" ? x[0] : 1.0; });
    std::string text = "lambda,j,max_proportion_error,weakstar_distance\n";
    for (double lambda : lambdas) {
        for (int j : levels) {
            auto cr = crumble_partition(mu, lambda, j);
            const double d = weakstar_distance(mu.restricted(cr.mask), mu.scaled(lambda));
            text += csv::num(lambda) + "," + std::to_string(j) + "," + csv::num(cr.max_proportion_error) + "," +
                    csv::num(d) + "\n";
        }
    }
    const auto out = path_in(dir, "crumble.csv");
    csv::write_text(out, text);
    return {out};
}

Outputs run_wriggle(const Config& cfg, const std::string& dir)
{
    const auto factors = positive_list(cfg, "factor", {2.0});
    const auto exponents = positive_list(cfg, "p", {1.0, 2.0});
    const auto oscillations = cfg.get_ints("n", {32});
    const int quadrature = cfg.get_int("quadrature", 1024);
    std::string text = "factor,p,n,b,measured,limit,rel_error\n";
    for (double r : factors) {
        for (double p : exponents) {
            for (int n : oscillations) {
                WrigglingMap map;
                map.b = solve_b_for_factor(r, p, 2);
                map.n = n;
                map.p = p;
                const double measured = wriggled_energy_factor({0.0, 1.0}, map, quadrature);
                const double limit = wriggling_factor_limit(map.b, p, 2);
                text += csv::num(r) + "," + csv::num(p) + "," + std::to_string(n) + "," + csv::num(map.b) + "," +
                        csv::num(measured) + "," + csv::num(limit) + "," + csv::num((measured - limit) / limit) +
                        "\n";
            }
        }
    }
    const auto out = path_in(dir, "wriggle.csv");
    csv::write_text(out, text);
    return {out};
}

struct EnergyRow {
    double eps = 0.0;
    int N = 0;
    double total = 0.0;
    double limit = 0.0;
};

std::string energy_rows(const std::string& name, const std::vector<EnergyRow>& rows)
{
    std::string text = "name,eps,N,total,limit,rel_error\n";
    for (const auto& r : rows)
        text += name + "," + csv::num(r.eps) + "," + std::to_string(r.N) + "," + csv::num(r.total) + "," +
                csv::num(r.limit) + "," + csv::num((r.total - r.limit) / r.limit) + "\n";
    return text;
}

Outputs run_mm(const Config& cfg, const std::string& dir)
{
    const auto eps_list = positive_list(cfg, "eps", {1.0 / 16, 1.0 / 32, 1.0 / 64});
    const int dim = cfg.get_int("dim", 1);
    const int per = cfg.get_int("cells_per_eps", 8);
    const double radius = cfg.get_double("radius", 0.25);
    const auto W = double_well_by_name(cfg.get("well", "quartic"));
    const double sigma = sigma_W(W);
    auto rows = parallel_map<EnergyRow>(eps_list.size(), [&](std::size_t i) {
        const double eps = eps_list[i];
        const Grid grid(dim, static_cast<int>(std::lround(per / eps)));
        auto profile = optimal_profile(W, eps);
        auto phi = GridFunction::from_function(grid, [&](const Point& x) {
            return dim == 1 ? profile(x[0] - 0.5) : profile(radius - std::hypot(x[0] - 0.5, x[1] - 0.5));
        });
        const double per_length = dim == 1 ? 1.0 : 2.0 * std::numbers::pi * radius;
        return EnergyRow{eps, grid.n, mm_energy(phi, eps, W).total, sigma * per_length};
    });
    const auto out = path_in(dir, "mm.csv");
    csv::write_text(out, energy_rows(dim == 1 ? "mm-step" : "mm-disc", rows));
    return {out};
}

Outputs run_nonlocal(const Config& cfg, const std::string& dir)
{
    const auto eps_list = positive_list(cfg, "eps", {1.0 / 8, 1.0 / 16, 1.0 / 32});
    const int dim = cfg.get_int("dim", 1);
    const int per = cfg.get_int("cells_per_eps", 16);
    const double width = cfg.get_double("width", 0.05);
    const auto eta = kernel_by_name(cfg.get("kernel", "indicator"));
    const double sigma = sigma_eta(eta, dim);
    auto step = [&](double s) { return 0.5 * (1.0 + std::tanh(s / width)); };
    const double variation = step(0.5) - step(-0.5);
    auto rows = parallel_map<EnergyRow>(eps_list.size(), [&](std::size_t i) {
        const double eps = eps_list[i];
        const Grid grid(dim, static_cast<int>(std::lround(per / eps)));
        auto phi = GridFunction::from_function(grid, [&](const Point& x) { return step(x[0] - 0.5); });
        return EnergyRow{eps, grid.n, nonlocal_tv_energy(phi, eps, eta, GridFunction(grid, 1.0)).total,
                         sigma * variation};
    });
    const auto out = path_in(dir, "nonlocal.csv");
    csv::write_text(out, energy_rows("nonlocal-step", rows));
    return {out};
}

Atom atom_from(const Config& cfg, const std::string& key, const Atom& fallback)
{
    auto v = cfg.get_doubles(key, {fallback.x[0], fallback.x[1], fallback.mass});
    require(v.size() == 3, ErrorKind::InvalidInput, "'" + key + "' must be x, y, mass");
    return {{v[0], v[1]}, v[2]};
}

Outputs run_recover(const Config& cfg, const std::string& dir)
{
    const int N = cfg.get_int("N", 256);
    const auto model_name = cfg.get("model", "tv");
    const double radius = cfg.get_double("radius", 0.25);
    const double u = cfg.get_double("density", 1.0);
    const auto atom = atom_from(cfg, "atom", {{51.5 / 256, 51.5 / 256}, 0.1});
    auto psi = psi_from(cfg);
    auto env = convex_subadditive_envelope(psi);
    const Grid grid(2, N);

    EnergyModel model;
    GridFunction phi;
    if (model_name == "tv") {
        model = tv_model(cfg.get_double("rho_squared", 1.0));
        phi = mollified_disc(grid, {0.5, 0.5}, radius, cfg.get_double("ramp_cells", 4.0) * grid.h());
    } else if (model_name == "mm") {
        const double eps = cfg.get_double("eps", 8.0 * grid.h());
        const auto W = double_well_by_name(cfg.get("well", "quartic"));
        model = mm_model(eps, W);
        auto profile = optimal_profile(W, eps);
        phi = GridFunction::from_function(
            grid, [&](const Point& x) { return profile(radius - std::hypot(x[0] - 0.5, x[1] - 0.5)); });
    } else {
        fail(ErrorKind::InvalidInput, "model must be tv or mm");
    }
    auto F = model.measure(phi);
    GridMeasure mu = F.scaled(u);
    if (atom.mass > 0.0)
        mu.add_atom(atom);
    const double target = sharp_energy(F, mu, env);

    PipelineParams params;
    params.n = cfg.get_int("n", 16);
    params.average = cfg.get_int("average", 0);
    params.k = cfg.get_int("k", 8);
    params.j = cfg.get_int("j", 4);
    params.delta = cfg.get_double("delta", 1e-3);
    params.wriggle.oscillations = cfg.get_int("oscillations", 16);
    params.wriggle.cells_per_half_period = cfg.get_int("cells_per_half_period", 1);
    auto result = recovery_pipeline(phi, model, mu, psi, params);

    const int param_of[] = {params.n, params.average > 0 ? params.average : params.n, params.k, params.j};
    std::string text = "stage,param,energy,target,gap\n";
    for (std::size_t s = 0; s < result.stages.size(); ++s) {
        const auto& st = result.stages[s];
        text += st.stage + "," + std::to_string(param_of[s]) + "," + csv::num(st.energy) + "," + csv::num(target) +
                "," + csv::num((st.energy - target) / target) + "\n";
    }
    const auto out = path_in(dir, "recover.csv");
    csv::write_text(out, text);
    return {out};
}

Outputs run_sandwich(const Config& cfg, const std::string& dir)
{
    const auto eps_list = positive_list(cfg, "eps", {1.0 / 16, 1.0 / 32, 1.0 / 64});
    auto psi = psi_from(cfg);
    const auto W = double_well_by_name(cfg.get("well", "quartic"));
    const auto which = cfg.get("couple", "all");
    SandwichOptions opt;
    opt.cells_per_eps = cfg.get_int("cells_per_eps", 8);
    opt.dirac_level = cfg.get_int("n", 16);
    opt.competitor_factors = positive_list(cfg, "competitor_factors", {0.5, 2.0});

    std::vector<SandwichCouple> couples;
    const double radius = cfg.get_double("radius", 0.25);
    const double u = cfg.get_double("density", 1.0);
    const auto atom = atom_from(cfg, "atom", {{0.18, 0.18}, 0.1});
    if (which == "zero" || which == "all")
        couples.push_back({"zero", {0.5, 0.5}, radius, 0.0, {}});
    if (which == "uniform" || which == "all")
        couples.push_back({"uniform", {0.5, 0.5}, radius, u, {}});
    if (which == "atom" || which == "all")
        couples.push_back({"atom", {0.5, 0.5}, radius, u, {atom}});
    require(!couples.empty(), ErrorKind::InvalidInput, "couple must be zero, uniform, atom or all");

    std::vector<std::pair<std::size_t, double>> jobs;
    for (std::size_t c = 0; c < couples.size(); ++c) {
        for (double eps : eps_list)
            jobs.push_back({c, eps});
    }
    auto parts = parallel_map<std::vector<SandwichRow>>(jobs.size(), [&](std::size_t i) {
        return gamma_sandwich_report(couples[jobs[i].first], {jobs[i].second}, psi, W, opt);
    });
    std::vector<SandwichRow> rows;
    for (auto& p : parts)
        rows.insert(rows.end(), p.begin(), p.end());
    const auto out = path_in(dir, "sandwich.csv");
    write_sandwich_csv(out, rows);
    const double finest = *std::min_element(eps_list.begin(), eps_list.end());
    for (const auto& r : rows)
        if (r.eps == finest)
            require(r.gap >= -0.02, ErrorKind::Contract,
                    "sequence " + r.sequence + " at eps " + csv::num(r.eps) + " falls below the sharp value");
    return {out};
}

struct MinimizeRun {
    double eps = 0.0;
    int N = 0;
    double initial = 0.0;
    double frozen = 0.0;
    MinimizeResult result;
};

Outputs run_minimize(const Config& cfg, const std::string& dir)
{
    const auto eps_list = positive_list(cfg, "eps", {1.0 / 16, 1.0 / 32});
    const int dim = cfg.get_int("dim", 1);
    const int per = cfg.get_int("cells_per_eps", 8);
    const double volume = cfg.get_double("volume", dim == 1 ? 0.5 : 0.25);
    const double ratio = cfg.get_double("mass_ratio", 0.0);
    auto psi = psi_from(cfg);
    auto env = convex_subadditive_envelope(psi);
    const auto W = double_well_by_name(cfg.get("well", "quartic"));
    MinimizeOptions opt;
    opt.budget = cfg.get_int("budget", 300);
    require(ratio >= 0.0, ErrorKind::InvalidInput, "mass_ratio must be nonnegative");
    if (ratio > 0.0)
        require(env.t0_finite(), ErrorKind::Domain, "mass_ratio needs a finite t0");

    auto runs = parallel_map<MinimizeRun>(eps_list.size(), [&](std::size_t i) {
        const double eps = eps_list[i];
        const Grid grid(dim, static_cast<int>(std::lround(per / eps)));
        GridFunction phi = dim == 1 ? mollified_disc(grid, {0.0, 0.5}, volume, 4.0 * eps)
                                    : mollified_disc(grid, {0.5, 0.5}, std::sqrt(volume / std::numbers::pi), 4.0 * eps);
        const double nu = mm_energy(phi, eps, W).total;
        const double mass = ratio > 0.0 ? ratio * env.t0 * nu : cfg.get_double("mass", 0.0);
        auto state = make_adatom_state(phi, mass);
        MinimizeRun run;
        run.eps = eps;
        run.N = grid.n;
        run.frozen = frozen_phi_energy(phi, eps, W, psi, mass);
        run.result = minimize_mm_adatom(state, eps, W, psi, opt);
        run.initial = run.result.trace.front().energy;
        return run;
    });

    Outputs outputs;
    std::string text = "eps,N,initial,frozen,final,iterations,converged\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        text += csv::num(r.eps) + "," + std::to_string(r.N) + "," + csv::num(r.initial) + "," + csv::num(r.frozen) +
                "," + csv::num(r.result.energy) + "," + std::to_string(r.result.trace.size() - 1) + "," +
                (r.result.converged ? "1" : "0") + "\n";
        const auto trace = path_in(dir, "trace_" + std::to_string(i) + ".csv");
        write_trace_csv(trace, r.result.trace);
        outputs.push_back(trace);
        for (std::size_t k = 1; k < r.result.trace.size(); ++k)
            require(r.result.trace[k].energy <= r.result.trace[k - 1].energy, ErrorKind::Contract,
                    "energy trace increased");
    }
    const auto summary = path_in(dir, "minimize_summary.csv");
    csv::write_text(summary, text);
    outputs.insert(outputs.begin(), summary);
    return outputs;
}

using Runner = Outputs (*)(const Config&, const std::string&);

const std::map<std::string, Runner>& runners()
{
    static const std::map<std::string, Runner> table{
        {"envelope", run_envelope}, {"measures", run_measures}, {"wriggle", run_wriggle},
        {"mm", run_mm},             {"nonlocal", run_nonlocal}, {"recover", run_recover},
        {"sandwich", run_sandwich}, {"minimize", run_minimize},
    };
    return table;
}

std::string inputs_hash(const std::string& subcommand, const Config& cfg)
{
    std::string blob = subcommand + "\n" + cfg.canonical();
    for (const auto& [key, value] : cfg.values()) {
        if (key.size() > 5 && key.compare(key.size() - 5, 5, "_file") == 0) {
            std::ifstream in(value, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            blob += ss.str();
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016zx", std::hash<std::string>{}(blob));
    return buf;
}

}  // namespace

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, r] : runners())
            v.push_back(k);
        return v;
    }();
    return names;
}

const char* library_version() { return "0.1.0"; }

RunResult run_experiment(const std::string& subcommand, const Config& config, const std::string& out_dir)
{
    const auto start = std::chrono::steady_clock::now();
    RunResult result;
    try {
        auto it = runners().find(subcommand);
        require(it != runners().end(), ErrorKind::InvalidInput, "unknown subcommand '" + subcommand + "'");
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        require(!ec, ErrorKind::Io, "cannot create output directory " + out_dir);
        result.outputs = it->second(config, out_dir);
        result.message = "ok";
    } catch (const Error& e) {
        result.exit_code = e.kind() == ErrorKind::Contract ? 2 : 1;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = 2;
        result.message = std::string("internal error: ") + e.what();
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::json manifest;
    manifest["subcommand"] = subcommand;
    manifest["config"] = config.values();
    manifest["inputs_hash"] = inputs_hash(subcommand, config);
    manifest["version"] = library_version();
    manifest["wall_time_seconds"] = wall;
    manifest["exit_code"] = result.exit_code;
    manifest["outputs"] = result.outputs;
    manifest["message"] = result.message;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream out(path_in(out_dir, "manifest.json"), std::ios::binary);
    if (out)
        out << manifest.dump(2) << "\n";
    return result;
}

}  // namespace gammalab
