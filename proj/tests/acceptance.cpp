#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gammalab/envelope.hpp"
#include "gammalab/experiment.hpp"
#include "gammalab/functionals.hpp"
#include "gammalab/measures.hpp"
#include "gammalab/optimize.hpp"
#include "gammalab/recovery.hpp"

using namespace gammalab;
namespace fs = std::filesystem;

namespace {

constexpr double kHullTol = 1e-8;
constexpr double kHullSeconds = 1.0;
constexpr double kRatzVoigtTol = 1e-4;
constexpr double kCsTol = 1e-10;
constexpr double kWriggleTol = 0.01;
constexpr double kCrumbleRatio = 0.25;
constexpr double kCrumbleFloor = 1e-12;
constexpr double kWeakstarDrop = 2.0;
constexpr double kSingularTol = 0.02;
constexpr double kSingularWeakstarRatio = 0.25;
constexpr double kSigmaTol = 1e-6;
constexpr double kProfileTol = 0.02;
constexpr double kDiscTol = 0.05;
constexpr double kNonlocalTol = 0.03;
constexpr double kSandwichAbove = 0.04;
constexpr double kSandwichBelow = 0.02;
constexpr double kRelaxationDrop = 0.03;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');)
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

struct Run {
    std::string name;
    std::vector<std::pair<std::string, std::string>> keys;
};

Config config_of(const Run& r)
{
    Config cfg;
    for (const auto& [k, v] : r.keys)
        cfg.set(k, v);
    return cfg;
}

const fs::path& root()
{
    static const fs::path dir = fs::temp_directory_path() / "gammalab_acceptance";
    return dir;
}

fs::path run_into(const Run& r, const std::string& tag)
{
    auto dir = root() / tag / r.name;
    fs::remove_all(dir);
    auto result = run_experiment(r.name, config_of(r), dir.string());
    if (result.exit_code != 0)
        throw std::runtime_error(r.name + ": " + result.message);
    return dir;
}

const Run kWriggleRun{"wriggle", {{"factor", "2"}, {"p", "1, 2"}, {"n", "32"}, {"quadrature", "1024"}}};
const Run kNonlocalRun{"nonlocal", {{"eps", "0.125, 0.0625, 0.03125"}, {"cells_per_eps", "16"}, {"dim", "1"}}};
const Run kSandwichRun{"sandwich",
                       {{"eps", "0.03125, 0.015625, 0.0078125"}, {"couple", "all"}, {"cells_per_eps", "8"}}};
const Run kMinimizeRun{"minimize",
                       {{"eps", "0.0625"}, {"dim", "2"}, {"volume", "0.25"}, {"mass_ratio", "2"}, {"budget", "300"}}};

// Lower convex envelope by exhaustive search over grid pairs around each node.
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

Outcome a1()
{
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> amp(0.1, 1.5), freq(1.0, 12.0), noise(0.0, 0.3);
    double worst = 0.0, hull_time = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double a = amp(rng), w = freq(rng);
        std::vector<double> v(401);
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double t = 4.0 * static_cast<double>(k) / 400.0;
            v[k] = 1.0 + 0.3 * t * t + a * std::sin(w * t) + a + noise(rng);
        }
        SampledFunction f(4.0, v);
        const auto start = Clock::now();
        auto hull = convex_envelope(f);
        hull_time += seconds_since(start);
        auto oracle = two_point_oracle(f);
        for (std::size_t k = 0; k < v.size(); ++k)
            worst = std::max(worst, std::abs(hull[k] - oracle[k]));
    }
    return {worst <= kHullTol && hull_time < kHullSeconds,
            fmt("max |hull - oracle| = %.3g over 20 tables, hull time %.4f s", worst, hull_time)};
}

Outcome a2()
{
    auto psi = builtin_function("ratz-voigt", 8.0, 8001);
    auto env = convex_subadditive_envelope(psi);
    const double root2 = std::sqrt(2.0);
    // Fine grid minimum of psi(t)/t for the closed form psi(t) = 1 + t^2/2.
    double best = kInfinity, arg = 0.0;
    for (int k = 1; k <= 8000000; ++k) {
        const double t = 1e-6 * k;
        const double r = (1.0 + 0.5 * t * t) / t;
        if (r < best) {
            best = r;
            arg = t;
        }
    }
    auto cs = cs_of_c_equals_cs_check(psi, kCsTol);
    const bool ok = std::abs(env.t0 - root2) < kRatzVoigtTol && std::abs(env.theta_cs - root2) < kRatzVoigtTol &&
                    std::abs(arg - root2) < kRatzVoigtTol && std::abs(best - root2) < kRatzVoigtTol && cs.ok;
    return {ok, fmt("t0 = %.8f, theta = %.8f, grid min of psi/t = %.8f at %.6f, cs(c) deviation %.3g", env.t0,
                    env.theta_cs, best, arg, cs.max_deviation)};
}

Outcome a3()
{
    const auto start = Clock::now();
    auto rows = read_rows(run_into(kWriggleRun, "first") / "wriggle.csv");
    const double elapsed = seconds_since(start);
    bool ok = rows.size() == 2;
    std::string detail;
    for (const auto& r : rows) {
        const double measured = std::stod(r[4]);
        ok = ok && std::abs(measured - 2.0) / 2.0 < kWriggleTol;
        detail += fmt("p=%s b=%.4f ratio %.5f; ", r[1].c_str(), std::stod(r[3]), measured);
    }
    return {ok && elapsed < 20.0, detail + fmt("%.1f s", elapsed)};
}

Outcome a4()
{
    Grid g(2, 256);
    auto mu = GridMeasure::from_density(g, [](const Point& x) { return x[0]; });
    bool ok = true;
    std::string detail;
    for (double lambda : {0.25, 0.5, 0.9}) {
        const auto target = mu.scaled(lambda);
        double first_d = 0.0, last_d = 0.0, first_e = 0.0, last_e = 0.0;
        for (int j = 2; j <= 8; ++j) {
            auto c = crumble_partition(mu, lambda, j);
            const double d = weakstar_distance(mu.restricted(c.mask), target);
            if (j == 2) {
                first_d = d;
                first_e = c.max_proportion_error;
            }
            last_d = d;
            last_e = c.max_proportion_error;
        }
        ok = ok && last_e <= std::max(kCrumbleRatio * first_e, kCrumbleFloor) && first_d >= kWeakstarDrop * last_d;
        detail += fmt("lambda %.2f: err %.3g -> %.3g, d* %.3g -> %.3g; ", lambda, first_e, last_e, first_d, last_d);
    }
    return {ok, detail};
}

Outcome a5()
{
    Grid g(2, 256);
    auto phi = mollified_disc(g, {0.5, 0.5}, 0.25, 4.0 * g.h());
    auto model = tv_model();
    auto F = model.measure(phi);
    GridMeasure mu = F.scaled(1.0);
    mu.add_atom({{51.5 / 256, 51.5 / 256}, 0.1});
    auto psi = builtin_function("ratz-voigt", 8.0, 8001);
    auto env = convex_subadditive_envelope(psi);
    const double target = sharp_energy(F, mu, env);
    double energy16 = 0.0, d4 = 0.0, d16 = 0.0;
    for (int n : {4, 16}) {
        auto rec = recover_singular(phi, model, mu, env, n);
        const double d = weakstar_distance(density_times(rec.h, rec.energy), mu);
        (n == 4 ? d4 : d16) = d;
        if (n == 16)
            energy16 = zeta_energy(rec.h, rec.energy, env);
    }
    const double gap = (energy16 - target) / target;
    return {std::abs(gap) <= kSingularTol && d16 <= kSingularWeakstarRatio * d4,
            fmt("energy %.6f vs %.6f (gap %+.3f%%), d* n=4 %.3g, n=16 %.3g", energy16, target, 100 * gap, d4, d16)};
}

Outcome a6()
{
    const auto start = Clock::now();
    auto W = quartic_well();
    const double sigma = sigma_W(W);

    const double eps = 1.0 / 64;
    Grid line(1, 512);
    auto profile = optimal_profile(W, eps);
    auto step = GridFunction::from_function(line, [&](const Point& x) { return profile(x[0] - 0.5); });
    const double e1 = mm_energy(step, eps, W).total;

    const double volume = 0.25, eps2 = 1.0 / 32;
    Grid plane(2, 128);
    auto disc = mollified_disc(plane, {0.5, 0.5}, std::sqrt(volume / std::numbers::pi), 4.0 * eps2);
    MinimizeOptions mo;
    mo.budget = 2000;
    auto r = minimize_mm_adatom(make_adatom_state(disc, 0.0), eps2, W, builtin_function("const:1", 8.0, 801), mo);
    const double limit = sigma * 2.0 * std::sqrt(std::numbers::pi * volume);
    const double elapsed = seconds_since(start);

    const bool ok = std::abs(sigma - 1.0 / 3.0) < kSigmaTol && std::abs(e1 - sigma) / sigma < kProfileTol &&
                    std::abs(r.energy - limit) / limit < kDiscTol && elapsed < 120.0;
    return {ok, fmt("sigma %.10f, 1-D profile %.6f (%+.3f%%), 2-D disc %.6f vs %.6f (%+.3f%%), %.1f s", sigma, e1,
                    100 * (e1 - sigma) / sigma, r.energy, limit, 100 * (r.energy - limit) / limit, elapsed)};
}

Outcome a7()
{
    auto rows = read_rows(run_into(kNonlocalRun, "first") / "nonlocal.csv");
    bool ok = rows.size() == 3;
    std::string detail;
    for (const auto& r : rows) {
        const double rel = std::stod(r[5]);
        ok = ok && std::abs(rel) < kNonlocalTol;
        detail += fmt("eps %s: %+.2e; ", r[1].c_str(), rel);
    }
    return {ok, detail};
}

Outcome a8()
{
    auto rows = read_rows(run_into(kSandwichRun, "first") / "sandwich.csv");
    double finest = kInfinity;
    for (const auto& r : rows)
        finest = std::min(finest, std::stod(r[1]));
    bool ok = !rows.empty();
    std::string detail;
    double lowest = kInfinity;
    for (const auto& r : rows) {
        const double gap = std::stod(r[6]);
        if (std::stod(r[1]) != finest)
            continue;
        lowest = std::min(lowest, gap);
        ok = ok && gap >= -kSandwichBelow;
        if (r[3] == "recovery") {
            ok = ok && gap <= kSandwichAbove;
            detail += fmt("%s recovery %+.3f%%; ", r[0].c_str(), 100 * gap);
        }
    }
    return {ok, detail + fmt("lowest gap at eps %.4g: %+.3f%%", finest, 100 * lowest)};
}

Outcome a9()
{
    auto rows = read_rows(run_into(kMinimizeRun, "first") / "minimize_summary.csv");
    if (rows.size() != 1)
        return {false, "missing summary row"};
    const double frozen = std::stod(rows[0][3]), free = std::stod(rows[0][4]);
    const double drop = (frozen - free) / frozen;
    return {drop >= kRelaxationDrop, fmt("frozen %.6f, free %.6f, drop %.2f%%", frozen, free, 100 * drop)};
}

Outcome a10()
{
    const Run envelope{"envelope", {{"psi", "ratz-voigt"}, {"samples", "8001"}}};
    const Run measures{"measures", {{"N", "256"}, {"lambda", "0.25, 0.5, 0.9"}, {"j", "2, 4, 6, 8"}}};
    const Run recover{"recover", {{"N", "256"}, {"n", "16"}}};
    const std::vector<const Run*> runs{&envelope, &measures, &kWriggleRun, &kNonlocalRun,
                                       &recover,  &kSandwichRun, &kMinimizeRun};
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const Run* r : runs) {
        setenv("GAMMALAB_THREADS", "1", 1);
        auto a = run_into(*r, "repeat_a");
        setenv("GAMMALAB_THREADS", "4", 1);
        auto b = run_into(*r, "repeat_b");
        unsetenv("GAMMALAB_THREADS");
        for (const auto& entry : fs::directory_iterator(a)) {
            if (entry.path().extension() != ".csv")
                continue;
            ++files;
            if (slurp(entry.path()) != slurp(b / entry.path().filename()))
                differing.push_back(r->name + "/" + entry.path().filename().string());
        }
    }
    std::string detail = fmt("%zu CSVs compared across 7 experiments", files);
    for (const auto& d : differing)
        detail += " differs: " + d;
    return {differing.empty() && files > 0, detail};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
        {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%-4s %s  %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
