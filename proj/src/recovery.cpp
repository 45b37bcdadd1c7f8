#include "gammalab/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gammalab/error.hpp"

namespace gammalab {

EnergyModel tv_model(double rho_squared)
{
    require(rho_squared > 0.0, ErrorKind::InvalidInput, "weight must be positive");
    const double rho = std::sqrt(rho_squared);
    return {"tv", [rho](const GridFunction& phi) {
                return weighted_tv_energy(phi, GridFunction(phi.grid(), rho)).density;
            },
            0.0};
}

EnergyModel mm_model(double eps, const DoubleWell& W)
{
    return {"mm", [eps, W](const GridFunction& phi) { return mm_energy(phi, eps, W).density; }, eps};
}

double zeta_energy(const std::vector<double>& h, const GridMeasure& energy, const EnvelopeTable& zeta)
{
    require(h.size() == energy.weights().size(), ErrorKind::InvalidInput, "density size does not match grid");
    CompensatedSum s;
    for (std::size_t c = 0; c < h.size(); ++c) {
        if (energy.weights()[c] > 0.0)
            s.add(zeta.eval_convex_subadditive(h[c]) * energy.weights()[c]);
    }
    return s.value();
}

GridMeasure density_times(const std::vector<double>& h, const GridMeasure& energy)
{
    require(h.size() == energy.weights().size(), ErrorKind::InvalidInput, "density size does not match grid");
    std::vector<double> w(h.size());
    for (std::size_t c = 0; c < h.size(); ++c)
        w[c] = h[c] * energy.weights()[c];
    return GridMeasure(energy.grid(), std::move(w));
}

namespace {

double cube_inradius(const Point& x, int n, int dim)
{
    double r = kInfinity;
    for (int a = 0; a < dim; ++a) {
        const double q = std::clamp(std::floor(x[a] * n), 0.0, n - 1.0);
        r = std::min({r, x[a] - q / n, (q + 1.0) / n - x[a]});
    }
    return r;
}

double distance(const Point& a, const Point& b, int dim)
{
    return dim == 1 ? std::abs(a[0] - b[0]) : std::hypot(a[0] - b[0], a[1] - b[1]);
}

std::vector<std::size_t> cells_within(const Grid& g, const Point& x, double r)
{
    std::vector<std::size_t> out;
    const std::size_t home = g.locate(x);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        if (c == home || distance(g.center_of(c), x, g.dim) <= r)
            out.push_back(c);
    }
    return out;
}

double mass_on(const GridMeasure& F, const std::vector<std::size_t>& cells)
{
    CompensatedSum s;
    for (auto c : cells)
        s.add(F.weights()[c]);
    return s.value();
}

// Largest ball around x inside radius cap with 0 < F(B) < bound.
std::vector<std::size_t> admissible_ball(const GridMeasure& F, const Point& x, double cap, double bound,
                                         bool& within, double& radius)
{
    const auto& g = F.grid();
    auto cells = cells_within(g, x, cap);
    std::vector<double> dist(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        dist[i] = distance(g.center_of(cells[i]), x, g.dim);
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    CompensatedSum acc;
    std::size_t best = 0, first_positive = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        acc.add(F.weights()[cells[order[k]]]);
        const bool group_end = k + 1 == order.size() || dist[order[k + 1]] > dist[order[k]];
        if (!group_end)
            continue;
        const double m = acc.value();
        if (m > 0.0 && first_positive == 0)
            first_positive = k + 1;
        if (m > 0.0 && m < bound)
            best = k + 1;
    }
    within = best > 0;
    std::size_t take = within ? best : first_positive;
    std::vector<std::size_t> out;
    radius = 0.0;
    for (std::size_t k = 0; k < take; ++k) {
        out.push_back(cells[order[k]]);
        radius = std::max(radius, dist[order[k]]);
    }
    return out;
}

// Energy a modified field adds on the region, relative to the base energy.
double added_energy(const GridMeasure& modified, const GridMeasure& base, const std::vector<std::size_t>& cells)
{
    CompensatedSum s;
    for (auto c : cells)
        s.add(std::max(0.0, modified.weights()[c] - base.weights()[c]));
    return s.value();
}

template <class Energy>
double bisect_parameter(const Energy& energy, double lo, double hi_start, double hi_cap, double target)
{
    double hi = hi_start;
    while (energy(hi) < target && hi < hi_cap)
        hi = std::min(hi_cap, 2.0 * std::max(hi, 1e-300) + (hi <= 0.0 ? hi_start : 0.0));
    if (energy(lo) >= target)
        return lo;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (energy(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SingularRecovery recover_singular(const GridFunction& phi, const EnergyModel& model, const GridMeasure& mu,
                                  const EnvelopeTable& zeta, int n, const SingularOptions& opt)
{
    require(std::isfinite(zeta.theta_cs), ErrorKind::Domain, "zeta has an infinite recession slope");
    require(n >= 1, ErrorKind::InvalidInput, "cube count must be positive");
    require(opt.target_density >= 0.0, ErrorKind::InvalidInput, "target density must be nonnegative");
    const auto& g = phi.grid();
    GridMeasure F = model.measure(phi);
    require(F.grid() == mu.grid(), ErrorKind::InvalidInput, "mu must share the grid of phi");
    auto d = radon_nikodym_decompose(mu, F);

    SingularRecovery out{phi, d.density, F, {}};
    if (d.singular.total() <= 0.0)
        return out;
    if (opt.shape == BumpShape::Droplet)
        require(model.profile_width > 0.0, ErrorKind::InvalidInput, "droplet bumps need a phase-field model");

    auto deltas = dirac_approximation(d.singular, n);
    const double cubes = std::pow(static_cast<double>(n), g.dim);
    const double h = g.h();
    std::vector<std::vector<std::size_t>> regions;
    std::vector<GridMeasure> before;  // energy under each bump before it is placed; empty for plain balls

    for (const auto& a : deltas.atoms()) {
        RecoveredAtom rec;
        rec.atom = a;
        rec.bound = a.mass / (cubes * n);
        const double cap = std::max(cube_inradius(a.x, n, g.dim), h);
        const double nearby = mass_on(F, cells_within(g, a.x, cap));

        if (opt.target_density == 0.0 && nearby > 0.0) {
            rec.type_a = true;
            regions.push_back(admissible_ball(F, a.x, cap, rec.bound, rec.within_bound, rec.radius));
            before.emplace_back();
            out.atoms.push_back(rec);
            continue;
        }

        const double target = opt.target_density > 0.0 ? a.mass / opt.target_density : 0.5 * rec.bound;
        rec.type_a = nearby > 0.0;
        const GridFunction base = out.phi;
        const GridMeasure base_energy = model.measure(base);
        struct Placement {
            GridFunction phi;
            std::vector<std::size_t> region;
            double radius = 0.0;
        };
        auto place_smooth = [&](const Point& x) {
            const double rb = std::max(2.0 * h, 0.5 * cap);
            auto region = cells_within(g, x, rb + 2.0 * h);
            std::vector<double> bump(region.size(), 0.0);
            for (std::size_t i = 0; i < region.size(); ++i) {
                const double r = distance(g.center_of(region[i]), x, g.dim);
                if (r < rb)
                    bump[i] = std::pow(std::cos(0.5 * std::numbers::pi * r / rb), 2);
            }
            auto apply = [&](double amp) {
                GridFunction f = base;
                for (std::size_t i = 0; i < region.size(); ++i)
                    f[region[i]] += amp * bump[i];
                return f;
            };
            auto energy = [&](double amp) { return added_energy(model.measure(apply(amp)), base_energy, region); };
            const double amp = bisect_parameter(energy, 0.0, 1.0, 1e12, target);
            return Placement{apply(amp), region, rb};
        };
        const bool hole = base.sample(a.x) >= 0.5;
        auto place_droplet = [&](const Point& x) {
            const double eps = model.profile_width;
            auto apply = [&](double rho, const std::vector<std::size_t>& region) {
                GridFunction f = base;
                for (auto c : region) {
                    const double dr = 0.5 * (1.0 + std::tanh((rho - distance(g.center_of(c), x, g.dim)) / (2.0 * eps)));
                    f[c] = hole ? base[c] * (1.0 - dr) : 1.0 - (1.0 - base[c]) * (1.0 - dr);
                }
                return f;
            };
            // Grow the radius bracket first, then fix the region to the bracket.
            double hi = eps;
            for (int it = 0; it < 60; ++it) {
                auto region = cells_within(g, x, hi + 6.0 * eps);
                if (added_energy(model.measure(apply(hi, region)), base_energy, region) >= target || hi >= 0.5)
                    break;
                hi *= 1.25;
            }
            auto region = cells_within(g, x, hi + 6.0 * eps);
            auto energy = [&](double rho) {
                return added_energy(model.measure(apply(rho, region)), base_energy, region);
            };
            const double rho = bisect_parameter(energy, -6.0 * eps, hi, hi, target);
            return Placement{apply(rho, region), region, rho};
        };
        auto place = [&](const Point& x) { return opt.shape == BumpShape::Smooth ? place_smooth(x) : place_droplet(x); };

        // The energy stencil can shift the added energy off the bump centre; move the bump so the
        // barycentre of its added energy sits on the atom.
        auto placed = place(a.x);
        {
            const auto placed_energy = model.measure(placed.phi);
            const auto& Fb = placed_energy.weights();
            double cx = 0.0, cy = 0.0, m = 0.0;
            for (auto c : placed.region) {
                const double w = std::max(0.0, Fb[c] - base_energy.weights()[c]);
                const auto p = g.center_of(c);
                cx += w * p[0];
                cy += w * p[1];
                m += w;
            }
            if (m > 0.0) {
                Point shifted{2.0 * a.x[0] - cx / m, g.dim == 1 ? a.x[1] : 2.0 * a.x[1] - cy / m};
                if (distance(shifted, a.x, g.dim) < h)
                    placed = place(shifted);
            }
        }
        out.phi = std::move(placed.phi);
        rec.radius = placed.radius;
        regions.push_back(std::move(placed.region));
        before.push_back(base_energy);
        out.atoms.push_back(rec);
    }

    // Density mass stays where it was; each atom is spread over the energy its bump added
    // (over the ball energy for plain balls).
    out.energy = model.measure(out.phi);
    const auto& Fn = out.energy.weights();
    for (std::size_t c = 0; c < g.cells(); ++c)
        out.h[c] = Fn[c] > 0.0 ? d.density[c] * F.weights()[c] / Fn[c] : 0.0;
    for (std::size_t k = 0; k < regions.size(); ++k) {
        auto& rec = out.atoms[k];
        double mass = rec.atom.mass;
        std::vector<double> w(regions[k].size());
        CompensatedSum total;
        for (std::size_t i = 0; i < regions[k].size(); ++i) {
            const auto c = regions[k][i];
            if (Fn[c] <= 0.0)
                mass += d.density[c] * F.weights()[c];
            w[i] = before[k].weights().empty() ? Fn[c] : std::clamp(Fn[c] - before[k].weights()[c], 0.0, Fn[c]);
            total.add(w[i]);
        }
        const double fm = total.value();
        require(fm > 0.0, ErrorKind::Contract, "recovery ball carries no energy");
        for (std::size_t i = 0; i < regions[k].size(); ++i) {
            const auto c = regions[k][i];
            if (Fn[c] > 0.0)
                out.h[c] += mass * w[i] / (fm * Fn[c]);
        }
        rec.ball_energy = fm;
        rec.density = rec.atom.mass / fm;
        if (!rec.type_a || opt.target_density > 0.0)
            rec.within_bound = opt.target_density > 0.0 || fm < rec.bound;
    }
    return out;
}

double CubeDensity::at(const Point& x) const
{
    auto axis = [&](double v) { return std::clamp(static_cast<int>(std::floor(v * m)), 0, m - 1); };
    return dim == 1 ? alpha[axis(x[0])] : alpha[static_cast<std::size_t>(axis(x[1])) * m + axis(x[0])];
}

std::vector<double> CubeDensity::on(const Grid& grid) const
{
    std::vector<double> out(grid.cells());
    for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = at(grid.center_of(c));
    return out;
}

CubeDensity piecewise_average_density(const std::vector<double>& g, const GridMeasure& F, int n)
{
    require(n >= 1, ErrorKind::InvalidInput, "cube count must be positive");
    require(g.size() == F.weights().size(), ErrorKind::InvalidInput, "density size does not match grid");
    const auto& grid = F.grid();
    CubeDensity out;
    out.dim = grid.dim;
    out.m = n;
    const std::size_t cubes = grid.dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    std::vector<CompensatedSum> num(cubes), den(cubes);
    for (std::size_t c = 0; c < g.size(); ++c) {
        auto p = grid.center_of(c);
        const int cx = std::clamp(static_cast<int>(std::floor(p[0] * n)), 0, n - 1);
        const int cy = grid.dim == 1 ? 0 : std::clamp(static_cast<int>(std::floor(p[1] * n)), 0, n - 1);
        const std::size_t q = static_cast<std::size_t>(cy) * n + cx;
        num[q].add(g[c] * F.weights()[c]);
        den[q].add(F.weights()[c]);
    }
    out.alpha.resize(cubes);
    for (std::size_t q = 0; q < cubes; ++q) {
        const double fm = den[q].value();
        out.alpha[q] = fm > 0.0 ? num[q].value() / fm : 1.0 / (n * static_cast<double>(cubes));
    }
    return out;
}

ScaledCouple scale_to_subadditive(const GridFunction& phi, const CubeDensity& g, const EnvelopeTable& env, int k,
                                  const WriggleOptions& opt)
{
    require(g.dim == phi.grid().dim, ErrorKind::InvalidInput, "density and field dimensions differ");
    if (!env.t0_finite())
        return {phi, g.on(phi.grid()), 0};
    const double cap = env.base.node(env.branch_index);
    MultiplierField field;
    for (std::size_t q = 0; q < g.alpha.size(); ++q) {
        if (g.alpha[q] <= cap * (1.0 + 1e-9))
            continue;
        const int cx = static_cast<int>(q % g.m), cy = static_cast<int>(q / g.m);
        const double s = 1.0 / g.m;
        field.regions.push_back({cx * s, (cx + 1) * s, cy * s, (cy + 1) * s, g.alpha[q] / cap});
    }
    if (field.regions.empty())
        return {phi, g.on(phi.grid()), 0};
    require(k % g.m == 0, ErrorKind::InvalidInput, "wriggle cube count must be a multiple of the density cubes");
    auto wr = wriggle_field(phi, field, k, opt);
    CubeDensity capped = g;
    for (auto& a : capped.alpha)
        a = std::min(a, cap);
    return {wr.phi, capped.on(wr.phi.grid()), wr.wriggled_cubes};
}

std::vector<double> split_density(const GridMeasure& energy, const CubeDensity& g, const EnvelopeTable& psi, int j,
                                  double delta)
{
    require(!energy.has_atoms(), ErrorKind::InvalidInput, "split_density needs a non-atomic energy measure");
    const auto& grid = energy.grid();
    require(g.dim == grid.dim, ErrorKind::InvalidInput, "density and measure dimensions differ");
    std::vector<double> h = g.on(grid);
    std::vector<std::size_t> cube_of(grid.cells());
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        auto p = grid.center_of(c);
        const int cx = std::clamp(static_cast<int>(std::floor(p[0] * g.m)), 0, g.m - 1);
        const int cy = grid.dim == 1 ? 0 : std::clamp(static_cast<int>(std::floor(p[1] * g.m)), 0, g.m - 1);
        cube_of[c] = static_cast<std::size_t>(cy) * g.m + cx;
    }
    for (std::size_t q = 0; q < g.alpha.size(); ++q) {
        auto tp = two_point_decomposition(psi, g.alpha[q], delta);
        if (tp.lambda >= 1.0)
            continue;
        std::vector<char> region(grid.cells(), 0);
        bool any = false;
        for (std::size_t c = 0; c < grid.cells(); ++c) {
            region[c] = cube_of[c] == q;
            any = any || region[c];
        }
        if (!any)
            continue;
        auto cr = crumble_partition(energy.restricted(region), tp.lambda, j);
        for (std::size_t c = 0; c < grid.cells(); ++c) {
            if (region[c])
                h[c] = cr.mask[c] ? tp.s : tp.t;
        }
    }
    return h;
}

PipelineResult recovery_pipeline(const GridFunction& phi, const EnergyModel& model, const GridMeasure& mu,
                                 const SampledFunction& psi, const PipelineParams& params)
{
    auto env = convex_subadditive_envelope(psi);
    PipelineResult out;
    auto record = [&](const std::string& stage, double energy, const std::vector<double>& h, const GridMeasure& F) {
        out.stages.push_back({stage, energy, density_times(h, F).total()});
    };

    SingularOptions sopt;
    sopt.target_density = params.atom_density > 0.0 ? params.atom_density
                          : env.t0_finite()         ? env.base.node(env.branch_index)
                                                    : 0.0;
    sopt.shape = model.profile_width > 0.0 ? BumpShape::Droplet : BumpShape::Smooth;
    auto rs = recover_singular(phi, model, mu, env, params.n, sopt);
    record("singular", zeta_energy(rs.h, rs.energy, env), rs.h, rs.energy);

    const int avg = params.average > 0 ? params.average : params.n;
    auto cd = piecewise_average_density(rs.h, rs.energy, avg);
    auto h2 = cd.on(rs.energy.grid());
    record("average", zeta_energy(h2, rs.energy, env), h2, rs.energy);

    auto sc = scale_to_subadditive(rs.phi, cd, env, params.k, params.wriggle);
    auto F3 = model.measure(sc.phi);
    CompensatedSum e3;
    for (std::size_t c = 0; c < sc.h.size(); ++c)
        e3.add(env.eval_convex(sc.h[c]) * F3.weights()[c]);
    record("scale", e3.value(), sc.h, F3);

    CubeDensity capped = cd;
    if (env.t0_finite()) {
        for (auto& a : capped.alpha)
            a = std::min(a, env.base.node(env.branch_index));
    }
    auto h4 = split_density(F3, capped, env, params.j, params.delta);
    CompensatedSum e4;
    for (std::size_t c = 0; c < h4.size(); ++c)
        e4.add(psi(h4[c]) * F3.weights()[c]);
    record("split", e4.value(), h4, F3);

    out.phi = sc.phi;
    out.h = std::move(h4);
    out.energy = std::move(F3);
    out.final_energy = e4.value();
    return out;
}

}  // namespace gammalab
