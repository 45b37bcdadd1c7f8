#include "gammalab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "csv.hpp"
#include "gammalab/error.hpp"

namespace gammalab {

namespace {

// Lower-hull vertices of the samples with the slopes of the edges leaving them.
struct Hull {
    std::vector<std::size_t> vertices;
    std::vector<double> slopes;

    explicit Hull(const SampledFunction& psi) : vertices(convex_subadditive_envelope(psi).hull_vertices)
    {
        for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
            slopes.push_back((psi[vertices[i + 1]] - psi[vertices[i]]) / (psi.node(vertices[i + 1]) - psi.node(vertices[i])));
    }

    // Smallest grid index minimizing psi(t_k) - lambda t_k.
    std::size_t tilted_argmin(double lambda) const
    {
        auto it = std::lower_bound(slopes.begin(), slopes.end(), lambda);
        return vertices[static_cast<std::size_t>(it - slopes.begin())];
    }
};

double weighted_value(const std::vector<double>& u, const GridMeasure& nu, const SampledFunction& psi)
{
    CompensatedSum s;
    for (std::size_t c = 0; c < u.size(); ++c)
        s.add(psi(u[c]) * nu.weights()[c]);
    return s.value();
}

}  // namespace

UOptimal u_optimal_given_phi(const GridMeasure& nu, const SampledFunction& psi, double m)
{
    require(!nu.has_atoms(), ErrorKind::InvalidInput, "nu must be a cell measure");
    const double total = nu.total();
    require(total > 0.0, ErrorKind::InvalidInput, "nu must have positive mass");
    require(m >= 0.0, ErrorKind::InvalidInput, "adatom mass must be nonnegative");
    require(m <= psi.tmax() * total * (1.0 + 1e-12), ErrorKind::Infeasible,
            "adatom mass exceeds tmax times the interfacial measure");

    const std::size_t cells = nu.weights().size();
    const double mean = std::min(m / total, psi.tmax());
    UOptimal out;

    const Hull hull(psi);
    double lo = hull.slopes.front() - 1.0, hi = hull.slopes.back() + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (psi.node(hull.tilted_argmin(mid)) < mean)
            lo = mid;
        else
            hi = mid;
    }
    const double s = psi.node(hull.tilted_argmin(lo));
    const double t = psi.node(hull.tilted_argmin(hi));

    const bool linear = t <= s || mean <= s || mean >= t ||
                        std::abs(psi(mean) - (psi(s) + (psi(t) - psi(s)) * (mean - s) / (t - s))) <=
                            1e-12 * std::max(1.0, std::abs(psi(mean)));
    out.multiplier = t > s ? (psi(t) - psi(s)) / (t - s) : sampled_slope(psi, mean);
    if (linear) {
        out.u.assign(cells, mean);
    } else {
        // Cells in index order take t until the remaining mass fits in a single pivot cell.
        out.u.assign(cells, s);
        double remaining = m - s * total;
        for (std::size_t c = 0; c < cells && remaining > 0.0; ++c) {
            const double w = nu.weights()[c];
            if (w <= 0.0)
                continue;
            const double extra = std::min((t - s) * w, remaining);
            out.u[c] = s + extra / w;
            remaining -= extra;
        }
    }
    out.value = weighted_value(out.u, nu, psi);
    return out;
}

GridFunction mollified_disc(const Grid& grid, const Point& center, double radius, double width)
{
    require(width > 0.0 && radius > 0.0, ErrorKind::InvalidInput, "radius and width must be positive");
    return GridFunction::from_function(grid, [&](const Point& x) {
        const double r = grid.dim == 1 ? x[0] : std::hypot(x[0] - center[0], x[1] - center[1]);
        return std::clamp(0.5 - (r - radius) / width, 0.0, 1.0);
    });
}

AdatomState make_adatom_state(GridFunction phi, double mass)
{
    AdatomState s;
    s.volume = phi.integral();
    s.mass = mass;
    s.u.assign(phi.size(), 0.0);
    s.phi = std::move(phi);
    return s;
}

double frozen_phi_energy(const GridFunction& phi, double eps, const DoubleWell& W, const SampledFunction& psi, double m)
{
    return u_optimal_given_phi(mm_energy(phi, eps, W).density, psi, m).value;
}

MinimizeResult minimize_mm_adatom(const AdatomState& init, double eps, const DoubleWell& W, const SampledFunction& psi,
                                  const MinimizeOptions& opt)
{
    require(opt.budget >= 0, ErrorKind::InvalidInput, "budget must be nonnegative");
    const Grid& g = init.phi.grid();
    const double vol = g.cell_volume();
    const double V = init.volume;

    auto project_volume = [&](GridFunction& phi) {
        const double shift = V - phi.integral();
        for (auto& v : phi.values())
            v += shift;
    };
    auto evaluate = [&](const GridFunction& phi) {
        auto nu = mm_energy(phi, eps, W).density;
        return std::pair{nu, u_optimal_given_phi(nu, psi, init.mass)};
    };
    auto residual = [&](const GridFunction& phi, const GridMeasure& nu, const UOptimal& uo) {
        CompensatedSum mass;
        for (std::size_t c = 0; c < uo.u.size(); ++c)
            mass.add(uo.u[c] * nu.weights()[c]);
        return std::abs(phi.integral() - V) + std::abs(mass.value() - init.mass);
    };

    MinimizeResult out;
    GridFunction phi = init.phi;
    project_volume(phi);
    auto [nu, uo] = evaluate(phi);
    double energy = uo.value;
    double step = opt.initial_step;
    double first_norm = -1.0;

    for (int iter = 0;; ++iter) {
        std::vector<double> weight(g.cells());
        for (std::size_t c = 0; c < weight.size(); ++c)
            weight[c] = psi(uo.u[c]) - uo.multiplier * uo.u[c];
        auto grad = mm_weighted_gradient(phi, eps, W, weight);
        CompensatedSum mean;
        for (auto& v : grad) {
            v /= vol;
            mean.add(v);
        }
        const double shift = mean.value() / static_cast<double>(grad.size());
        CompensatedSum norm2;
        for (auto& v : grad) {
            v -= shift;
            norm2.add(v * v * vol);
        }
        const double norm = std::sqrt(norm2.value());
        if (first_norm < 0.0)
            first_norm = norm;
        out.trace.push_back({iter, energy, norm, residual(phi, nu, uo)});

        if (norm <= opt.relative_tolerance * first_norm || norm == 0.0) {
            out.converged = true;
            break;
        }
        if (iter >= opt.budget)
            break;

        bool accepted = false;
        double alpha = step;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            GridFunction trial = phi;
            for (std::size_t c = 0; c < grad.size(); ++c)
                trial[c] -= alpha * grad[c];
            project_volume(trial);
            auto [tnu, tuo] = evaluate(trial);
            if (tuo.value <= energy - opt.armijo * alpha * norm * norm) {
                phi = std::move(trial);
                nu = std::move(tnu);
                uo = std::move(tuo);
                energy = uo.value;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        step = std::min(opt.initial_step, 4.0 * alpha);
    }

    out.state.phi = phi;
    out.state.u = uo.u;
    out.state.volume = V;
    out.state.mass = init.mass;
    out.energy = energy;
    out.multiplier = uo.multiplier;
    return out;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace)
{
    std::string text = "iter,energy,grad_norm,residual\n";
    for (const auto& r : trace)
        text += std::to_string(r.iter) + "," + csv::num(r.energy) + "," + csv::num(r.grad_norm) + "," +
                csv::num(r.residual) + "\n";
    csv::write_text(path, text);
}

}  // namespace gammalab
