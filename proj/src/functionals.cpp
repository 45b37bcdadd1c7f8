#include "gammalab/functionals.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gammalab/error.hpp"

namespace gammalab {

namespace {

double integrate(const std::function<double(double)>& f, double a, double b)
{
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13, &err);
    require(err <= 1e-8 * std::max(1.0, std::abs(v)), ErrorKind::Contract, "quadrature did not reach tolerance");
    return v;
}

std::string fmt(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what)
{
    require(a.grid() == b.grid(), ErrorKind::InvalidInput, std::string(what) + " must share the grid of phi");
}

void require_positive_weight(const GridFunction& rho)
{
    for (double r : rho.values())
        require(std::isfinite(r) && r > 0.0, ErrorKind::InvalidInput, "weight rho must be strictly positive");
}

Energy finish(const Grid& grid, std::vector<double> cells)
{
    Energy e{0.0, GridMeasure(grid, std::move(cells))};
    e.total = e.density.total();
    return e;
}

}  // namespace

DoubleWell quartic_well()
{
    return {"quartic",
            [](double t) { return t * t * (1 - t) * (1 - t); },
            [](double t) { return 2 * t * (1 - t) * (1 - 2 * t); }};
}

DoubleWell sine_well()
{
    const double pi = std::numbers::pi;
    return {"sine",
            [pi](double t) { return std::pow(std::sin(pi * t) / pi, 2); },
            [pi](double t) { return std::sin(2 * pi * t) / pi; }};
}

DoubleWell scaled_well(const DoubleWell& w, double factor)
{
    require(factor > 0.0, ErrorKind::InvalidInput, "well scale must be positive");
    auto W = w.W;
    auto dW = w.dW;
    return {w.name + "*" + fmt(factor), [W, factor](double t) { return factor * W(t); },
            [dW, factor](double t) { return factor * dW(t); }};
}

DoubleWell double_well_by_name(const std::string& name)
{
    if (name == "quartic")
        return quartic_well();
    if (name == "sine")
        return sine_well();
    fail(ErrorKind::InvalidInput, "unknown double well '" + name + "' (expected quartic or sine)");
}

WellCheck validate_double_well(const DoubleWell& w)
{
    if (std::abs(w.W(0.0)) > 1e-14 || std::abs(w.W(1.0)) > 1e-14)
        return {false, "W must vanish at 0 and 1"};
    double growth = kInfinity;
    for (int k = -1000; k <= 1000; ++k) {
        double t = k / 100.0;
        double v = w.W(t);
        if (!(v >= 0.0))
            return {false, "W is negative at t = " + fmt(t)};
        if (std::abs(t) >= 2.0)
            growth = std::min(growth, v / std::abs(t));
    }
    if (!(growth > 1e-6))
        return {false, "W lacks linear growth on |t| in [2, 10]"};
    return {true, ""};
}

Kernel indicator_kernel()
{
    return {"indicator", [](double t) { return t >= 0.0 && t <= 1.0 ? 1.0 : 0.0; }, 1.0};
}

Kernel tent_kernel()
{
    return {"tent", [](double t) { return t >= 0.0 && t <= 1.0 ? 2.0 * (1.0 - t) : 0.0; }, 1.0};
}

Kernel rescaled_kernel(const Kernel& k, double s)
{
    require(s > 0.0, ErrorKind::InvalidInput, "kernel scale must be positive");
    auto eta = k.eta;
    return {k.name + "/" + fmt(s), [eta, s](double t) { return eta(t / s) / s; }, k.support * s};
}

Kernel kernel_by_name(const std::string& name)
{
    if (name == "indicator")
        return indicator_kernel();
    if (name == "tent")
        return tent_kernel();
    fail(ErrorKind::InvalidInput, "unknown kernel '" + name + "' (expected indicator or tent)");
}

double kernel_mass(const Kernel& k) { return integrate(k.eta, 0.0, k.support); }

Energy mm_energy(const GridFunction& phi, double eps, const DoubleWell& W)
{
    const auto& g = phi.grid();
    require(eps > 0.0, ErrorKind::Domain, "eps must be positive");
    require(g.h() <= eps / 4.0 * (1.0 + 1e-12), ErrorKind::Guard,
            "resolution guard violated: h = " + fmt(g.h()) + " exceeds eps/4 = " + fmt(eps / 4.0));
    std::vector<double> cells(g.cells());
    const double vol = g.cell_volume();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto d = phi.gradient(c);
        cells[c] = (W.W(phi[c]) / eps + eps * (d[0] * d[0] + d[1] * d[1])) * vol;
    }
    return finish(g, std::move(cells));
}

double sigma_W(const DoubleWell& W)
{
    auto f = W.W;
    return 2.0 * integrate([f](double t) { return std::sqrt(std::max(0.0, f(t))); }, 0.0, 1.0);
}

std::function<double(double)> optimal_profile(const DoubleWell& W, double eps)
{
    require(eps > 0.0, ErrorKind::Domain, "eps must be positive");
    static constexpr double reach = 40.0;
    static constexpr int steps = 40000;
    static constexpr double dz = reach / steps;
    auto rhs = [&W](double p) { return std::sqrt(std::max(0.0, W.W(std::clamp(p, 0.0, 1.0)))); };
    std::vector<double> table(2 * steps + 1);
    table[steps] = 0.5;
    for (int dir : {1, -1}) {
        double p = 0.5;
        const double hs = dir * dz;
        for (int k = 1; k <= steps; ++k) {
            const double k1 = rhs(p), k2 = rhs(p + 0.5 * hs * k1), k3 = rhs(p + 0.5 * hs * k2), k4 = rhs(p + hs * k3);
            p = std::clamp(p + hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, 0.0, 1.0);
            table[steps + dir * k] = p;
        }
    }
    return [table = std::move(table), eps](double s) {
        const double z = std::clamp(s / eps, -reach, reach) / dz + steps;
        const auto k = std::min(static_cast<std::size_t>(z), table.size() - 2);
        const double f = z - static_cast<double>(k);
        return table[k] + f * (table[k + 1] - table[k]);
    };
}

Energy nonlocal_tv_energy(const GridFunction& phi, double eps, const Kernel& eta, const GridFunction& rho)
{
    const auto& g = phi.grid();
    require_same_grid(phi, rho, "rho");
    require_positive_weight(rho);
    require(eps > 0.0, ErrorKind::Domain, "eps must be positive");
    const double reach = eps * eta.support;
    require(reach >= 2.0 * g.h() * (1.0 - 1e-12), ErrorKind::Guard,
            "kernel reach eps*M = " + fmt(reach) + " spans fewer than 2 cells (h = " + fmt(g.h()) + ")");
    require(reach <= 0.25 * (1.0 + 1e-12), ErrorKind::Guard, "kernel reach eps*M = " + fmt(reach) + " exceeds 1/4");

    const double h = g.h();
    const int dim = g.dim;
    const int R = static_cast<int>(std::ceil(reach / h + 0.5));
    const int S = dim == 1 ? 64 : 8;
    const double scale = std::pow(eps, -dim);
    struct Offset {
        int di, dj;
        double w;
    };
    std::vector<Offset> stencil;
    for (int dj = dim == 1 ? 0 : -R; dj <= (dim == 1 ? 0 : R); ++dj) {
        for (int di = -R; di <= R; ++di) {
            if (di == 0 && dj == 0)
                continue;
            double acc = 0.0;
            for (int sy = 0; sy < (dim == 1 ? 1 : S); ++sy) {
                for (int sx = 0; sx < S; ++sx) {
                    double zx = (di - 0.5 + (sx + 0.5) / S) * h;
                    double zy = dim == 1 ? 0.0 : (dj - 0.5 + (sy + 0.5) / S) * h;
                    acc += eta.eta(std::hypot(zx, zy) / eps) * scale;
                }
            }
            double w = acc / (dim == 1 ? S : S * S) * g.cell_volume();
            if (w > 0.0)
                stencil.push_back({di, dj, w});
        }
    }

    const int n = g.n;
    const double vol = g.cell_volume();
    std::vector<double> cells(g.cells());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const int i = g.col(c), j = g.row(c);
        CompensatedSum s;
        for (const auto& o : stencil) {
            int ii = std::clamp(i + o.di, 0, n - 1);
            int jj = dim == 1 ? 0 : std::clamp(j + o.dj, 0, n - 1);
            std::size_t y = dim == 1 ? static_cast<std::size_t>(ii) : g.index(ii, jj);
            s.add(std::abs(phi[c] - phi[y]) / eps * o.w * rho[y]);
        }
        cells[c] = s.value() * rho[c] * vol;
    }
    return finish(g, std::move(cells));
}

double sigma_eta(const Kernel& eta, int dim)
{
    require(dim == 1 || dim == 2, ErrorKind::InvalidInput, "dimension must be 1 or 2");
    // Integral over R^d of eta(|z|) |z . e1| dz in polar form.
    const double cd = 2.0 * std::pow(std::numbers::pi, 0.5 * (dim - 1)) / std::tgamma(0.5 * (dim + 1));
    auto f = eta.eta;
    return cd * integrate([f, dim](double r) { return std::pow(r, dim) * f(r); }, 0.0, eta.support);
}

Energy weighted_tv_energy(const GridFunction& phi, const GridFunction& rho)
{
    const auto& g = phi.grid();
    require_same_grid(phi, rho, "rho");
    require_positive_weight(rho);
    std::vector<double> cells(g.cells());
    const double vol = g.cell_volume();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto d = phi.gradient(c);
        cells[c] = rho[c] * rho[c] * std::hypot(d[0], d[1]) * vol;
    }
    return finish(g, std::move(cells));
}

Energy p_dirichlet_energy(const GridFunction& phi, double p)
{
    require(p > 1.0, ErrorKind::Domain, "p-Dirichlet energy needs p > 1");
    const auto& g = phi.grid();
    std::vector<double> cells(g.cells());
    const double vol = g.cell_volume();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto d = phi.gradient(c);
        cells[c] = std::pow(std::hypot(d[0], d[1]), p) * vol;
    }
    return finish(g, std::move(cells));
}

RelativeEnergy relative_energy(const GridMeasure& energy, const GridMeasure& mu, const SampledFunction& psi)
{
    auto d = radon_nikodym_decompose(mu, energy);
    RelativeEnergy out;
    if (d.singular.total() > 1e-12 * mu.total()) {
        out.value = kInfinity;
        return out;
    }
    CompensatedSum s;
    const auto& F = energy.weights();
    for (std::size_t c = 0; c < F.size(); ++c) {
        if (F[c] == 0.0)
            continue;
        if (!psi.in_range(d.density[c]))
            out.extrapolated = true;
        s.add(psi(d.density[c]) * F[c]);
    }
    out.value = s.value();
    return out;
}

double sharp_energy(const GridMeasure& energy, const GridMeasure& mu, const EnvelopeTable& env)
{
    auto d = radon_nikodym_decompose(mu, energy);
    CompensatedSum s;
    const auto& F = energy.weights();
    for (std::size_t c = 0; c < F.size(); ++c) {
        if (F[c] > 0.0)
            s.add(env.eval_convex_subadditive(d.density[c]) * F[c]);
    }
    s.add(env.theta_cs * d.singular.total());
    return s.value();
}

std::vector<double> mm_weighted_gradient(const GridFunction& phi, double eps, const DoubleWell& W,
                                         const std::vector<double>& weight)
{
    const auto& g = phi.grid();
    require(weight.size() == g.cells(), ErrorKind::InvalidInput, "weight size does not match grid");
    const int n = g.n;
    const double vol = g.cell_volume();
    const double inv = static_cast<double>(n);
    std::vector<double> grad(g.cells(), 0.0);
    for (std::size_t c = 0; c < grad.size(); ++c) {
        const double w = weight[c] * vol;
        if (w == 0.0)
            continue;
        grad[c] += w * W.dW(phi[c]) / eps;
        auto d = phi.gradient(c);
        const double k = 2.0 * eps * w * inv;
        const int i = g.col(c);
        if (i + 1 < n) {
            grad[c + 1] += k * d[0];
            grad[c] -= k * d[0];
        } else {
            grad[c] += k * d[0];
            grad[c - 1] -= k * d[0];
        }
        if (g.dim == 2) {
            const int j = g.row(c);
            const std::size_t s = static_cast<std::size_t>(n);
            if (j + 1 < n) {
                grad[c + s] += k * d[1];
                grad[c] -= k * d[1];
            } else {
                grad[c] += k * d[1];
                grad[c - s] -= k * d[1];
            }
        }
    }
    return grad;
}

double sampled_slope(const SampledFunction& psi, double t)
{
    if (t < 0.0 || t >= psi.tmax())
        return 0.0;
    auto k = std::min(static_cast<std::size_t>(t / psi.step()), psi.size() - 2);
    return (psi[k + 1] - psi[k]) / psi.step();
}

std::vector<double> mm_relative_energy_gradient(const GridFunction& phi, double eps, const DoubleWell& W,
                                                const GridMeasure& mu, const SampledFunction& psi)
{
    auto F = mm_energy(phi, eps, W).density;
    require(mu.grid() == F.grid(), ErrorKind::InvalidInput, "mu must share the grid of phi");
    require(!mu.has_atoms(), ErrorKind::InvalidInput, "gradient needs mu without atoms");
    std::vector<double> weight(F.grid().cells());
    for (std::size_t c = 0; c < weight.size(); ++c) {
        double f = F.weights()[c];
        double u = f > 0.0 ? mu.weights()[c] / f : 0.0;
        weight[c] = psi(u) - u * sampled_slope(psi, u);
    }
    return mm_weighted_gradient(phi, eps, W, weight);
}

}  // namespace gammalab
