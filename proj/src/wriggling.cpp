#include <algorithm>
#include <cmath>
#include <numbers>

#include "gammalab/error.hpp"
#include "gammalab/recovery.hpp"

namespace gammalab {

namespace {

struct Sawtooth {
    double g = 0.0;       // displacement in local units
    double dg = 0.0;      // d/dy_lateral of the displacement
    double dnormal = 0.0; // d/dy_normal of the displacement
};

Sawtooth sawtooth(double b, int n, double margin, double yl, double yn)
{
    const double N = 2.0 * n + 1.0;
    const double t = N * yl;
    double ph = std::fmod(t + 1.0, 2.0);
    if (ph < 0.0)
        ph += 2.0;
    ph -= 1.0;
    const double s = b * (1.0 - std::abs(ph));
    const double ds = ph >= 0.0 ? -b : b;
    const double dist = 1.0 - std::abs(yn);
    const double cut = std::clamp(dist / margin, 0.0, 1.0);
    const double dcut = dist < margin && dist > 0.0 ? (yn > 0.0 ? -1.0 : 1.0) / margin : 0.0;
    return {cut * s / N, cut * ds, dcut * s / N};
}

double omega(int k) { return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0); }

}  // namespace

double WrigglingMap::effective_margin() const
{
    double m = margin > 0.0 ? margin : std::max(1.0, b / 1.8) / n;
    return std::min(m, 1.0);
}

MapValue wriggling_map_eval(const WrigglingMap& map, const Point& x)
{
    require(map.dim == 2, ErrorKind::Domain, "wriggling maps are implemented for d = 2 only");
    require(map.n >= 1 && map.L > 0.0 && map.b >= 0.0, ErrorKind::InvalidInput, "invalid wriggling map parameters");
    const double half = 0.5 * map.L;
    const double tol = 1e-12 * map.L;
    require(std::abs(x[0] - map.center[0]) <= half + tol && std::abs(x[1] - map.center[1]) <= half + tol,
            ErrorKind::Domain, "point lies outside the wriggling cube");
    const double y1 = std::clamp((x[0] - map.center[0]) / half, -1.0, 1.0);
    const double y2 = std::clamp((x[1] - map.center[1]) / half, -1.0, 1.0);
    auto s = sawtooth(map.b, map.n, map.effective_margin(), y1, y2);
    MapValue out;
    out.x = {x[0], x[1] + half * s.g};
    out.jacobian = {{{1.0, 0.0}, {s.dg, 1.0 + s.dnormal}}};
    return out;
}

double wriggled_energy_factor(const Point& slope, const WrigglingMap& map, int quadrature)
{
    require(map.dim == 2, ErrorKind::Domain, "wriggling maps are implemented for d = 2 only");
    require(slope[0] != 0.0 || slope[1] != 0.0, ErrorKind::InvalidInput, "affine slope must be nonzero");
    require(slope[0] == 0.0 || slope[1] == 0.0, ErrorKind::InvalidInput,
            "affine slope must be parallel to a coordinate axis; rotate the cube first");
    require(quadrature >= 2, ErrorKind::InvalidInput, "quadrature grid too coarse");
    if (map.b == 0.0)
        return 1.0;
    const double m = map.effective_margin();
    const int Q = quadrature;
    CompensatedSum total;
    for (int j = 0; j < Q; ++j) {
        const double y2 = -1.0 + (2.0 * j + 1.0) / Q;
        CompensatedSum row;
        for (int i = 0; i < Q; ++i) {
            const double y1 = -1.0 + (2.0 * i + 1.0) / Q;
            auto s = sawtooth(map.b, map.n, m, y1, y2);
            const double sq = s.dg * s.dg + (1.0 + s.dnormal) * (1.0 + s.dnormal);
            row.add(map.p == 2.0 ? sq : std::pow(sq, 0.5 * map.p));
        }
        total.add(row.value());
    }
    return total.value() / (static_cast<double>(Q) * Q);
}

double wriggling_factor_limit(double b, double p, int dim)
{
    return 1.0 + (std::pow(1.0 + b * b, 0.5 * p) - 1.0) * omega(dim - 1) / std::pow(2.0, dim - 1);
}

double solve_b_for_factor(double r, double p, int dim)
{
    require(std::isfinite(r) && r >= 1.0, ErrorKind::Domain, "multiplier r must be at least 1");
    require(p >= 1.0, ErrorKind::Domain, "exponent p must be at least 1");
    require(dim >= 1, ErrorKind::InvalidInput, "dimension must be positive");
    if (r == 1.0)
        return 0.0;
    const double c = omega(dim - 1) / std::pow(2.0, dim - 1);
    return std::sqrt(std::max(0.0, std::pow(1.0 + (r - 1.0) / c, 2.0 / p) - 1.0));
}

double MultiplierField::at(const Point& x) const
{
    for (const auto& r : regions) {
        if (x[0] >= r.x0 && x[0] < r.x1 && x[1] >= r.y0 && x[1] < r.y1)
            return r.r;
    }
    return 1.0;
}

GridFunction resample(const GridFunction& phi, const Grid& target)
{
    if (target == phi.grid())
        return phi;
    return GridFunction::from_function(target, [&](const Point& x) { return phi.sample(x); });
}

WriggleResult wriggle_field(const GridFunction& phi, const MultiplierField& f, int k, const WriggleOptions& opt)
{
    const auto& g = phi.grid();
    require(g.dim == 2, ErrorKind::Domain, "wriggle_field is implemented for d = 2 only");
    require(k >= 1, ErrorKind::InvalidInput, "cube count k must be positive");
    require(opt.oscillations >= 1 && opt.cells_per_half_period >= 1, ErrorKind::InvalidInput,
            "invalid wriggle options");
    bool active = false;
    auto aligned = [k](double v) { return std::abs(v * k - std::round(v * k)) <= 1e-9; };
    for (std::size_t a = 0; a < f.regions.size(); ++a) {
        const auto& r = f.regions[a];
        require(r.r >= 1.0, ErrorKind::InvalidInput, "multiplier values must be at least 1");
        require(r.x0 >= 0.0 && r.x1 <= 1.0 && r.y0 >= 0.0 && r.y1 <= 1.0 && r.x0 < r.x1 && r.y0 < r.y1,
                ErrorKind::InvalidInput, "multiplier region must be a nonempty box inside the domain");
        require(aligned(r.x0) && aligned(r.x1) && aligned(r.y0) && aligned(r.y1), ErrorKind::InvalidInput,
                "multiplier region edges must lie on the 1/k cube grid");
        require(std::min(r.x1 - r.x0, r.y1 - r.y0) >= 4.0 * g.h() * (1.0 - 1e-12), ErrorKind::InvalidInput,
                "multiplier region is resolved by fewer than 4 cells");
        for (std::size_t b = 0; b < a; ++b) {
            const auto& o = f.regions[b];
            bool overlap = r.x0 < o.x1 && o.x0 < r.x1 && r.y0 < o.y1 && o.y0 < r.y1;
            require(!overlap, ErrorKind::InvalidInput, "multiplier regions overlap");
        }
        active = active || r.r > 1.0;
    }
    WriggleResult out{phi, 0, 0};
    if (!active)
        return out;

    const int n = opt.oscillations;
    const int q = opt.cells_per_half_period;
    const int M = 2 * q * (2 * n + 1) + 1;
    const Grid fine(2, k * M);
    const double hf = fine.h();
    const double L = 1.0 / k;

    struct CubeMap {
        bool on = false;
        Point c, en, el;
        double half = 0.0, b = 0.0, margin = 1.0;
    };
    std::vector<CubeMap> maps(static_cast<std::size_t>(k) * k);
    std::vector<Point> grad_sum(maps.size(), Point{0.0, 0.0});
    std::vector<int> grad_count(maps.size(), 0);
    for (std::size_t cell = 0; cell < g.cells(); ++cell) {
        auto p = g.center_of(cell);
        const int cx = std::min(k - 1, static_cast<int>(p[0] * k));
        const int cy = std::min(k - 1, static_cast<int>(p[1] * k));
        const std::size_t id = static_cast<std::size_t>(cy) * k + cx;
        auto d = phi.gradient(cell);
        grad_sum[id][0] += d[0];
        grad_sum[id][1] += d[1];
        ++grad_count[id];
    }
    for (int cy = 0; cy < k; ++cy) {
        for (int cx = 0; cx < k; ++cx) {
            Point c{(cx + 0.5) * L, (cy + 0.5) * L};
            const double r = f.at(c);
            if (r <= 1.0)
                continue;
            const std::size_t id = static_cast<std::size_t>(cy) * k + cx;
            Point grad = grad_sum[id];
            const int count = grad_count[id];
            if (count == 0) {
                const double e = 0.25 * L;
                grad = {(phi.sample({c[0] + e, c[1]}) - phi.sample({c[0] - e, c[1]})) / (2 * e),
                        (phi.sample({c[0], c[1] + e}) - phi.sample({c[0], c[1] - e})) / (2 * e)};
            }
            const double norm = std::hypot(grad[0], grad[1]);
            if (!(norm > 1e-12))
                continue;
            CubeMap cm;
            cm.on = true;
            cm.c = c;
            cm.en = {grad[0] / norm, grad[1] / norm};
            cm.el = {cm.en[1], -cm.en[0]};
            const double side = L / (std::abs(cm.en[0]) + std::abs(cm.en[1])) - hf;
            cm.half = 0.5 * side;
            const double beta = 1.0 + (r - 1.0) * (L * L) / (side * side);
            cm.b = solve_b_for_factor(beta, 1.0, 2);
            const double ramp = std::max(1.0, std::round(std::max(1.0, cm.b / 1.8) / n * cm.half / hf));
            cm.margin = std::min(1.0, ramp * hf / cm.half);
            maps[static_cast<std::size_t>(cy) * k + cx] = cm;
            ++out.wriggled_cubes;
        }
    }

    std::vector<double> v(fine.cells());
    for (std::size_t cell = 0; cell < v.size(); ++cell) {
        Point x = fine.center_of(cell);
        const int cx = std::min(k - 1, static_cast<int>(x[0] * k));
        const int cy = std::min(k - 1, static_cast<int>(x[1] * k));
        const auto& cm = maps[static_cast<std::size_t>(cy) * k + cx];
        if (cm.on) {
            const double dx = x[0] - cm.c[0], dy = x[1] - cm.c[1];
            const double yl = (dx * cm.el[0] + dy * cm.el[1]) / cm.half;
            const double yn = (dx * cm.en[0] + dy * cm.en[1]) / cm.half;
            if (std::abs(yl) <= 1.0 && std::abs(yn) <= 1.0) {
                const double disp = cm.half * sawtooth(cm.b, n, cm.margin, yl, yn).g;
                x = {x[0] + disp * cm.en[0], x[1] + disp * cm.en[1]};
            }
        }
        v[cell] = phi.sample(x);
    }
    out.phi = GridFunction(fine, std::move(v));
    out.cells_per_cube = M;
    return out;
}

}  // namespace gammalab
