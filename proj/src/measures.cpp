#include "gammalab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "csv.hpp"
#include "gammalab/error.hpp"

namespace gammalab {

GridMeasure::GridMeasure(Grid grid) : grid_(grid), weights_(grid.cells(), 0.0) {}

GridMeasure::GridMeasure(Grid grid, std::vector<double> weights, std::vector<Atom> atoms)
    : grid_(grid), weights_(std::move(weights))
{
    require(weights_.size() == grid_.cells(), ErrorKind::InvalidInput, "measure size does not match grid");
    for (double w : weights_)
        require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidInput, "cell weights must be finite and nonnegative");
    for (const auto& a : atoms)
        add_atom(a);
}

GridMeasure GridMeasure::uniform(Grid grid, double total)
{
    return GridMeasure(grid, std::vector<double>(grid.cells(), total / static_cast<double>(grid.cells())));
}

GridMeasure GridMeasure::from_density(Grid grid, const std::function<double(const Point&)>& f)
{
    std::vector<double> w(grid.cells());
    for (std::size_t c = 0; c < w.size(); ++c)
        w[c] = f(grid.center_of(c)) * grid.cell_volume();
    return GridMeasure(grid, std::move(w));
}

void GridMeasure::add_atom(const Atom& a)
{
    require(std::isfinite(a.mass) && a.mass > 0.0, ErrorKind::InvalidInput, "atom mass must be positive");
    bool inside = a.x[0] > 0.0 && a.x[0] < 1.0 && (grid_.dim == 1 || (a.x[1] > 0.0 && a.x[1] < 1.0));
    require(inside, ErrorKind::InvalidInput, "atom location must lie strictly inside the domain");
    Atom b = a;
    if (grid_.dim == 1)
        b.x[1] = 0.5;
    atoms_.push_back(b);
}

void GridMeasure::set_weight(std::size_t c, double w)
{
    require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidInput, "cell weights must be finite and nonnegative");
    weights_.at(c) = w;
}

double GridMeasure::cell_total() const { return compensated_sum(weights_); }

double GridMeasure::atom_total() const
{
    CompensatedSum s;
    for (const auto& a : atoms_)
        s.add(a.mass);
    return s.value();
}

double GridMeasure::total() const
{
    CompensatedSum s;
    for (double w : weights_)
        s.add(w);
    for (const auto& a : atoms_)
        s.add(a.mass);
    return s.value();
}

GridMeasure GridMeasure::scaled(double s) const
{
    require(s >= 0.0, ErrorKind::InvalidInput, "measure scale must be nonnegative");
    GridMeasure out(grid_);
    for (std::size_t c = 0; c < weights_.size(); ++c)
        out.weights_[c] = s * weights_[c];
    if (s > 0.0) {
        for (const auto& a : atoms_)
            out.atoms_.push_back({a.x, s * a.mass});
    }
    return out;
}

GridMeasure GridMeasure::restricted(const std::vector<char>& mask) const
{
    require(mask.size() == weights_.size(), ErrorKind::InvalidInput, "mask size does not match grid");
    GridMeasure out(grid_);
    for (std::size_t c = 0; c < weights_.size(); ++c)
        out.weights_[c] = mask[c] ? weights_[c] : 0.0;
    for (const auto& a : atoms_) {
        if (mask[grid_.locate(a.x)])
            out.atoms_.push_back(a);
    }
    return out;
}

GridMeasure operator+(const GridMeasure& a, const GridMeasure& b)
{
    require(a.grid() == b.grid(), ErrorKind::InvalidInput, "measure grids differ");
    GridMeasure out(a.grid());
    for (std::size_t c = 0; c < a.weights().size(); ++c)
        out.weights()[c] = a.weights()[c] + b.weights()[c];
    for (const auto& x : a.atoms())
        out.add_atom(x);
    for (const auto& x : b.atoms())
        out.add_atom(x);
    return out;
}

GridMeasure read_measure_csv(const std::string& path)
{
    auto lines = csv::read_lines(path);
    require(!lines.empty() && csv::split(lines[0]) == std::vector<std::string_view>{"kind", "i", "j", "value"},
            ErrorKind::InvalidInput, path + ": expected header 'kind,i,j,value'");
    struct Cell {
        long i, j;
        double w;
    };
    std::vector<Cell> cells;
    std::vector<Atom> atoms;
    long max_i = -1, max_j = -1;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        auto cols = csv::split(lines[k]);
        require(cols.size() == 4, ErrorKind::InvalidInput, path + ": line " + std::to_string(k + 1) + " needs 4 columns");
        if (cols[0] == "cell") {
            Cell c{csv::to_long(cols[1], path), csv::to_long(cols[2], path), csv::to_double(cols[3], path)};
            require(c.i >= 0 && c.j >= 0, ErrorKind::InvalidInput, path + ": negative cell index");
            max_i = std::max(max_i, c.i);
            max_j = std::max(max_j, c.j);
            cells.push_back(c);
        } else if (cols[0] == "atom") {
            atoms.push_back({{csv::to_double(cols[1], path), csv::to_double(cols[2], path)}, csv::to_double(cols[3], path)});
        } else {
            fail(ErrorKind::InvalidInput, path + ": unknown row kind '" + std::string(cols[0]) + "'");
        }
    }
    require(!cells.empty(), ErrorKind::InvalidInput, path + ": no cell rows");
    Grid grid(max_j > 0 ? 2 : 1, static_cast<int>(max_i + 1));
    require(cells.size() == grid.cells(), ErrorKind::InvalidInput, path + ": cell rows do not cover the grid");
    std::vector<double> w(grid.cells());
    for (const auto& c : cells)
        w[grid.index(static_cast<int>(c.i), static_cast<int>(c.j))] = c.w;
    return GridMeasure(grid, std::move(w), atoms);
}

void write_measure_csv(const std::string& path, const GridMeasure& mu)
{
    std::ostringstream out;
    out << "kind,i,j,value\n";
    const auto& g = mu.grid();
    for (std::size_t c = 0; c < g.cells(); ++c)
        out << "cell," << g.col(c) << ',' << g.row(c) << ',' << csv::num(mu.weights()[c]) << '\n';
    for (const auto& a : mu.atoms())
        out << "atom," << csv::num(a.x[0]) << ',' << csv::num(g.dim == 1 ? 0.0 : a.x[1]) << ',' << csv::num(a.mass) << '\n';
    csv::write_text(path, out.str());
}

std::array<int, 2> weakstar_mode(int dim, int k)
{
    require(k >= 0 && k < kMomentCount, ErrorKind::InvalidInput, "moment index out of range");
    if (dim == 1)
        return {k + 1, 0};
    int seen = 0;
    for (int s = 2;; ++s) {
        for (int k1 = 1; k1 < s; ++k1) {
            if (seen++ == k)
                return {k1, s - k1};
        }
    }
}

std::array<double, kMomentCount> weakstar_moments(const GridMeasure& mu)
{
    const auto& g = mu.grid();
    const int n = g.n;
    const double pi = std::numbers::pi;
    int kmax = 0;
    std::array<std::array<int, 2>, kMomentCount> modes{};
    for (int k = 0; k < kMomentCount; ++k) {
        modes[k] = weakstar_mode(g.dim, k);
        kmax = std::max({kmax, modes[k][0], modes[k][1]});
    }
    // avg[k][i]: mean of sin(pi k x) over cell i.
    std::vector<std::vector<double>> avg(kmax + 1, std::vector<double>(n));
    for (int k = 1; k <= kmax; ++k) {
        for (int i = 0; i < n; ++i) {
            double a = static_cast<double>(i) / n, b = static_cast<double>(i + 1) / n;
            avg[k][i] = (std::cos(pi * k * a) - std::cos(pi * k * b)) / (pi * k) * n;
        }
    }
    std::array<double, kMomentCount> out{};
    const auto& w = mu.weights();
    for (int k = 0; k < kMomentCount; ++k) {
        const auto [k1, k2] = modes[k];
        CompensatedSum s;
        for (std::size_t c = 0; c < w.size(); ++c) {
            if (w[c] == 0.0)
                continue;
            double v = avg[k1][g.col(c)];
            if (g.dim == 2)
                v *= avg[k2][g.row(c)];
            s.add(w[c] * v);
        }
        for (const auto& a : mu.atoms()) {
            double v = std::sin(pi * k1 * a.x[0]);
            if (g.dim == 2)
                v *= std::sin(pi * k2 * a.x[1]);
            s.add(a.mass * v);
        }
        out[k] = s.value();
    }
    return out;
}

double weakstar_distance(const GridMeasure& mu, const GridMeasure& nu)
{
    require(mu.grid().dim == nu.grid().dim, ErrorKind::InvalidInput, "measures live on different domains");
    auto a = weakstar_moments(mu);
    auto b = weakstar_moments(nu);
    CompensatedSum s;
    double weight = 0.5;
    for (int k = 0; k < kMomentCount; ++k) {
        double d = std::abs(a[k] - b[k]);
        s.add(weight * d / (1.0 + d));
        weight *= 0.5;
    }
    return s.value();
}

Decomposition radon_nikodym_decompose(const GridMeasure& mu, const GridMeasure& nu)
{
    require(mu.grid() == nu.grid(), ErrorKind::InvalidInput, "measures have different resolution");
    require(!nu.has_atoms(), ErrorKind::InvalidInput, "reference measure must be non-atomic");
    const auto& g = mu.grid();
    Decomposition d{std::vector<double>(g.cells(), 0.0), GridMeasure(g)};
    for (std::size_t c = 0; c < g.cells(); ++c) {
        double m = mu.weights()[c], v = nu.weights()[c];
        if (v > 0.0)
            d.density[c] = m / v;
        else if (m > 0.0)
            d.singular.set_weight(c, m);
    }
    for (const auto& a : mu.atoms())
        d.singular.add_atom(a);
    return d;
}

GridMeasure reconstruct(const Decomposition& d, const GridMeasure& nu)
{
    const auto& g = nu.grid();
    GridMeasure out(g);
    for (std::size_t c = 0; c < g.cells(); ++c)
        out.set_weight(c, d.density[c] * nu.weights()[c] + d.singular.weights()[c]);
    for (const auto& a : d.singular.atoms())
        out.add_atom(a);
    return out;
}

GridMeasure dirac_approximation(const GridMeasure& mu_perp, int n)
{
    require(n >= 1, ErrorKind::InvalidInput, "cube count must be positive");
    const auto& g = mu_perp.grid();
    const std::size_t cubes = g.dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    auto cube_of = [&](const Point& x) {
        auto axis = [&](double v) { return std::clamp(static_cast<int>(std::floor(v * n)), 0, n - 1); };
        return g.dim == 1 ? static_cast<std::size_t>(axis(x[0])) : static_cast<std::size_t>(axis(x[1])) * n + axis(x[0]);
    };
    std::vector<CompensatedSum> mass(cubes), cell_mass(cubes), mx(cubes), my(cubes);
    std::vector<int> largest(cubes, -1);
    const auto& w = mu_perp.weights();
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (w[c] == 0.0)
            continue;
        auto p = g.center_of(c);
        auto q = cube_of(p);
        mass[q].add(w[c]);
        cell_mass[q].add(w[c]);
        mx[q].add(w[c] * p[0]);
        my[q].add(w[c] * p[1]);
    }
    const auto& atoms = mu_perp.atoms();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        auto q = cube_of(atoms[a].x);
        mass[q].add(atoms[a].mass);
        if (largest[q] < 0 || atoms[a].mass > atoms[largest[q]].mass)
            largest[q] = static_cast<int>(a);
    }
    GridMeasure out(g);
    for (std::size_t q = 0; q < cubes; ++q) {
        double m = mass[q].value();
        if (m <= 0.0)
            continue;
        Point x;
        if (largest[q] >= 0) {
            x = atoms[largest[q]].x;
        } else {
            double cm = cell_mass[q].value();
            x = {mx[q].value() / cm, g.dim == 1 ? 0.5 : my[q].value() / cm};
        }
        out.add_atom({x, m});
    }
    return out;
}

CrumbleResult crumble_partition(const GridMeasure& mu, double lambda, int j)
{
    require(!mu.has_atoms(), ErrorKind::InvalidInput, "crumble partition needs a non-atomic measure");
    require(lambda > 0.0 && lambda < 1.0, ErrorKind::Domain, "lambda must lie in (0,1)");
    require(j >= 1, ErrorKind::InvalidInput, "refinement level must be positive");
    const auto& g = mu.grid();
    const int sub = j * j;
    require(g.n >= sub, ErrorKind::Guard,
            "grid resolution " + std::to_string(g.n) + " cannot resolve " + std::to_string(sub) + " sub-cells per side");
    const int dim = g.dim;
    const std::size_t sub_count = dim == 1 ? static_cast<std::size_t>(sub) : static_cast<std::size_t>(sub) * sub;
    auto sub_axis = [&](double v) { return std::clamp(static_cast<int>(std::floor(v * sub)), 0, sub - 1); };

    std::vector<CompensatedSum> sub_mass(sub_count);
    std::vector<std::size_t> cell_sub(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) {
        auto p = g.center_of(c);
        std::size_t s = dim == 1 ? static_cast<std::size_t>(sub_axis(p[0]))
                                 : static_cast<std::size_t>(sub_axis(p[1])) * sub + sub_axis(p[0]);
        cell_sub[c] = s;
        sub_mass[s].add(mu.weights()[c]);
    }

    const std::size_t parents = dim == 1 ? static_cast<std::size_t>(j) : static_cast<std::size_t>(j) * j;
    std::vector<char> selected(sub_count, 0);
    CrumbleResult out;
    out.j = j;
    out.proportion_error.assign(parents, 0.0);
    for (std::size_t p = 0; p < parents; ++p) {
        const int px = static_cast<int>(p % j), py = dim == 1 ? 0 : static_cast<int>(p / j);
        std::vector<std::size_t> order;
        for (int sy = 0; sy < (dim == 1 ? 1 : j); ++sy) {
            for (int sx = 0; sx < j; ++sx) {
                int gx = px * j + sx, gy = py * j + sy;
                order.push_back(dim == 1 ? static_cast<std::size_t>(gx) : static_cast<std::size_t>(gy) * sub + gx);
            }
        }
        CompensatedSum total;
        for (auto s : order)
            total.add(sub_mass[s].value());
        const double target = lambda * total.value();
        CompensatedSum taken;
        for (auto s : order) {
            if (taken.value() >= target)
                break;
            selected[s] = 1;
            taken.add(sub_mass[s].value());
        }
        if (total.value() > 0.0)
            out.proportion_error[p] = std::abs(taken.value() - target) / total.value();
        out.max_proportion_error = std::max(out.max_proportion_error, out.proportion_error[p]);
    }
    out.mask.assign(g.cells(), 0);
    for (std::size_t c = 0; c < g.cells(); ++c)
        out.mask[c] = selected[cell_sub[c]];
    return out;
}

}  // namespace gammalab
