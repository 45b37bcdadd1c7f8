#include "gammalab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csv.hpp"
#include "gammalab/error.hpp"

namespace gammalab {

Grid::Grid(int dim_, int n_) : dim(dim_), n(n_)
{
    require(dim == 1 || dim == 2, ErrorKind::InvalidInput, "dimension must be 1 or 2");
    require(n >= 2, ErrorKind::InvalidInput, "grid resolution must be at least 2");
}

std::size_t Grid::locate(const Point& x) const
{
    auto axis = [&](double v) { return std::clamp(static_cast<int>(std::floor(v * n)), 0, n - 1); };
    return dim == 1 ? static_cast<std::size_t>(axis(x[0])) : index(axis(x[0]), axis(x[1]));
}

GridFunction::GridFunction(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    require(values_.size() == grid_.cells(), ErrorKind::InvalidInput, "grid function size does not match grid");
    for (double v : values_)
        require(std::isfinite(v), ErrorKind::InvalidInput, "grid function values must be finite");
}

GridFunction::GridFunction(Grid grid, double value) : grid_(grid), values_(grid.cells(), value) {}

GridFunction GridFunction::from_function(Grid grid, const std::function<double(const Point&)>& f)
{
    std::vector<double> v(grid.cells());
    for (std::size_t c = 0; c < v.size(); ++c)
        v[c] = f(grid.center_of(c));
    return GridFunction(grid, std::move(v));
}

Point GridFunction::gradient(std::size_t c) const
{
    const int n = grid_.n;
    const double inv = static_cast<double>(n);
    const int i = grid_.col(c);
    Point g{0.0, 0.0};
    g[0] = i + 1 < n ? (values_[c + 1] - values_[c]) * inv : (values_[c] - values_[c - 1]) * inv;
    if (grid_.dim == 2) {
        const int j = grid_.row(c);
        const std::size_t s = static_cast<std::size_t>(n);
        g[1] = j + 1 < n ? (values_[c + s] - values_[c]) * inv : (values_[c] - values_[c - s]) * inv;
    }
    return g;
}

double GridFunction::sample(const Point& x) const
{
    const int n = grid_.n;
    auto axis = [&](double v, int& k, double& w) {
        double s = std::clamp(v * n - 0.5, 0.0, static_cast<double>(n - 1));
        k = std::min(static_cast<int>(s), n - 2);
        w = s - k;
    };
    int i = 0;
    double wx = 0.0;
    axis(x[0], i, wx);
    if (grid_.dim == 1)
        return values_[i] + wx * (values_[i + 1] - values_[i]);
    int j = 0;
    double wy = 0.0;
    axis(x[1], j, wy);
    const double a = at(i, j), b = at(i + 1, j), c = at(i, j + 1), d = at(i + 1, j + 1);
    return (1 - wy) * (a + wx * (b - a)) + wy * (c + wx * (d - c));
}

double GridFunction::integral() const { return compensated_sum(values_) * grid_.cell_volume(); }

GridFunction read_grid_function_csv(const std::string& path)
{
    auto lines = csv::read_lines(path);
    require(!lines.empty() && csv::split(lines[0]) == std::vector<std::string_view>{"i", "j", "value"},
            ErrorKind::InvalidInput, path + ": expected header 'i,j,value'");
    struct Row {
        long i, j;
        double v;
    };
    std::vector<Row> rows;
    long max_i = -1, max_j = -1;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        auto cols = csv::split(lines[k]);
        require(cols.size() == 3, ErrorKind::InvalidInput, path + ": line " + std::to_string(k + 1) + " needs 3 columns");
        Row r{csv::to_long(cols[0], path), csv::to_long(cols[1], path), csv::to_double(cols[2], path)};
        require(r.i >= 0 && r.j >= 0, ErrorKind::InvalidInput, path + ": negative index");
        max_i = std::max(max_i, r.i);
        max_j = std::max(max_j, r.j);
        rows.push_back(r);
    }
    Grid grid(max_j > 0 ? 2 : 1, static_cast<int>(max_i + 1));
    require(rows.size() == grid.cells() && (grid.dim == 1 || max_j == max_i), ErrorKind::InvalidInput,
            path + ": node dump does not cover a square grid");
    std::vector<double> v(grid.cells());
    for (const auto& r : rows)
        v[grid.index(static_cast<int>(r.i), static_cast<int>(r.j))] = r.v;
    return GridFunction(grid, std::move(v));
}

void write_grid_function_csv(const std::string& path, const GridFunction& f)
{
    std::ostringstream out;
    out << "i,j,value\n";
    const auto& g = f.grid();
    for (std::size_t c = 0; c < f.size(); ++c)
        out << g.col(c) << ',' << g.row(c) << ',' << csv::num(f[c]) << '\n';
    csv::write_text(path, out.str());
}

void CompensatedSum::add(double x)
{
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        carry_ += (sum_ - t) + x;
    else
        carry_ += (x - t) + sum_;
    sum_ = t;
}

double compensated_sum(const std::vector<double>& v)
{
    CompensatedSum s;
    for (double x : v)
        s.add(x);
    return s.value();
}

}  // namespace gammalab
