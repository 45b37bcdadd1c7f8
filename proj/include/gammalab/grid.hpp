#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace gammalab {

using Point = std::array<double, 2>;

// Uniform cell grid on (0,1)^d, d in {1,2}. Cell (i,j) has index j*n + i.
struct Grid {
    int dim = 2;
    int n = 0;

    Grid() = default;
    Grid(int dim, int n);

    std::size_t cells() const { return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }
    double h() const { return 1.0 / n; }
    double cell_volume() const { return dim == 1 ? h() : h() * h(); }
    double center(int i) const { return (i + 0.5) / n; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
    int col(std::size_t c) const { return static_cast<int>(c % n); }
    int row(std::size_t c) const { return dim == 1 ? 0 : static_cast<int>(c / n); }
    Point center_of(std::size_t c) const { return {center(col(c)), dim == 1 ? 0.5 : center(row(c))}; }
    // Cell containing x (clamped to the domain).
    std::size_t locate(const Point& x) const;

    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Grid grid, std::vector<double> values);
    explicit GridFunction(Grid grid, double value = 0.0);

    // Samples f at cell centres; in 1-D the second coordinate is 0.5.
    static GridFunction from_function(Grid grid, const std::function<double(const Point&)>& f);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t c) const { return values_[c]; }
    double& operator[](std::size_t c) { return values_[c]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double at(int i, int j = 0) const { return values_[grid_.index(i, j)]; }

    // Forward differences, backward at the last index of each axis.
    Point gradient(std::size_t c) const;
    // Multilinear interpolation between cell centres, constant beyond the outer centres.
    double sample(const Point& x) const;
    double integral() const;

private:
    Grid grid_;
    std::vector<double> values_;
};

GridFunction read_grid_function_csv(const std::string& path);
void write_grid_function_csv(const std::string& path, const GridFunction& f);

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double compensated_sum(const std::vector<double>& v);

}  // namespace gammalab
