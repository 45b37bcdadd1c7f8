#pragma once

#include <array>
#include <string>
#include <vector>

#include "gammalab/grid.hpp"

namespace gammalab {

struct Atom {
    Point x{0.5, 0.5};
    double mass = 0.0;
};

// Per-cell mass plus point atoms on (0,1)^d.
class GridMeasure {
public:
    GridMeasure() = default;
    explicit GridMeasure(Grid grid);
    GridMeasure(Grid grid, std::vector<double> weights, std::vector<Atom> atoms = {});

    static GridMeasure uniform(Grid grid, double total);
    // Cell masses from a density f: cell volume times f at the centre.
    static GridMeasure from_density(Grid grid, const std::function<double(const Point&)>& f);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& weights() { return weights_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    void add_atom(const Atom& a);
    void set_weight(std::size_t c, double w);

    double cell_total() const;
    double atom_total() const;
    double total() const;
    bool has_atoms() const { return !atoms_.empty(); }

    GridMeasure scaled(double s) const;
    GridMeasure restricted(const std::vector<char>& mask) const;

private:
    Grid grid_;
    std::vector<double> weights_;
    std::vector<Atom> atoms_;
};

GridMeasure read_measure_csv(const std::string& path);
void write_measure_csv(const std::string& path, const GridMeasure& mu);
GridMeasure operator+(const GridMeasure& a, const GridMeasure& b);

inline constexpr int kMomentCount = 64;

// Integrals of the test family prod_a sin(pi k_a x_a) against mu, cells treated as uniform mass.
std::array<double, kMomentCount> weakstar_moments(const GridMeasure& mu);
std::array<int, 2> weakstar_mode(int dim, int k);
double weakstar_distance(const GridMeasure& mu, const GridMeasure& nu);

struct Decomposition {
    std::vector<double> density;
    GridMeasure singular;
};
Decomposition radon_nikodym_decompose(const GridMeasure& mu, const GridMeasure& nu);
GridMeasure reconstruct(const Decomposition& d, const GridMeasure& nu);

GridMeasure dirac_approximation(const GridMeasure& mu_perp, int n);

struct CrumbleResult {
    int j = 0;
    std::vector<char> mask;
    // |mu(R ∩ Q_i) - lambda mu(Q_i)| / mu(Q_i) per parent cube (0 for null cubes).
    std::vector<double> proportion_error;
    double max_proportion_error = 0.0;
};
CrumbleResult crumble_partition(const GridMeasure& mu, double lambda, int j);

}  // namespace gammalab
