#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "gammalab/envelope.hpp"
#include "gammalab/functionals.hpp"
#include "gammalab/grid.hpp"
#include "gammalab/measures.hpp"

namespace gammalab {

// Sawtooth displacement along e_2 inside the square of side L centred at `center`.
// Local coordinates y = 2 (x - center) / L; T_2 = x_2 + (L/2) c(y_2) g(y_1) with
// g(y) = s_b((2n+1) y) / (2n+1), s_b the 2-periodic tent of height b, c a linear ramp
// of width `margin` towards |y_2| = 1.
struct WrigglingMap {
    double b = 0.0;
    int n = 1;
    double L = 1.0;
    double p = 1.0;
    int dim = 2;
    Point center{0.5, 0.5};
    double margin = 0.0;  // local units; 0 selects the default

    double effective_margin() const;
};

struct MapValue {
    Point x;
    std::array<std::array<double, 2>, 2> jacobian;
};

MapValue wriggling_map_eval(const WrigglingMap& map, const Point& x);
double wriggled_energy_factor(const Point& slope, const WrigglingMap& map, int quadrature = 1024);
double wriggling_factor_limit(double b, double p, int dim);
double solve_b_for_factor(double r, double p, int dim);

struct MultiplierRegion {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    double r = 1.0;
};
struct MultiplierField {
    std::vector<MultiplierRegion> regions;
    double at(const Point& x) const;
};

struct WriggleOptions {
    int oscillations = 16;
    int cells_per_half_period = 1;
};

struct WriggleResult {
    GridFunction phi;
    int cells_per_cube = 0;
    int wriggled_cubes = 0;
};

// Output grid has k * (2 q (2n+1) + 1) cells per side.
WriggleResult wriggle_field(const GridFunction& phi, const MultiplierField& f, int k, const WriggleOptions& opt = {});
// Bilinear copy of phi on the output grid of wriggle_field (the identity branch).
GridFunction resample(const GridFunction& phi, const Grid& target);

// Energy measure of a field, recomputed after the field is modified.
struct EnergyModel {
    std::string name;
    std::function<GridMeasure(const GridFunction&)> measure;
    double profile_width = 0.0;  // phase-field interface width, 0 for sharp models
};
EnergyModel tv_model(double rho_squared = 1.0);
EnergyModel mm_model(double eps, const DoubleWell& W);

enum class BumpShape { Smooth, Droplet };

struct SingularOptions {
    // 0: bumps carry a small energy window below the cube bound;
    // > 0: bumps carry the atom at this density.
    double target_density = 0.0;
    BumpShape shape = BumpShape::Smooth;
};

struct RecoveredAtom {
    Atom atom;
    bool type_a = false;
    double radius = 0.0;
    double ball_energy = 0.0;
    double density = 0.0;
    double bound = 0.0;
    bool within_bound = true;
};

struct SingularRecovery {
    GridFunction phi;
    std::vector<double> h;
    GridMeasure energy;
    std::vector<RecoveredAtom> atoms;
};

// zeta is evaluated through its convex-subadditive form, linear with slope theta_cs beyond t0.
SingularRecovery recover_singular(const GridFunction& phi, const EnergyModel& model, const GridMeasure& mu,
                                  const EnvelopeTable& zeta, int n, const SingularOptions& opt = {});
double zeta_energy(const std::vector<double>& h, const GridMeasure& energy, const EnvelopeTable& zeta);
GridMeasure density_times(const std::vector<double>& h, const GridMeasure& energy);

// Piecewise-constant density on the m^d cubes of side 1/m.
struct CubeDensity {
    int dim = 2;
    int m = 1;
    std::vector<double> alpha;

    double at(const Point& x) const;
    std::vector<double> on(const Grid& grid) const;
};

CubeDensity piecewise_average_density(const std::vector<double>& g, const GridMeasure& F, int n);

struct ScaledCouple {
    GridFunction phi;
    std::vector<double> h;
    int wriggled_cubes = 0;
};
ScaledCouple scale_to_subadditive(const GridFunction& phi, const CubeDensity& g, const EnvelopeTable& env, int k,
                                  const WriggleOptions& opt = {});

std::vector<double> split_density(const GridMeasure& energy, const CubeDensity& g, const EnvelopeTable& psi, int j,
                                  double delta = 1e-9);

struct PipelineParams {
    int n = 16;       // Dirac level
    int average = 0;  // averaging cubes per side, 0 = n
    int k = 8;        // wriggle cubes per side
    int j = 4;        // crumble level
    double delta = 1e-3;
    WriggleOptions wriggle;
    double atom_density = 0.0;  // 0 = t0 of psi
};

struct PipelineStage {
    std::string stage;
    double energy = 0.0;
    double mass = 0.0;
};

struct PipelineResult {
    GridFunction phi;
    std::vector<double> h;
    GridMeasure energy;
    std::vector<PipelineStage> stages;
    double final_energy = 0.0;
};

PipelineResult recovery_pipeline(const GridFunction& phi, const EnergyModel& model, const GridMeasure& mu,
                                 const SampledFunction& psi, const PipelineParams& params);

}  // namespace gammalab
