#pragma once

#include <string>
#include <vector>

#include "gammalab/envelope.hpp"
#include "gammalab/functionals.hpp"
#include "gammalab/grid.hpp"
#include "gammalab/measures.hpp"

namespace gammalab {

struct UOptimal {
    std::vector<double> u;
    double value = 0.0;
    double multiplier = 0.0;
};

// Minimizes sum psi(u_c) nu_c subject to sum u_c nu_c = m and 0 <= u_c <= tmax.
UOptimal u_optimal_given_phi(const GridMeasure& nu, const SampledFunction& psi, double m);

struct AdatomState {
    GridFunction phi;
    std::vector<double> u;
    double volume = 0.0;
    double mass = 0.0;
};

// Linear ramp of the given width across the circle |x - c| = radius (a step at x = radius in 1-D).
GridFunction mollified_disc(const Grid& grid, const Point& center, double radius, double width);
AdatomState make_adatom_state(GridFunction phi, double mass);

struct TraceRow {
    int iter = 0;
    double energy = 0.0;
    double grad_norm = 0.0;
    double residual = 0.0;
};

struct MinimizeOptions {
    int budget = 500;
    double armijo = 1e-4;
    double initial_step = 1.0;
    double relative_tolerance = 1e-6;
};

struct MinimizeResult {
    AdatomState state;
    std::vector<TraceRow> trace;
    double energy = 0.0;
    double multiplier = 0.0;
    bool converged = false;
};

MinimizeResult minimize_mm_adatom(const AdatomState& init, double eps, const DoubleWell& W, const SampledFunction& psi,
                                  const MinimizeOptions& opt = {});

// Energy of the best constant-u density on the frozen field.
double frozen_phi_energy(const GridFunction& phi, double eps, const DoubleWell& W, const SampledFunction& psi,
                         double m);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

}  // namespace gammalab
