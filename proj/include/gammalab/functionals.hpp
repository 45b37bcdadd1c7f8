#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gammalab/envelope.hpp"
#include "gammalab/grid.hpp"
#include "gammalab/measures.hpp"

namespace gammalab {

struct DoubleWell {
    std::string name;
    std::function<double(double)> W;
    std::function<double(double)> dW;
};

DoubleWell quartic_well();                 // t^2 (1-t)^2
DoubleWell sine_well();                    // sin^2(pi t) / pi^2, no growth at infinity
DoubleWell scaled_well(const DoubleWell& w, double factor);
DoubleWell double_well_by_name(const std::string& name);

struct WellCheck {
    bool ok = false;
    std::string message;
};
WellCheck validate_double_well(const DoubleWell& w);

struct Kernel {
    std::string name;
    std::function<double(double)> eta;
    double support = 1.0;
};

Kernel indicator_kernel();               // 1 on [0,1]
Kernel tent_kernel();                    // 2(1-t) on [0,1]
Kernel rescaled_kernel(const Kernel& k, double s);  // eta(t/s)/s
Kernel kernel_by_name(const std::string& name);
double kernel_mass(const Kernel& k);

struct Energy {
    double total = 0.0;
    GridMeasure density;
};

Energy mm_energy(const GridFunction& phi, double eps, const DoubleWell& W);
double sigma_W(const DoubleWell& W);
// Heteroclinic profile p with eps p' = sqrt(W(p)), p(0) = 1/2, as a function of the signed distance.
std::function<double(double)> optimal_profile(const DoubleWell& W, double eps);

Energy nonlocal_tv_energy(const GridFunction& phi, double eps, const Kernel& eta, const GridFunction& rho);
double sigma_eta(const Kernel& eta, int dim);

Energy weighted_tv_energy(const GridFunction& phi, const GridFunction& rho);
Energy p_dirichlet_energy(const GridFunction& phi, double p);

struct RelativeEnergy {
    double value = 0.0;
    bool extrapolated = false;
};
// +infinity when mu has a singular part against the energy measure.
RelativeEnergy relative_energy(const GridMeasure& energy, const GridMeasure& mu, const SampledFunction& psi);
double sharp_energy(const GridMeasure& energy, const GridMeasure& mu, const EnvelopeTable& env);

// d/dphi_c of sum_c weight_c * e_c(phi) * |cell|, e_c the Modica-Mortola cell density.
std::vector<double> mm_weighted_gradient(const GridFunction& phi, double eps, const DoubleWell& W,
                                         const std::vector<double>& weight);
// d/dphi of relative_energy(mm density of phi, mu, psi) with mu held fixed.
std::vector<double> mm_relative_energy_gradient(const GridFunction& phi, double eps, const DoubleWell& W,
                                                const GridMeasure& mu, const SampledFunction& psi);

// Slope of the linear interpolant of psi on the sample interval containing t.
double sampled_slope(const SampledFunction& psi, double t);

}  // namespace gammalab
