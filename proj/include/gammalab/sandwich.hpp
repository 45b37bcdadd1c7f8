#pragma once

#include <string>
#include <vector>

#include "gammalab/envelope.hpp"
#include "gammalab/functionals.hpp"
#include "gammalab/measures.hpp"

namespace gammalab {

// Disc interface carrying a uniform density plus optional atoms off the interface.
struct SandwichCouple {
    std::string name = "disc";
    Point center{0.5, 0.5};
    double radius = 0.25;
    double interface_density = 0.0;
    std::vector<Atom> atoms;
};

struct SandwichOptions {
    int cells_per_eps = 8;
    int dirac_level = 16;
    std::vector<double> competitor_factors{0.5, 2.0};
    int arc_samples = 1 << 16;
};

struct SandwichRow {
    std::string couple;
    double eps = 0.0;
    int N = 0;
    std::string sequence;
    double energy = 0.0;
    double sharp = 0.0;
    double gap = 0.0;
    double l1_defect = 0.0;
};

// Sharp value sigma_W * (psi^cs(u) Per + Theta * atom mass), from a sampled arc-length measure.
double sandwich_sharp_value(const SandwichCouple& couple, const EnvelopeTable& env, const DoubleWell& W,
                            int arc_samples = 1 << 16);

std::vector<SandwichRow> gamma_sandwich_report(const SandwichCouple& couple, const std::vector<double>& eps_list,
                                               const SampledFunction& psi, const DoubleWell& W,
                                               const SandwichOptions& opt = {});

void write_sandwich_csv(const std::string& path, const std::vector<SandwichRow>& rows);

}  // namespace gammalab
