#include "gammalab/sandwich.hpp"

#include <cmath>
#include <numbers>

#include "csv.hpp"
#include "gammalab/error.hpp"
#include "gammalab/recovery.hpp"

namespace gammalab {

namespace {

struct Sequence {
    std::string name;
    double profile_scale = 1.0;
    double density_factor = 1.0;
};

}  // namespace

double sandwich_sharp_value(const SandwichCouple& couple, const EnvelopeTable& env, const DoubleWell& W,
                            int arc_samples)
{
    require(arc_samples >= 16, ErrorKind::InvalidInput, "need at least 16 arc samples");
    const Grid grid(2, 256);
    GridMeasure F(grid);
    const double sigma = sigma_W(W);
    const double piece = sigma * 2.0 * std::numbers::pi * couple.radius / arc_samples;
    for (int k = 0; k < arc_samples; ++k) {
        const double a = 2.0 * std::numbers::pi * (k + 0.5) / arc_samples;
        const Point x{couple.center[0] + couple.radius * std::cos(a), couple.center[1] + couple.radius * std::sin(a)};
        F.weights()[grid.locate(x)] += piece;
    }
    GridMeasure mu = F.scaled(couple.interface_density);
    for (const auto& a : couple.atoms)
        mu.add_atom(a);
    return sharp_energy(F, mu, env);
}

std::vector<SandwichRow> gamma_sandwich_report(const SandwichCouple& couple, const std::vector<double>& eps_list,
                                               const SampledFunction& psi, const DoubleWell& W,
                                               const SandwichOptions& opt)
{
    require(!eps_list.empty(), ErrorKind::InvalidInput, "eps list is empty");
    require(couple.radius > 0.0 && couple.interface_density >= 0.0, ErrorKind::InvalidInput, "invalid couple");
    require(opt.cells_per_eps >= 4, ErrorKind::Guard, "need at least 4 cells per eps");
    const auto env = convex_subadditive_envelope(psi);
    const double sharp = sandwich_sharp_value(couple, env, W, opt.arc_samples);
    double atom_mass = 0.0;
    for (const auto& a : couple.atoms)
        atom_mass += a.mass;
    if (atom_mass > 0.0)
        require(env.t0_finite(), ErrorKind::Domain, "atoms need a finite t0");
    const double cap = env.t0_finite() ? env.base.node(env.branch_index) : 0.0;

    std::vector<Sequence> sequences{{"recovery", 1.0, 1.0}, {"wide-profile", 2.0, 1.0}};
    if (atom_mass > 0.0) {
        for (double f : opt.competitor_factors)
            sequences.push_back({"droplet-x" + csv::num(f), 1.0, f});
    }

    std::vector<SandwichRow> rows;
    for (double eps : eps_list) {
        require(eps > 0.0 && eps <= 0.25, ErrorKind::InvalidInput, "eps must lie in (0, 1/4]");
        const int N = static_cast<int>(std::lround(opt.cells_per_eps / eps));
        const Grid grid(2, N);
        const auto limit = GridFunction::from_function(grid, [&](const Point& x) {
            return std::hypot(x[0] - couple.center[0], x[1] - couple.center[1]) < couple.radius ? 1.0 : 0.0;
        });
        auto model = mm_model(eps, W);
        for (const auto& seq : sequences) {
            auto profile = optimal_profile(W, eps * seq.profile_scale);
            auto phi = GridFunction::from_function(grid, [&](const Point& x) {
                return profile(couple.radius - std::hypot(x[0] - couple.center[0], x[1] - couple.center[1]));
            });
            auto F = model.measure(phi);
            GridMeasure mu = F.scaled(couple.interface_density);
            for (const auto& a : couple.atoms)
                mu.add_atom(a);

            SingularRecovery rec{phi, {}, F, {}};
            if (atom_mass > 0.0) {
                SingularOptions sopt{cap * seq.density_factor, BumpShape::Droplet};
                rec = recover_singular(phi, model, mu, env, opt.dirac_level, sopt);
            } else {
                rec.h.assign(grid.cells(), couple.interface_density);
            }
            const double energy = relative_energy(rec.energy, density_times(rec.h, rec.energy), psi).value;
            CompensatedSum l1;
            for (std::size_t c = 0; c < grid.cells(); ++c)
                l1.add(std::abs(rec.phi[c] - limit[c]) * grid.cell_volume());
            rows.push_back({couple.name, eps, N, seq.name, energy, sharp, (energy - sharp) / sharp, l1.value()});
        }
    }
    return rows;
}

void write_sandwich_csv(const std::string& path, const std::vector<SandwichRow>& rows)
{
    std::string text = "couple,eps,N,sequence,energy,sharp,gap,l1_defect\n";
    for (const auto& r : rows)
        text += r.couple + "," + csv::num(r.eps) + "," + std::to_string(r.N) + "," + r.sequence + "," +
                csv::num(r.energy) + "," + csv::num(r.sharp) + "," + csv::num(r.gap) + "," + csv::num(r.l1_defect) +
                "\n";
    csv::write_text(path, text);
}

}  // namespace gammalab
