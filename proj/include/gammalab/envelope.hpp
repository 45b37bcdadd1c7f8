#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace gammalab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Strictly positive function tabulated on t_k = k * tmax / (K - 1).
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(double tmax, std::vector<double> values);

    static SampledFunction tabulate(const std::function<double(double)>& f, double tmax, std::size_t k);

    double tmax() const { return tmax_; }
    std::size_t size() const { return values_.size(); }
    double step() const { return tmax_ / static_cast<double>(values_.size() - 1); }
    double node(std::size_t k) const;
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }

    // Piecewise-linear interpolation; constant extension beyond tmax.
    double operator()(double t) const;
    bool in_range(double t) const { return t >= 0.0 && t <= tmax_ * (1.0 + 1e-12); }

private:
    double tmax_ = 0.0;
    std::vector<double> values_;
};

// Named functions: ratz-voigt, quartic-well-cost, capped-parabola, max-affine,
// const:<c>, affine:<a>:<b>; any name may carry a "+<c>" offset suffix.
SampledFunction builtin_function(std::string_view name, double tmax, std::size_t k);
SampledFunction read_sampled_csv(const std::string& path);
void write_sampled_csv(const std::string& path, const SampledFunction& f);

struct EnvelopeTable {
    SampledFunction base;
    std::vector<double> convex;
    std::vector<double> convex_subadditive;
    double t0 = kInfinity;
    double theta_cs = 0.0;
    // First grid index of the linear branch; equals size() when t0 is infinite.
    std::size_t branch_index = 0;
    bool t0_beyond_tmax = false;
    std::vector<std::size_t> hull_vertices;

    bool t0_finite() const { return t0 < kInfinity; }
    double eval_convex(double t) const;
    double eval_convex_subadditive(double t) const;
};

std::vector<double> convex_envelope(const SampledFunction& f);
EnvelopeTable convex_subadditive_envelope(const SampledFunction& f);

struct CsCheck {
    bool ok = false;
    double max_deviation = 0.0;
};
CsCheck cs_of_c_equals_cs_check(const SampledFunction& f, double tolerance = 1e-8);

struct AffinePiece {
    double a = 0.0;
    double b = 0.0;
};
struct AffineDual {
    std::vector<AffinePiece> pieces;
    std::vector<double> reconstructed;
    double max_slope = 0.0;
};
AffineDual affine_minorant_dual(const SampledFunction& f);

struct TwoPoint {
    double lambda = 1.0;
    double s = 0.0;
    double t = 0.0;
};
TwoPoint two_point_decomposition(const SampledFunction& f, double alpha, double delta);
TwoPoint two_point_decomposition(const EnvelopeTable& env, double alpha, double delta);

void write_envelope_csv(const std::string& path, const EnvelopeTable& env);

}  // namespace gammalab
