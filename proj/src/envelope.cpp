#include "gammalab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csv.hpp"
#include "gammalab/error.hpp"

namespace gammalab {

SampledFunction::SampledFunction(double tmax, std::vector<double> values)
    : tmax_(tmax), values_(std::move(values))
{
    require(values_.size() >= 2, ErrorKind::InvalidInput, "sampled function needs at least 2 samples");
    require(std::isfinite(tmax_) && tmax_ > 0.0, ErrorKind::InvalidInput, "tmax must be positive and finite");
    for (double v : values_)
        require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidInput, "sampled values must be finite and strictly positive");
}

SampledFunction SampledFunction::tabulate(const std::function<double(double)>& f, double tmax, std::size_t k)
{
    require(k >= 2, ErrorKind::InvalidInput, "sampled function needs at least 2 samples");
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i)
        v[i] = f(tmax * static_cast<double>(i) / static_cast<double>(k - 1));
    return SampledFunction(tmax, std::move(v));
}

double SampledFunction::node(std::size_t k) const
{
    return tmax_ * static_cast<double>(k) / static_cast<double>(values_.size() - 1);
}

double SampledFunction::operator()(double t) const
{
    if (t <= 0.0)
        return values_.front();
    if (t >= tmax_)
        return values_.back();
    double x = t / step();
    auto k = std::min(static_cast<std::size_t>(x), values_.size() - 2);
    double w = x - static_cast<double>(k);
    return values_[k] + w * (values_[k + 1] - values_[k]);
}

namespace {

double parse_number(std::string_view s, std::string_view name)
{
    return csv::to_double(s, "function '" + std::string(name) + "'");
}

std::function<double(double)> named(std::string_view name)
{
    if (name == "ratz-voigt")
        return [](double t) { return 1.0 + 0.5 * t * t; };
    if (name == "quartic-well-cost")
        return [](double t) { return 1.0 + 0.25 * (t * t - 1.0) * (t * t - 1.0); };
    if (name == "capped-parabola")
        return [](double t) { return std::min(1.0, (t - 1.0) * (t - 1.0) + 0.5); };
    if (name == "max-affine")
        return [](double t) { return std::max(2.0 * t - 1.0, 1.0); };
    auto parts = csv::split(name, ':');
    if (parts[0] == "const" && parts.size() == 2) {
        double c = parse_number(parts[1], name);
        return [c](double) { return c; };
    }
    if (parts[0] == "affine" && parts.size() == 3) {
        double a = parse_number(parts[1], name);
        double b = parse_number(parts[2], name);
        return [a, b](double t) { return a * t + b; };
    }
    fail(ErrorKind::InvalidInput, "unknown function '" + std::string(name) + "'");
}

}  // namespace

SampledFunction builtin_function(std::string_view name, double tmax, std::size_t k)
{
    double offset = 0.0;
    if (auto plus = name.rfind('+'); plus != std::string_view::npos && plus > 0) {
        offset = parse_number(name.substr(plus + 1), name);
        name = name.substr(0, plus);
    }
    auto f = named(name);
    return SampledFunction::tabulate([&](double t) { return f(t) + offset; }, tmax, k);
}

SampledFunction read_sampled_csv(const std::string& path)
{
    auto lines = csv::read_lines(path);
    require(!lines.empty() && csv::split(lines[0]) == std::vector<std::string_view>{"t", "value"},
            ErrorKind::InvalidInput, path + ": expected header 't,value'");
    std::vector<double> ts, vs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cols = csv::split(lines[i]);
        require(cols.size() == 2, ErrorKind::InvalidInput, path + ": line " + std::to_string(i + 1) + " needs 2 columns");
        ts.push_back(csv::to_double(cols[0], path));
        vs.push_back(csv::to_double(cols[1], path));
    }
    require(ts.size() >= 2, ErrorKind::InvalidInput, path + ": need at least 2 samples");
    require(std::abs(ts[0]) <= 1e-12, ErrorKind::InvalidInput, path + ": grid must start at t = 0");
    double tmax = ts.back();
    double h = tmax / static_cast<double>(ts.size() - 1);
    for (std::size_t i = 0; i < ts.size(); ++i)
        require(std::abs(ts[i] - h * static_cast<double>(i)) <= 1e-9 * tmax, ErrorKind::InvalidInput,
                path + ": grid is not uniform at line " + std::to_string(i + 2));
    return SampledFunction(tmax, std::move(vs));
}

void write_sampled_csv(const std::string& path, const SampledFunction& f)
{
    std::ostringstream out;
    out << "t,value\n";
    for (std::size_t k = 0; k < f.size(); ++k)
        out << csv::num(f.node(k)) << ',' << csv::num(f[k]) << '\n';
    csv::write_text(path, out.str());
}

namespace {

std::vector<std::size_t> lower_hull(const std::vector<double>& v)
{
    std::vector<std::size_t> hull;
    hull.reserve(v.size());
    for (std::size_t c = 0; c < v.size(); ++c) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2];
            std::size_t b = hull.back();
            double cross = static_cast<double>(b - a) * (v[c] - v[a]) - (v[b] - v[a]) * static_cast<double>(c - a);
            if (cross > 0.0)
                break;
            hull.pop_back();
        }
        hull.push_back(c);
    }
    return hull;
}

bool is_convex_sequence(const std::vector<double>& v)
{
    double scale = 0.0;
    for (double x : v)
        scale = std::max(scale, std::abs(x));
    double tol = 64.0 * 2.220446049250313e-16 * scale;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
        if (v[k + 1] - 2.0 * v[k] + v[k - 1] < -tol)
            return false;
    }
    return true;
}

std::vector<double> interpolate_hull(const std::vector<double>& v, const std::vector<std::size_t>& hull)
{
    std::vector<double> out(v.size());
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        std::size_t a = hull[e], b = hull[e + 1];
        out[a] = v[a];
        for (std::size_t k = a + 1; k < b; ++k)
            out[k] = v[a] + (v[b] - v[a]) * static_cast<double>(k - a) / static_cast<double>(b - a);
    }
    out[hull.back()] = v[hull.back()];
    return out;
}

void hull_of(const SampledFunction& f, std::vector<double>& convex, std::vector<std::size_t>& vertices)
{
    const auto& v = f.values();
    if (is_convex_sequence(v)) {
        convex = v;
        vertices.resize(v.size());
        for (std::size_t k = 0; k < v.size(); ++k)
            vertices[k] = k;
        return;
    }
    vertices = lower_hull(v);
    convex = interpolate_hull(v, vertices);
}

double interpolate(const std::vector<double>& v, double h, double t)
{
    double x = t / h;
    auto k = std::min(static_cast<std::size_t>(std::max(x, 0.0)), v.size() - 2);
    double w = x - static_cast<double>(k);
    return v[k] + w * (v[k + 1] - v[k]);
}

}  // namespace

std::vector<double> convex_envelope(const SampledFunction& f)
{
    std::vector<double> convex;
    std::vector<std::size_t> vertices;
    hull_of(f, convex, vertices);
    return convex;
}

EnvelopeTable convex_subadditive_envelope(const SampledFunction& f)
{
    EnvelopeTable env;
    env.base = f;
    hull_of(f, env.convex, env.hull_vertices);
    const auto& c = env.convex;
    const std::size_t K = c.size();
    const double h = f.step();

    std::size_t best = 1;
    double best_ratio = c[1] / f.node(1);
    for (std::size_t k = 2; k < K; ++k) {
        double r = c[k] / f.node(k);
        if (r < best_ratio) {
            best_ratio = r;
            best = k;
        }
    }

    if (best == K - 1) {
        env.t0 = kInfinity;
        env.t0_beyond_tmax = true;
        env.theta_cs = std::max(0.0, (c[K - 1] - c[K - 2]) / h);
        env.branch_index = K;
        env.convex_subadditive = c;
        return env;
    }

    env.theta_cs = best_ratio;
    env.branch_index = best;
    env.t0 = f.node(best);
    if (best >= 2) {
        double rm = c[best - 1] / f.node(best - 1);
        double rp = c[best + 1] / f.node(best + 1);
        double curv = rp - 2.0 * best_ratio + rm;
        if (curv > 0.0) {
            double shift = std::clamp(-0.5 * (rp - rm) / curv, -1.0, 1.0);
            env.t0 = f.node(best) + shift * h;
        }
    }
    env.convex_subadditive.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        env.convex_subadditive[k] = k < best ? c[k] : env.theta_cs * f.node(k);
    return env;
}

double EnvelopeTable::eval_convex(double t) const
{
    const double tmax = base.tmax();
    if (t <= 0.0)
        return convex.front();
    if (t >= tmax) {
        double slope = (convex.back() - convex[convex.size() - 2]) / base.step();
        return convex.back() + slope * (t - tmax);
    }
    return interpolate(convex, base.step(), t);
}

double EnvelopeTable::eval_convex_subadditive(double t) const
{
    if (t <= 0.0)
        return convex_subadditive.front();
    if (t0_finite() && t >= base.node(branch_index))
        return theta_cs * t;
    const double tmax = base.tmax();
    if (t >= tmax)
        return convex_subadditive.back() + theta_cs * (t - tmax);
    return interpolate(convex_subadditive, base.step(), t);
}

CsCheck cs_of_c_equals_cs_check(const SampledFunction& f, double tolerance)
{
    auto direct = convex_subadditive_envelope(f);
    auto via_convex = convex_subadditive_envelope(SampledFunction(f.tmax(), direct.convex));
    CsCheck out;
    for (std::size_t k = 0; k < f.size(); ++k)
        out.max_deviation = std::max(out.max_deviation,
                                     std::abs(direct.convex_subadditive[k] - via_convex.convex_subadditive[k]));
    out.ok = out.max_deviation <= tolerance;
    return out;
}

AffineDual affine_minorant_dual(const SampledFunction& f)
{
    auto env = convex_subadditive_envelope(f);
    AffineDual dual;
    const auto& c = env.convex;
    auto push = [&](double a, double b) {
        if (!dual.pieces.empty()) {
            const auto& last = dual.pieces.back();
            if (std::abs(last.a - a) <= 1e-12 * std::max(1.0, std::abs(a)) &&
                std::abs(last.b - b) <= 1e-12 * std::max(1.0, std::abs(b)))
                return;
        }
        dual.pieces.push_back({a, b});
    };
    const auto& hv = env.hull_vertices;
    for (std::size_t e = 0; e + 1 < hv.size(); ++e) {
        std::size_t a = hv[e], b = hv[e + 1];
        if (env.t0_finite() && b > env.branch_index)
            break;
        double slope = (c[b] - c[a]) / (f.node(b) - f.node(a));
        double intercept = c[a] - slope * f.node(a);
        push(slope, std::max(0.0, intercept));
    }
    if (env.t0_finite())
        push(env.theta_cs, 0.0);

    dual.reconstructed.assign(f.size(), -kInfinity);
    for (std::size_t k = 0; k < f.size(); ++k) {
        double t = f.node(k);
        for (const auto& p : dual.pieces)
            dual.reconstructed[k] = std::max(dual.reconstructed[k], p.a * t + p.b);
    }
    dual.max_slope = 0.0;
    for (const auto& p : dual.pieces)
        dual.max_slope = std::max(dual.max_slope, p.a);
    return dual;
}

TwoPoint two_point_decomposition(const EnvelopeTable& env, double alpha, double delta)
{
    const auto& f = env.base;
    require(delta > 0.0, ErrorKind::InvalidInput, "delta must be positive");
    require(std::isfinite(alpha) && f.in_range(alpha), ErrorKind::Domain, "alpha outside [0, tmax]");
    alpha = std::min(alpha, f.tmax());
    if (f(alpha) <= env.eval_convex(alpha) + delta)
        return {1.0, alpha, alpha};
    const auto& hv = env.hull_vertices;
    std::size_t e = 0;
    while (e + 2 < hv.size() && f.node(hv[e + 1]) <= alpha)
        ++e;
    double s = f.node(hv[e]);
    double t = f.node(hv[e + 1]);
    return {(t - alpha) / (t - s), s, t};
}

TwoPoint two_point_decomposition(const SampledFunction& f, double alpha, double delta)
{
    return two_point_decomposition(convex_subadditive_envelope(f), alpha, delta);
}

void write_envelope_csv(const std::string& path, const EnvelopeTable& env)
{
    std::ostringstream out;
    out << "t,value,convex,convex_subadditive\n";
    for (std::size_t k = 0; k < env.base.size(); ++k)
        out << csv::num(env.base.node(k)) << ',' << csv::num(env.base[k]) << ',' << csv::num(env.convex[k]) << ','
            << csv::num(env.convex_subadditive[k]) << '\n';
    csv::write_text(path, out.str());
}

}  // namespace gammalab
