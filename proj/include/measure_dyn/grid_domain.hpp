#ifndef MEASURE_DYN_GRID_DOMAIN_HPP
#define MEASURE_DYN_GRID_DOMAIN_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "measure_dyn/errors.hpp"

namespace measure_dyn {

/// Quadrature discretization of a compact interval: nodes x_1 < ... < x_P and
/// positive composite-trapezoid weights. total_mass discretizes the base
/// measure of the whole interval. The same weights are reused for kernel
/// normalization and both operator directions, which is what makes row
/// stochasticity and mass conservation identities rather than approximations.
class GridDomain {
public:
    static GridDomain uniform(double a, double b, std::size_t P) {
        if (!(a < b)) throw precondition_error("grid domain needs a < b");
        if (P < 2) throw precondition_error("grid domain needs at least 2 points");
        std::vector<double> pts(P);
        double h = (b - a) / static_cast<double>(P - 1);
        for (std::size_t i = 0; i < P; ++i) pts[i] = a + static_cast<double>(i) * h;
        pts.back() = b;
        return from_points(std::move(pts));
    }

    static GridDomain from_points(std::vector<double> pts) {
        if (pts.size() < 2) throw precondition_error("grid domain needs at least 2 points");
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (!(pts[i] > pts[i - 1]))
                throw precondition_error("grid points must be strictly increasing");
        GridDomain d;
        d.points_ = std::move(pts);
        std::size_t P = d.points_.size();
        d.weights_.assign(P, 0.0);
        d.weights_[0] = 0.5 * (d.points_[1] - d.points_[0]);
        d.weights_[P - 1] = 0.5 * (d.points_[P - 1] - d.points_[P - 2]);
        for (std::size_t i = 1; i + 1 < P; ++i)
            d.weights_[i] = 0.5 * (d.points_[i + 1] - d.points_[i - 1]);
        double s = 0.0;
        for (double q : d.weights_) s += q;
        d.total_mass_ = s;
        return d;
    }

    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& quad_weights() const { return weights_; }
    double total_mass() const { return total_mass_; }
    std::size_t size() const { return points_.size(); }
    double a() const { return points_.front(); }
    double b() const { return points_.back(); }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    double total_mass_ = 0.0;
};

/// Continuous function sampled at the grid nodes.
struct GridFunction {
    std::vector<double> values;
};

/// Signed measure as point masses on the grid nodes; mass m_i corresponds to
/// density m_i / q_i against the base measure.
struct GridMeasure {
    std::vector<double> masses;
};

inline double tv_norm(const GridMeasure& v) {
    double s = 0.0;
    for (double m : v.masses) s += std::abs(m);
    return s;
}

inline double total_mass(const GridMeasure& v) {
    double s = 0.0;
    for (double m : v.masses) s += m;
    return s;
}

inline bool is_probability(const GridMeasure& v, double tol = 1e-12) {
    for (double m : v.masses)
        if (m < 0.0) return false;
    return std::abs(total_mass(v) - 1.0) <= tol;
}

inline double tv_diff(const GridMeasure& a, const GridMeasure& b) {
    if (a.masses.size() != b.masses.size())
        throw precondition_error("tv_diff: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.masses.size(); ++i) s += std::abs(a.masses[i] - b.masses[i]);
    return s;
}

/// Sup norm; equals the order-unit norm on C(Omega) with unit 1.
inline double thompson_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

/// Half the total variation, defined on zero-mass measures only.
inline double hilbert_dual_norm(const GridMeasure& v) {
    if (std::abs(total_mass(v)) > 1e-10)
        throw precondition_error("hilbert_dual_norm needs total mass 0 (got " +
                                 std::to_string(total_mass(v)) + ")");
    return 0.5 * tv_norm(v);
}

/// <v, f> = sum_i m_i f(x_i), the discrete integral of f against v.
inline double pair(const GridMeasure& v, const GridFunction& f) {
    if (v.masses.size() != f.values.size())
        throw precondition_error("pair: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < v.masses.size(); ++i) s += v.masses[i] * f.values[i];
    return s;
}

inline GridFunction constant_function(const GridDomain& dom, double c) {
    return {std::vector<double>(dom.size(), c)};
}

template <class F>
GridFunction sample_function(const GridDomain& dom, F&& f) {
    GridFunction g;
    g.values.reserve(dom.size());
    for (double x : dom.points()) g.values.push_back(f(x));
    return g;
}

/// The base probability measure: masses proportional to quadrature weights.
inline GridMeasure uniform_probability(const GridDomain& dom) {
    GridMeasure v;
    v.masses.reserve(dom.size());
    for (double q : dom.quad_weights()) v.masses.push_back(q / dom.total_mass());
    return v;
}

/// Point mass snapped to the nearest grid node; the snap distance records how
/// far the request was from the representable support.
struct SnappedPointMass {
    GridMeasure measure;
    std::size_t index = 0;
    double snap_distance = 0.0;
};

inline SnappedPointMass point_mass(const GridDomain& dom, double x) {
    const auto& pts = dom.points();
    std::size_t best = 0;
    double bestd = std::abs(pts[0] - x);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double d = std::abs(pts[i] - x);
        if (d < bestd) {
            bestd = d;
            best = i;
        }
    }
    SnappedPointMass out;
    out.measure.masses.assign(dom.size(), 0.0);
    out.measure.masses[best] = 1.0;
    out.index = best;
    out.snap_distance = bestd;
    return out;
}

}  // namespace measure_dyn

#endif
