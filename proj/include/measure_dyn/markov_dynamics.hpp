#ifndef MEASURE_DYN_MARKOV_DYNAMICS_HPP
#define MEASURE_DYN_MARKOV_DYNAMICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "measure_dyn/errors.hpp"
#include "measure_dyn/grid_domain.hpp"
#include "measure_dyn/parallel.hpp"
#include "measure_dyn/text_io.hpp"

namespace measure_dyn {

/// Row-normalized kernel matrix: entry (i, j) is k(x_i, x_j) / d_i with
/// d_i the quadrature integral of row i. Every row then integrates to one
/// against the grid's quadrature weights, so the induced operator is Markov
/// by construction.
class NormalizedKernel {
public:
    NormalizedKernel(std::size_t P, std::vector<double> matrix, std::vector<double> denominators,
                     double sup_norm)
        : P_(P), matrix_(std::move(matrix)), denominators_(std::move(denominators)),
          sup_norm_(sup_norm) {}

    std::size_t size() const { return P_; }
    double at(std::size_t i, std::size_t j) const { return matrix_[i * P_ + j]; }
    const double* row(std::size_t i) const { return matrix_.data() + i * P_; }
    const std::vector<double>& denominators() const { return denominators_; }
    /// Grid maximum of the matrix; a sample-based stand-in for the true sup.
    double sup_norm() const { return sup_norm_; }

private:
    std::size_t P_;
    std::vector<double> matrix_;
    std::vector<double> denominators_;
    double sup_norm_;
};

/// Builds the row-normalized kernel. Rejects negative samples and rows whose
/// quadrature integral is not safely positive.
template <class K>
NormalizedKernel normalize_kernel(const GridDomain& dom, K&& k) {
    const std::size_t P = dom.size();
    const auto& x = dom.points();
    const auto& q = dom.quad_weights();
    std::vector<double> matrix(P * P);
    std::vector<double> denom(P);
    std::vector<double> row_max(P, 0.0);
    std::vector<int> row_bad(P, 0);

    parallel_for(P, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* row = matrix.data() + i * P;
            double d = 0.0;
            for (std::size_t j = 0; j < P; ++j) {
                double v = k(x[i], x[j]);
                if (!(v >= 0.0)) {
                    row_bad[i] = 1;
                    return;
                }
                row[j] = v;
                d += v * q[j];
            }
            denom[i] = d;
            if (d <= 1e-12) {
                row_bad[i] = 2;
                return;
            }
            double m = 0.0;
            for (std::size_t j = 0; j < P; ++j) {
                row[j] /= d;
                m = std::max(m, row[j]);
            }
            row_max[i] = m;
        }
    }, 8);

    for (std::size_t i = 0; i < P; ++i) {
        if (row_bad[i] == 1)
            throw kernel_error("negative kernel sample in row " + std::to_string(i));
        if (row_bad[i] == 2)
            throw kernel_error("kernel row " + std::to_string(i) +
                               " integrates to " + std::to_string(denom[i]) +
                               "; normalization needs a positive row integral");
    }
    double sup = 0.0;
    for (double m : row_max) sup = std::max(sup, m);
    return NormalizedKernel(P, std::move(matrix), std::move(denom), sup);
}

/// Forward application: (T f)(x_i) = sum_j ktilde(x_i, x_j) f(x_j) q_j.
/// Fixes constants and preserves nonnegativity.
inline GridFunction markov_apply(const NormalizedKernel& K, const GridDomain& dom,
                                 const GridFunction& f) {
    const std::size_t P = K.size();
    if (f.values.size() != P || dom.size() != P)
        throw precondition_error("markov_apply: size mismatch");
    const auto& q = dom.quad_weights();
    std::vector<double> g(P);
    for (std::size_t j = 0; j < P; ++j) g[j] = f.values[j] * q[j];
    GridFunction out;
    out.values.assign(P, 0.0);
    parallel_for(P, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* row = K.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < P; ++j) s += row[j] * g[j];
            out.values[i] = s;
        }
    }, 64);
    return out;
}

/// Adjoint application on measures: density rho_j = sum_i ktilde(x_i, x_j) m_i,
/// new masses rho_j q_j. Conserves total mass and preserves positivity; maps
/// probabilities to probabilities.
inline GridMeasure adjoint_apply(const NormalizedKernel& K, const GridDomain& dom,
                                 const GridMeasure& v) {
    const std::size_t P = K.size();
    if (v.masses.size() != P || dom.size() != P)
        throw precondition_error("adjoint_apply: size mismatch");
    const auto& q = dom.quad_weights();
    GridMeasure out;
    out.masses.assign(P, 0.0);
    // column bands: each worker owns a j-range and walks all rows in order,
    // so the per-entry summation order is independent of the thread count
    parallel_for(P, [&](std::size_t jlo, std::size_t jhi) {
        for (std::size_t i = 0; i < P; ++i) {
            const double mi = v.masses[i];
            if (mi == 0.0) continue;
            const double* row = K.row(i);
            for (std::size_t j = jlo; j < jhi; ++j) out.masses[j] += row[j] * mi;
        }
        for (std::size_t j = jlo; j < jhi; ++j) out.masses[j] *= q[j];
    }, 64);
    return out;
}

/// The contraction certificate: the adjoint shrinks total variation on
/// zero-mass measures by rate = ktilde_sup * total_mass / 2, provided
/// ktilde_sup stays below 2 / total_mass. Because the sup is a grid maximum,
/// "passed" additionally demands a safety margin below the threshold.
struct ContractionCertificate {
    double ktilde_sup = 0.0;
    double threshold = 0.0;
    double rate = 0.0;
    double safety_margin = 0.0;
    bool passed = false;
};

inline ContractionCertificate contraction_certificate(const NormalizedKernel& K,
                                                      const GridDomain& dom,
                                                      double safety_margin = 1e-6) {
    ContractionCertificate c;
    c.ktilde_sup = K.sup_norm();
    c.threshold = 2.0 / dom.total_mass();
    c.rate = 0.5 * c.ktilde_sup * dom.total_mass();
    c.safety_margin = safety_margin;
    c.passed = c.ktilde_sup < c.threshold - safety_margin;
    return c;
}

/// Empirical sup of TV(T* v) / TV(v) over random zero-mass v, each generated
/// as the difference of two random probability vectors. Must stay below the
/// certified rate whenever the certificate passes.
inline double observed_contraction(const NormalizedKernel& K, const GridDomain& dom, int trials,
                                   std::uint64_t seed) {
    if (trials < 1) throw precondition_error("observed_contraction needs trials >= 1");
    const std::size_t P = K.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto random_probability = [&] {
        std::vector<double> p(P);
        double s = 0.0;
        for (auto& v : p) {
            v = unif(rng);
            s += v;
        }
        for (auto& v : p) v /= s;
        return p;
    };
    double worst = 0.0;
    GridMeasure v;
    for (int t = 0; t < trials; ++t) {
        auto p = random_probability();
        auto r = random_probability();
        v.masses.resize(P);
        for (std::size_t i = 0; i < P; ++i) v.masses[i] = p[i] - r[i];
        double tv = tv_norm(v);
        if (tv == 0.0) continue;
        worst = std::max(worst, tv_norm(adjoint_apply(K, dom, v)) / tv);
    }
    return worst;
}

/// Power iteration on the adjoint with a successive-difference stopping rule.
/// rate_history holds the observed per-step contraction of iterate
/// differences; the Banach estimate residual / (1 - rate) converts the final
/// residual into a distance bound to the fixed point.
struct InvariantMeasureResult {
    GridMeasure pi;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> diff_history;
    std::vector<double> rate_history;
};

inline InvariantMeasureResult invariant_measure(const NormalizedKernel& K, const GridDomain& dom,
                                                const GridMeasure& start, double tol,
                                                long max_iter) {
    auto cert = contraction_certificate(K, dom);
    if (!cert.passed)
        throw contraction_not_certified(
            "invariant_measure: contraction certificate failed (ktilde_sup = " +
            std::to_string(cert.ktilde_sup) + " vs threshold " + std::to_string(cert.threshold) +
            "); no convergence guarantee");
    if (!is_probability(start))
        throw precondition_error("invariant_measure: start must be a probability measure");
    if (!(tol > 0.0)) throw precondition_error("invariant_measure: tol must be positive");
    if (max_iter < 1) throw precondition_error("invariant_measure: max_iter must be >= 1");

    InvariantMeasureResult out;
    GridMeasure prev = start;
    GridMeasure cur = adjoint_apply(K, dom, prev);
    out.iterations = 1;
    double diff = tv_diff(cur, prev);
    out.diff_history.push_back(diff);
    while (diff >= tol && out.iterations < max_iter) {
        GridMeasure next = adjoint_apply(K, dom, cur);
        double d2 = tv_diff(next, cur);
        if (diff > 0.0) out.rate_history.push_back(d2 / diff);
        prev = std::move(cur);
        cur = std::move(next);
        diff = d2;
        out.diff_history.push_back(diff);
        ++out.iterations;
    }
    out.converged = diff < tol;
    out.residual = tv_diff(adjoint_apply(K, dom, cur), cur);
    out.pi = std::move(cur);
    return out;
}

/// Unasserted diagnostic for the forward direction: the value spread
/// max f - min f of each iterate of T; it should shrink toward zero as T^n f
/// approaches a constant.
inline std::vector<double> forward_uniformization_diagnostic(const NormalizedKernel& K,
                                                             const GridDomain& dom,
                                                             GridFunction f, long iters) {
    std::vector<double> ranges;
    ranges.reserve(static_cast<std::size_t>(iters));
    for (long i = 0; i < iters; ++i) {
        f = markov_apply(K, dom, f);
        auto [mn, mx] = std::pair(f.values[0], f.values[0]);
        for (double v : f.values) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        ranges.push_back(mx - mn);
    }
    return ranges;
}

// --- kernels ----------------------------------------------------------------

/// sin-kernel example on [0, 2pi]: k(x, y) = sin((x + y)/4) / 4 with uniform
/// base measure; its exact row integral is cos(x/4) + sin(x/4).
struct PaperKernel {
    GridDomain domain;
    std::function<double(double, double)> kernel;
};

inline double paper_kernel_normalizer(double x) {
    return std::cos(0.25 * x) + std::sin(0.25 * x);
}

inline PaperKernel paper_kernel(std::size_t P = 2048) {
    PaperKernel pk{GridDomain::uniform(0.0, 2.0 * std::numbers::pi, P),
                   [](double x, double y) { return 0.25 * std::sin(0.25 * (x + y)); }};
    return pk;
}

inline std::function<double(double, double)> constant_kernel() {
    return [](double, double) { return 1.0; };
}

inline std::function<double(double, double)> gauss_kernel(double sigma) {
    if (!(sigma > 0.0)) throw config_error("gauss kernel needs sigma > 0");
    double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    return [inv2s2](double x, double y) { return std::exp(-(x - y) * (x - y) * inv2s2); };
}

/// Kernel tabulated as x,y,k CSV triples covering a full grid; the evaluator
/// only resolves exact grid pairs.
struct TabulatedKernel {
    GridDomain domain;
    std::function<double(double, double)> kernel;
};

inline TabulatedKernel load_tabulated_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open kernel table " + path);
    std::vector<std::array<double, 3>> triples;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw config_error("kernel table " + path + ": need x,y,k per line");
        try {
            triples.push_back({std::stod(a), std::stod(b), std::stod(c)});
        } catch (const std::exception&) {
            if (first) {
                first = false;  // header row
                continue;
            }
            throw config_error("kernel table " + path + ": bad number in line '" + line + "'");
        }
        first = false;
    }
    if (triples.empty()) throw config_error("kernel table " + path + " is empty");

    std::vector<double> xs;
    for (const auto& t : triples) xs.push_back(t[0]);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    const std::size_t P = xs.size();
    if (triples.size() != P * P)
        throw config_error("kernel table " + path + ": expected full " + std::to_string(P) + "x" +
                           std::to_string(P) + " coverage, got " + std::to_string(triples.size()) +
                           " triples");

    auto index_of = [xs](double v) -> std::size_t {
        auto it = std::lower_bound(xs.begin(), xs.end(), v - 1e-9);
        if (it == xs.end() || std::abs(*it - v) > 1e-9 * (1.0 + std::abs(v)))
            throw config_error("kernel table lookup off-grid at " + std::to_string(v));
        return static_cast<std::size_t>(it - xs.begin());
    };

    auto values = std::make_shared<std::vector<double>>(P * P,
                                                        std::numeric_limits<double>::quiet_NaN());
    for (const auto& t : triples) {
        std::size_t i = index_of(t[0]);
        std::size_t j = index_of(t[1]);
        (*values)[i * P + j] = t[2];
    }
    for (double v : *values)
        if (std::isnan(v)) throw config_error("kernel table " + path + ": grid pair missing");

    TabulatedKernel out{GridDomain::from_points(xs),
                        [values, index_of, P](double x, double y) {
                            return (*values)[index_of(x) * P + index_of(y)];
                        }};
    return out;
}

/// Preset grammar: "paper-sine" | "constant" | "gauss:sigma" | "table:path".
/// paper-sine fixes the domain to [0, 2pi]; the others take it from config.
struct KernelPreset {
    std::string name;
    std::function<double(double, double)> k;
    std::optional<std::pair<double, double>> fixed_domain;
    std::optional<GridDomain> fixed_grid;  // tabulated kernels pin the grid
};

inline KernelPreset parse_kernel_preset(const std::string& preset) {
    if (preset == "paper-sine") {
        KernelPreset p{preset, [](double x, double y) { return 0.25 * std::sin(0.25 * (x + y)); },
                       std::pair{0.0, 2.0 * std::numbers::pi}, std::nullopt};
        return p;
    }
    if (preset == "constant") return {preset, constant_kernel(), std::nullopt, std::nullopt};
    auto colon = preset.find(':');
    std::string head = preset.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : preset.substr(colon + 1);
    if (head == "gauss") {
        try {
            std::size_t pos = 0;
            double sigma = std::stod(arg, &pos);
            if (pos != arg.size()) throw std::invalid_argument(arg);
            return {preset, gauss_kernel(sigma), std::nullopt, std::nullopt};
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("bad sigma in kernel preset '" + preset + "'");
        }
    }
    if (head == "table") {
        auto tab = load_tabulated_kernel(arg);
        return {preset, tab.kernel, std::nullopt, std::move(tab.domain)};
    }
    throw config_error("unknown kernel preset '" + preset + "'");
}

// --- serialization -----------------------------------------------------------

inline nlohmann::json to_json(const ContractionCertificate& c) {
    return {{"ktilde_sup", c.ktilde_sup}, {"threshold", c.threshold},     {"rate", c.rate},
            {"safety_margin", c.safety_margin}, {"passed", c.passed}};
}

/// Invariant measure CSV: node, point mass, density against the base measure.
inline std::string invariant_measure_csv(const GridDomain& dom, const GridMeasure& pi) {
    std::string out = "x,mass,density\n";
    const auto& x = dom.points();
    const auto& q = dom.quad_weights();
    for (std::size_t i = 0; i < dom.size(); ++i) {
        out += double_to_string(x[i]);
        out += ',';
        out += double_to_string(pi.masses[i]);
        out += ',';
        out += double_to_string(pi.masses[i] / q[i]);
        out += '\n';
    }
    return out;
}

}  // namespace measure_dyn

#endif
