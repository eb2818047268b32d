#ifndef MEASURE_DYN_WEIGHT_SYSTEM_HPP
#define MEASURE_DYN_WEIGHT_SYSTEM_HPP

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "measure_dyn/errors.hpp"

namespace measure_dyn {

/// The dynamical data of a weighted composition system: an invertible map of
/// the line, a positive bounded weight, and sup bounds for w and 1/w.
struct WeightSystem {
    std::function<double(double)> alpha;
    std::function<double(double)> alpha_inv;
    std::function<double(double)> w;
    double w_sup = 1.0;
    double w_inv_sup = 1.0;
    std::string name = "custom";
};

/// A compact interval [lo, hi] together with the uniform sample count used to
/// approximate suprema over it.
struct CompactWindow {
    double lo;
    double hi;
    long grid_points = 4001;

    std::vector<double> grid() const {
        if (!(lo < hi)) throw precondition_error("window needs lo < hi");
        if (grid_points < 2) throw precondition_error("window needs at least 2 grid points");
        std::vector<double> g(static_cast<std::size_t>(grid_points));
        double h = (hi - lo) / static_cast<double>(grid_points - 1);
        for (long i = 0; i < grid_points; ++i) g[static_cast<std::size_t>(i)] = lo + static_cast<double>(i) * h;
        g.back() = hi;
        return g;
    }
};

inline double iterate_alpha(const WeightSystem& ws, double t, long n) {
    for (long j = 0; j < n; ++j) t = ws.alpha(t);
    return t;
}

inline double iterate_alpha_inv(const WeightSystem& ws, double t, long n) {
    for (long j = 0; j < n; ++j) t = ws.alpha_inv(t);
    return t;
}

/// Sampled sanity checks for a window about to be scanned: alpha_inv really
/// inverts alpha and w stays inside its declared bounds.
inline void validate_on_window(const WeightSystem& ws, const CompactWindow& K) {
    const long samples = std::min<long>(K.grid_points, 257);
    double h = (K.hi - K.lo) / static_cast<double>(samples - 1);
    for (long i = 0; i < samples; ++i) {
        double t = K.lo + static_cast<double>(i) * h;
        if (std::abs(ws.alpha_inv(ws.alpha(t)) - t) > 1e-9)
            throw precondition_error("alpha_inv does not invert alpha at t = " + std::to_string(t));
        double wt = ws.w(t);
        if (!(wt > 0.0)) throw precondition_error("weight not positive at t = " + std::to_string(t));
        if (wt > ws.w_sup * (1.0 + 1e-12))
            throw precondition_error("weight exceeds declared w_sup at t = " + std::to_string(t));
        if (wt < (1.0 / ws.w_inv_sup) * (1.0 - 1e-12))
            throw precondition_error("weight below declared 1/w_inv_sup at t = " + std::to_string(t));
    }
}

/// w = 2 left of -1, 1/2 right of +1, affine across [-1, 1]; alpha(t) = t + 1.
inline WeightSystem paper_weight() {
    WeightSystem ws;
    ws.alpha = [](double t) { return t + 1.0; };
    ws.alpha_inv = [](double t) { return t - 1.0; };
    ws.w = [](double t) {
        if (t <= -1.0) return 2.0;
        if (t >= 1.0) return 0.5;
        return 1.25 - 0.75 * t;
    };
    ws.w_sup = 2.0;
    ws.w_inv_sup = 2.0;
    ws.name = "paper";
    return ws;
}

inline WeightSystem constant_weight(double c) {
    if (!(c > 0.0)) throw config_error("constant weight must be positive");
    WeightSystem ws;
    ws.alpha = [](double t) { return t + 1.0; };
    ws.alpha_inv = [](double t) { return t - 1.0; };
    ws.w = [c](double) { return c; };
    ws.w_sup = c;
    ws.w_inv_sup = 1.0 / c;
    ws.name = "constant:" + std::to_string(c);
    return ws;
}

/// Two-level family: a value in [1+eps, M] left of -K1, a value in
/// [1/M, 1-eps] right of K2, affine between. Concretely the midpoints of the
/// two admissible ranges are used.
inline WeightSystem two_sided_weight(double M, double eps, double K1, double K2) {
    if (!(M > 0.0 && eps > 0.0 && K1 > 0.0 && K2 > 0.0))
        throw config_error("two-sided weight needs M, eps, K1, K2 > 0");
    if (!(1.0 + eps < M)) throw config_error("two-sided weight needs 1 + eps < M");
    if (!(1.0 - eps > 1.0 / M)) throw config_error("two-sided weight needs 1 - eps > 1/M");
    const double high = 0.5 * ((1.0 + eps) + M);
    const double low = 0.5 * ((1.0 / M) + (1.0 - eps));
    WeightSystem ws;
    ws.alpha = [](double t) { return t + 1.0; };
    ws.alpha_inv = [](double t) { return t - 1.0; };
    ws.w = [high, low, K1, K2](double t) {
        if (t <= -K1) return high;
        if (t >= K2) return low;
        double s = (t + K1) / (K2 + K1);  // 0 at -K1, 1 at K2
        return high + s * (low - high);
    };
    ws.w_sup = high;
    ws.w_inv_sup = 1.0 / low;
    ws.name = "two-sided";
    return ws;
}

/// Preset grammar: "paper" | "constant:c" | "two-sided:M,eps,K1,K2".
inline WeightSystem parse_weight_system(const std::string& preset) {
    if (preset == "paper") return paper_weight();
    auto colon = preset.find(':');
    std::string head = preset.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : preset.substr(colon + 1);
    auto parse_numbers = [&](std::size_t expected) {
        std::vector<double> out;
        std::stringstream ss(args);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw config_error("bad number '" + tok + "' in weight preset '" + preset + "'");
            }
        }
        if (out.size() != expected)
            throw config_error("weight preset '" + preset + "' expects " + std::to_string(expected) +
                               " parameter(s)");
        return out;
    };
    if (head == "constant") {
        auto p = parse_numbers(1);
        return constant_weight(p[0]);
    }
    if (head == "two-sided") {
        auto p = parse_numbers(4);
        return two_sided_weight(p[0], p[1], p[2], p[3]);
    }
    throw config_error("unknown weight preset '" + preset + "'");
}

}  // namespace measure_dyn

#endif
