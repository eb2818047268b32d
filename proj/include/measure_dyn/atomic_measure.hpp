#ifndef MEASURE_DYN_ATOMIC_MEASURE_HPP
#define MEASURE_DYN_ATOMIC_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

#include "measure_dyn/errors.hpp"

namespace measure_dyn {

using cplx = std::complex<double>;

struct Atom {
    double x;
    cplx w;
};

/// A finitely supported complex measure on the real line.
///
/// Canonical form: atoms sorted by location, locations pairwise farther apart
/// than merge_tolerance, no weight of modulus below zero_weight_threshold.
/// Values are immutable after construction; every operation returns a fresh
/// measure, so instances can be shared freely across threads.
class AtomicMeasure {
public:
    static constexpr double default_merge_tolerance = 1e-12;
    // Measure-zero threshold: weights below this are dropped during
    // canonicalization so repeated arithmetic cannot accumulate denormals.
    static constexpr double zero_weight_threshold = 1e-300;

    AtomicMeasure() = default;

    explicit AtomicMeasure(std::vector<Atom> atoms,
                           double merge_tolerance = default_merge_tolerance)
        : atoms_(std::move(atoms)), tol_(merge_tolerance) {
        canonicalize();
    }

    AtomicMeasure(std::initializer_list<Atom> atoms)
        : AtomicMeasure(std::vector<Atom>(atoms)) {}

    static AtomicMeasure dirac(double x, cplx w = cplx(1.0, 0.0),
                               double merge_tolerance = default_merge_tolerance) {
        return AtomicMeasure({{x, w}}, merge_tolerance);
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    double merge_tolerance() const { return tol_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    double min_location() const { return atoms_.front().x; }
    double max_location() const { return atoms_.back().x; }

    /// Pre-sorted, pairwise-separated atoms only. Used by maps that must keep
    /// weights bit-exact; throws collision_error instead of merging.
    static AtomicMeasure from_mapped_atoms(std::vector<Atom> atoms, double merge_tolerance) {
        std::sort(atoms.begin(), atoms.end(), atom_less);
        for (std::size_t i = 1; i < atoms.size(); ++i) {
            if (atoms[i].x - atoms[i - 1].x <= merge_tolerance)
                throw collision_error("image atoms collide at x = " +
                                      std::to_string(atoms[i].x) +
                                      " within merge tolerance; map not injective at this resolution");
        }
        AtomicMeasure m;
        m.tol_ = merge_tolerance;
        for (auto& a : atoms) {
            if (std::abs(a.w) < zero_weight_threshold) continue;
            m.atoms_.push_back({a.x, scrub_zero(a.w)});
        }
        return m;
    }

private:
    static bool atom_less(const Atom& a, const Atom& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.w.real() != b.w.real()) return a.w.real() < b.w.real();
        return a.w.imag() < b.w.imag();
    }

    static cplx scrub_zero(cplx w) {
        // normalize -0 components so recombination identities hold bitwise
        double re = w.real(), im = w.imag();
        if (re == 0.0) re = 0.0;
        if (im == 0.0) im = 0.0;
        return {re, im};
    }

    void canonicalize() {
        std::sort(atoms_.begin(), atoms_.end(), atom_less);
        std::vector<Atom> out;
        out.reserve(atoms_.size());
        std::size_t i = 0, n = atoms_.size();
        while (i < n) {
            double x0 = atoms_[i].x;
            cplx w = atoms_[i].w;
            std::size_t j = i + 1;
            while (j < n && atoms_[j].x - atoms_[j - 1].x <= tol_) {
                w += atoms_[j].w;
                ++j;
            }
            if (std::abs(w) >= zero_weight_threshold) out.push_back({x0, scrub_zero(w)});
            i = j;
        }
        atoms_ = std::move(out);
    }

    std::vector<Atom> atoms_;
    double tol_ = default_merge_tolerance;
};

/// Total variation norm: the sum of weight moduli (the partition supremum is
/// attained by singletons for an atomic measure).
inline double tv_norm(const AtomicMeasure& m) {
    double s = 0.0;
    for (const auto& a : m.atoms()) s += std::abs(a.w);
    return s;
}

inline AtomicMeasure add(const AtomicMeasure& m1, const AtomicMeasure& m2) {
    std::vector<Atom> atoms;
    atoms.reserve(m1.size() + m2.size());
    atoms.insert(atoms.end(), m1.atoms().begin(), m1.atoms().end());
    atoms.insert(atoms.end(), m2.atoms().begin(), m2.atoms().end());
    return AtomicMeasure(std::move(atoms), std::max(m1.merge_tolerance(), m2.merge_tolerance()));
}

inline AtomicMeasure scale(const AtomicMeasure& m, cplx c) {
    std::vector<Atom> atoms = m.atoms();
    for (auto& a : atoms) a.w *= c;
    return AtomicMeasure(std::move(atoms), m.merge_tolerance());
}

/// Pushforward along an injective map: atom (x, w) goes to (f(x), w) with the
/// weight untouched, so the total variation is preserved exactly. Throws
/// collision_error if two distinct images land within the merge tolerance.
template <class F>
AtomicMeasure pushforward(const AtomicMeasure& m, F&& f) {
    std::vector<Atom> atoms;
    atoms.reserve(m.size());
    for (const auto& a : m.atoms()) atoms.push_back({f(a.x), a.w});
    return AtomicMeasure::from_mapped_atoms(std::move(atoms), m.merge_tolerance());
}

/// Restriction to {t : keep(t)}. Complementary restrictions add back to the
/// original measure atom-for-atom.
template <class P>
AtomicMeasure restrict(const AtomicMeasure& m, P&& keep) {
    std::vector<Atom> atoms;
    for (const auto& a : m.atoms())
        if (keep(a.x)) atoms.push_back(a);
    return AtomicMeasure::from_mapped_atoms(std::move(atoms), m.merge_tolerance());
}

/// Duality pairing <m, f> = sum_i w_i f(x_i).
template <class F>
cplx pair(const AtomicMeasure& m, F&& f) {
    cplx s(0.0, 0.0);
    for (const auto& a : m.atoms()) s += a.w * cplx(f(a.x));
    return s;
}

/// The four mutually singular nonnegative parts of a complex measure:
/// m = p1_plus - p1_minus + i p2_plus - i p2_minus, exactly, atom by atom.
struct JordanParts {
    AtomicMeasure p1_plus, p1_minus, p2_plus, p2_minus;
};

inline JordanParts jordan_decompose(const AtomicMeasure& m) {
    std::vector<Atom> rp, rm, ip, im;
    for (const auto& a : m.atoms()) {
        double re = a.w.real(), imag = a.w.imag();
        if (re > 0) rp.push_back({a.x, {re, 0.0}});
        if (re < 0) rm.push_back({a.x, {-re, 0.0}});
        if (imag > 0) ip.push_back({a.x, {imag, 0.0}});
        if (imag < 0) im.push_back({a.x, {-imag, 0.0}});
    }
    double tol = m.merge_tolerance();
    return {AtomicMeasure(std::move(rp), tol), AtomicMeasure(std::move(rm), tol),
            AtomicMeasure(std::move(ip), tol), AtomicMeasure(std::move(im), tol)};
}

inline AtomicMeasure jordan_recombine(const JordanParts& p) {
    return add(add(p.p1_plus, scale(p.p1_minus, cplx(-1.0, 0.0))),
               add(scale(p.p2_plus, cplx(0.0, 1.0)), scale(p.p2_minus, cplx(0.0, -1.0))));
}

// JSON wire format: array of {"x", "re", "im"} records sorted by x.
inline nlohmann::json to_json(const AtomicMeasure& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : m.atoms())
        arr.push_back({{"x", a.x}, {"re", a.w.real()}, {"im", a.w.imag()}});
    return arr;
}

inline AtomicMeasure measure_from_json(const nlohmann::json& j,
                                       double merge_tolerance = AtomicMeasure::default_merge_tolerance) {
    if (!j.is_array()) throw config_error("measure JSON must be an array of {x, re, im} records");
    std::vector<Atom> atoms;
    for (const auto& rec : j) {
        if (!rec.contains("x") || !rec.contains("re"))
            throw config_error("measure record needs at least \"x\" and \"re\"");
        double im = rec.value("im", 0.0);
        atoms.push_back({rec.at("x").get<double>(), cplx(rec.at("re").get<double>(), im)});
    }
    return AtomicMeasure(std::move(atoms), merge_tolerance);
}

}  // namespace measure_dyn

#endif
