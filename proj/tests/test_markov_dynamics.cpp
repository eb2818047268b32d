#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "measure_dyn/markov_dynamics.hpp"
#include "test_support.hpp"

using namespace measure_dyn;

namespace {

GridMeasure random_zero_mass(std::mt19937_64& rng, std::size_t P) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> p(P), q(P);
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < P; ++i) {
        p[i] = unif(rng);
        sp += p[i];
        q[i] = unif(rng);
        sq += q[i];
    }
    GridMeasure v;
    v.masses.resize(P);
    for (std::size_t i = 0; i < P; ++i) v.masses[i] = p[i] / sp - q[i] / sq;
    return v;
}

GridFunction random_function(std::mt19937_64& rng, std::size_t P) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    GridFunction f;
    f.values.resize(P);
    for (auto& v : f.values) v = unif(rng);
    return f;
}

}  // namespace

TEST_CASE("grid domain") {
    auto dom = GridDomain::uniform(0.0, 2.0 * std::numbers::pi, 2048);
    CHECK(dom.size() == 2048);
    CHECK(std::abs(dom.total_mass() - 2.0 * std::numbers::pi) <= 1e-12 * 2.0 * std::numbers::pi);
    for (double q : dom.quad_weights()) CHECK(q > 0.0);
    CHECK(dom.points().front() == 0.0);
    CHECK(dom.points().back() == 2.0 * std::numbers::pi);

    auto nu = GridDomain::from_points({0.0, 0.1, 0.4, 1.0});
    CHECK(nu.quad_weights()[0] == Catch::Approx(0.05));
    CHECK(nu.quad_weights()[1] == Catch::Approx(0.2));
    CHECK(nu.quad_weights()[3] == Catch::Approx(0.3));
    CHECK(nu.total_mass() == Catch::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(GridDomain::uniform(1.0, 0.0, 16), precondition_error);
    CHECK_THROWS_AS(GridDomain::from_points({0.0, 0.0, 1.0}), precondition_error);
}

TEST_CASE("grid measures and functions") {
    auto dom = GridDomain::uniform(0.0, 1.0, 513);
    auto base = uniform_probability(dom);
    CHECK(is_probability(base));
    CHECK(total_mass(base) == Catch::Approx(1.0).margin(1e-14));

    CHECK(thompson_norm(constant_function(dom, 1.0)) == 1.0);
    CHECK(thompson_norm(GridFunction{std::vector<double>{0.0, 0.0}}) == 0.0);
    CHECK(thompson_norm(GridFunction{std::vector<double>{3.0, -5.0}}) == 5.0);

    SECTION("hilbert dual norm") {
        GridMeasure v{{1.0, -1.0, 0.0}};
        CHECK(hilbert_dual_norm(v) == 1.0);
        CHECK(hilbert_dual_norm(GridMeasure{{0.0, 0.0}}) == 0.0);
        auto rng = mdtest::seeded_rng(31);
        auto z = random_zero_mass(rng, 64);
        CHECK(hilbert_dual_norm(z) == 0.5 * tv_norm(z));
        CHECK_THROWS_AS(hilbert_dual_norm(GridMeasure{{1.0, 1.0}}), precondition_error);
    }
    SECTION("point mass snapping") {
        auto pm = point_mass(dom, 0.50001);
        CHECK(pm.measure.masses[pm.index] == 1.0);
        CHECK(pm.snap_distance <= 0.5 / 512.0);
        CHECK(dom.points()[pm.index] == Catch::Approx(0.5).margin(1e-3));
        auto exact = point_mass(dom, dom.points()[17]);
        CHECK(exact.index == 17);
        CHECK(exact.snap_distance == 0.0);
    }
}

TEST_CASE("kernel normalization") {
    SECTION("constant kernel on a dyadic grid is exactly flat") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto K = normalize_kernel(dom, constant_kernel());
        CHECK(K.sup_norm() == 1.0);
        for (std::size_t i : {std::size_t{0}, std::size_t{256}, std::size_t{512}})
            for (std::size_t j : {std::size_t{0}, std::size_t{100}, std::size_t{512}})
                CHECK(K.at(i, j) == 1.0);
    }
    SECTION("rows integrate to one") {
        auto pk = paper_kernel(2048);
        auto K = normalize_kernel(pk.domain, pk.kernel);
        const auto& q = pk.domain.quad_weights();
        double worst = 0.0;
        for (std::size_t i = 0; i < K.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < K.size(); ++j) s += K.at(i, j) * q[j];
            worst = std::max(worst, std::abs(s - 1.0));
        }
        CHECK(worst <= 1e-12);
    }
    SECTION("gaussian rows integrate to one") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto K = normalize_kernel(dom, [](double x, double y) { return std::exp(-(x - y) * (x - y)); });
        const auto& q = dom.quad_weights();
        for (std::size_t i = 0; i < K.size(); i += 64) {
            double s = 0.0;
            for (std::size_t j = 0; j < K.size(); ++j) s += K.at(i, j) * q[j];
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
    SECTION("negative samples and vanishing rows are rejected") {
        auto dom = GridDomain::uniform(0.0, 1.0, 17);
        CHECK_THROWS_AS(normalize_kernel(dom, [](double x, double y) { return x - y; }),
                        kernel_error);
        CHECK_THROWS_AS(normalize_kernel(dom, [](double, double) { return 0.0; }), kernel_error);
    }
}

TEST_CASE("markov apply") {
    auto pk = paper_kernel(2048);
    auto K = normalize_kernel(pk.domain, pk.kernel);

    SECTION("fixes constants") {
        auto one = markov_apply(K, pk.domain, constant_function(pk.domain, 1.0));
        for (std::size_t i = 0; i < one.values.size(); i += 97)
            CHECK(std::abs(one.values[i] - 1.0) <= 1e-12);
        auto c = markov_apply(K, pk.domain, constant_function(pk.domain, 3.75));
        CHECK(std::abs(c.values[1000] - 3.75) <= 1e-11);
    }
    SECTION("row check against the closed-form integral at x = 0") {
        // int_0^{2pi} (1/4) sin^2(y/4) dy = pi/4, and the denominator at 0 is 1
        auto f = sample_function(pk.domain, [](double y) { return std::sin(0.25 * y); });
        auto Tf = markov_apply(K, pk.domain, f);
        CHECK(std::abs(Tf.values[0] - std::numbers::pi / 4.0) < 1e-5);
    }
    SECTION("positivity") {
        auto rng = mdtest::seeded_rng(32);
        auto f = random_function(rng, pk.domain.size());
        for (auto& v : f.values) v = std::abs(v);
        auto Tf = markov_apply(K, pk.domain, f);
        for (std::size_t i = 0; i < Tf.values.size(); i += 131) CHECK(Tf.values[i] >= 0.0);
    }
}

TEST_CASE("adjoint apply") {
    auto dom = GridDomain::uniform(0.0, 1.0, 257);
    auto K = normalize_kernel(dom, gauss_kernel(0.7));

    SECTION("point mass extracts a weighted row") {
        auto pm = point_mass(dom, dom.points()[41]);
        auto out = adjoint_apply(K, dom, pm.measure);
        const auto& q = dom.quad_weights();
        for (std::size_t j = 0; j < dom.size(); j += 17)
            CHECK(out.masses[j] == Catch::Approx(K.at(41, j) * q[j]).epsilon(1e-14));
        CHECK(std::abs(total_mass(out) - 1.0) <= 1e-12);
        CHECK(is_probability(out));
    }
    SECTION("zero maps to zero") {
        GridMeasure z{std::vector<double>(dom.size(), 0.0)};
        auto out = adjoint_apply(K, dom, z);
        CHECK(tv_norm(out) == 0.0);
    }
    SECTION("discrete duality and mass conservation") {
        auto rng = mdtest::seeded_rng(33);
        for (int c = 0; c < 100; ++c) {
            auto v = random_zero_mass(rng, dom.size());
            auto f = random_function(rng, dom.size());
            double lhs = pair(adjoint_apply(K, dom, v), f);
            double rhs = pair(v, markov_apply(K, dom, f));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
            CHECK(std::abs(total_mass(adjoint_apply(K, dom, v)) - total_mass(v)) <= 1e-12);
        }
    }
}

TEST_CASE("contraction certificate") {
    SECTION("sine kernel example") {
        auto pk = paper_kernel(2048);
        auto K = normalize_kernel(pk.domain, pk.kernel);
        auto cert = contraction_certificate(K, pk.domain);
        CHECK(cert.passed);
        // grid max carries the O(h^2) quadrature bias of the row integrals,
        // so it may sit a hair above the analytic bound 1/4
        CHECK(cert.ktilde_sup >= 0.25 - 1e-12);
        CHECK(cert.ktilde_sup <= 0.25 * (1.0 + 1e-6));
        CHECK(cert.threshold == Catch::Approx(1.0 / std::numbers::pi).epsilon(1e-13));
        CHECK(cert.rate <= std::numbers::pi / 4.0 + 1e-6);
        CHECK(cert.rate >= std::numbers::pi / 4.0 - 1e-6);
    }
    SECTION("constant kernel") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto cert = contraction_certificate(normalize_kernel(dom, constant_kernel()), dom);
        CHECK(cert.ktilde_sup == 1.0);
        CHECK(cert.threshold == 2.0);
        CHECK(cert.rate == 0.5);
        CHECK(cert.passed);
    }
    SECTION("near-diagonal kernel fails") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto cert = contraction_certificate(normalize_kernel(dom, gauss_kernel(0.02)), dom);
        CHECK_FALSE(cert.passed);
        CHECK(cert.rate > 1.0);
    }
}

TEST_CASE("observed contraction") {
    SECTION("averaging kernel annihilates zero-mass measures") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto K = normalize_kernel(dom, constant_kernel());
        CHECK(observed_contraction(K, dom, 50, 7) <= 1e-13);
    }
    SECTION("stays within the certified rate") {
        auto pk = paper_kernel(512);
        auto K = normalize_kernel(pk.domain, pk.kernel);
        auto cert = contraction_certificate(K, pk.domain);
        CHECK(observed_contraction(K, pk.domain, 200, 7) <= cert.rate + 1e-9);
    }
    SECTION("a failing kernel can be nearly isometric") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto K = normalize_kernel(dom, gauss_kernel(0.01));
        CHECK_FALSE(contraction_certificate(K, dom).passed);
        // dipole of two far-apart point masses barely contracts
        GridMeasure dip{std::vector<double>(dom.size(), 0.0)};
        dip.masses[10] = 1.0;
        dip.masses[500] = -1.0;
        double ratio = tv_norm(adjoint_apply(K, dom, dip)) / tv_norm(dip);
        CHECK(ratio > 0.99);
    }
}

TEST_CASE("invariant measure") {
    SECTION("averaging kernel lands on the base measure after one step") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto K = normalize_kernel(dom, constant_kernel());
        auto pm = point_mass(dom, 0.123);
        auto res = invariant_measure(K, dom, pm.measure, 1e-12, 50);
        CHECK(res.converged);
        CHECK(res.iterations <= 2);
        auto base = uniform_probability(dom);
        CHECK(tv_diff(res.pi, base) <= 1e-13);
    }
    SECTION("sine kernel converges within the geometric budget") {
        auto pk = paper_kernel(2048);
        auto K = normalize_kernel(pk.domain, pk.kernel);
        auto cert = contraction_certificate(K, pk.domain);
        long budget = static_cast<long>(
            std::ceil(std::log(1e-10 / 2.0) / std::log(std::numbers::pi / 4.0)));
        auto from_uniform = invariant_measure(K, pk.domain, uniform_probability(pk.domain), 1e-10,
                                              10000);
        auto from_point = invariant_measure(K, pk.domain, point_mass(pk.domain, 0.0).measure,
                                            1e-10, 10000);
        CHECK(from_uniform.converged);
        CHECK(from_point.converged);
        CHECK(from_uniform.iterations <= budget);
        CHECK(from_point.iterations <= budget);
        CHECK(tv_diff(from_uniform.pi, from_point.pi) <= 1e-9);
        CHECK(tv_diff(from_uniform.pi, from_point.pi) <= 2.0 * 1e-10 / (1.0 - cert.rate));
        CHECK(is_probability(from_uniform.pi, 1e-11));
        for (double r : from_uniform.rate_history) CHECK(r <= cert.rate + 1e-9);
        for (double r : from_point.rate_history) CHECK(r <= cert.rate + 1e-9);
        CHECK(from_uniform.residual < 1e-10 * (1.0 + cert.rate) / (1.0 - cert.rate));
        // a-posteriori geometric envelope on the recorded iterate differences
        for (const auto* run : {&from_uniform, &from_point}) {
            double envelope = run->diff_history.front();
            for (std::size_t k = 1; k < run->diff_history.size(); ++k) {
                envelope *= cert.rate + 1e-9;
                CHECK(run->diff_history[k] <= envelope);
            }
        }
    }
    SECTION("refuses without a passing certificate") {
        auto dom = GridDomain::uniform(0.0, 1.0, 513);
        auto K = normalize_kernel(dom, gauss_kernel(0.02));
        CHECK_THROWS_AS(invariant_measure(K, dom, uniform_probability(dom), 1e-8, 100),
                        contraction_not_certified);
    }
    SECTION("refuses a non-probability start") {
        auto dom = GridDomain::uniform(0.0, 1.0, 65);
        auto K = normalize_kernel(dom, constant_kernel());
        GridMeasure bad{std::vector<double>(dom.size(), 0.0)};
        bad.masses[0] = 2.0;
        CHECK_THROWS_AS(invariant_measure(K, dom, bad, 1e-8, 100), precondition_error);
    }
    SECTION("reports non-convergence when the budget is too small") {
        auto dom = GridDomain::uniform(0.0, 1.0, 257);
        auto K = normalize_kernel(dom, gauss_kernel(1.0));
        auto res = invariant_measure(K, dom, point_mass(dom, 0.0).measure, 1e-16, 3);
        CHECK_FALSE(res.converged);
        CHECK(res.residual > 0.0);
    }
}

TEST_CASE("sine kernel example data") {
    auto pk = paper_kernel(2048);
    auto K = normalize_kernel(pk.domain, pk.kernel);

    SECTION("denominators track the analytic normalizer") {
        CHECK(paper_kernel_normalizer(0.0) == 1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < pk.domain.size(); ++i) {
            double analytic = paper_kernel_normalizer(pk.domain.points()[i]);
            CHECK(analytic >= 1.0 - 1e-12);
            worst = std::max(worst, std::abs(K.denominators()[i] - analytic));
        }
        CHECK(worst < 1e-5);
        for (std::size_t i = 0; i < pk.domain.size(); i += 211)
            CHECK(K.denominators()[i] >= 1.0 - 1e-5);
    }
    SECTION("endpoint evaluation") {
        double tp = 2.0 * std::numbers::pi;
        CHECK(std::abs(pk.kernel(tp, tp)) <= 1e-15);
    }
    SECTION("forward iterates flatten toward a constant") {
        auto ranges = forward_uniformization_diagnostic(
            K, pk.domain, sample_function(pk.domain, [](double t) { return t; }), 12);
        for (std::size_t i = 1; i < ranges.size(); ++i) CHECK(ranges[i] <= ranges[i - 1] + 1e-12);
        CHECK(ranges.back() < 1e-5);
    }
}

TEST_CASE("tabulated kernel loader") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "measure_dyn_table_test";
    fs::create_directories(dir);
    auto path = (dir / "k.csv").string();

    SECTION("loads a full grid") {
        std::ofstream out(path);
        out << "x,y,k\n";
        for (double x : {0.0, 0.5, 1.0})
            for (double y : {0.0, 0.5, 1.0}) out << x << ',' << y << ',' << 1.0 + x * y << '\n';
        out.close();
        auto tab = load_tabulated_kernel(path);
        CHECK(tab.domain.size() == 3);
        CHECK(tab.kernel(0.5, 1.0) == 1.5);
        auto K = normalize_kernel(tab.domain, tab.kernel);
        const auto& q = tab.domain.quad_weights();
        for (std::size_t i = 0; i < 3; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 3; ++j) s += K.at(i, j) * q[j];
            CHECK(std::abs(s - 1.0) <= 1e-14);
        }
    }
    SECTION("rejects incomplete tables") {
        std::ofstream out(path);
        out << "0,0,1\n0,1,1\n1,0,1\n";  // missing (1,1)
        out.close();
        CHECK_THROWS_AS(load_tabulated_kernel(path), config_error);
    }
    SECTION("kernel preset grammar") {
        CHECK(parse_kernel_preset("paper-sine").fixed_domain.has_value());
        CHECK(parse_kernel_preset("constant").k(0.3, 0.9) == 1.0);
        CHECK(parse_kernel_preset("gauss:0.5").k(0.0, 0.0) == 1.0);
        CHECK_THROWS_AS(parse_kernel_preset("gauss:abc"), config_error);
        CHECK_THROWS_AS(parse_kernel_preset("what"), config_error);
    }
}
