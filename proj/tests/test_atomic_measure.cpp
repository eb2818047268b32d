#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "measure_dyn/atomic_measure.hpp"
#include "test_support.hpp"

using namespace measure_dyn;
using mdtest::atoms_close;
using mdtest::atoms_equal_exact;

TEST_CASE("tv_norm on atomic measures") {
    CHECK(tv_norm(AtomicMeasure{}) == 0.0);

    AtomicMeasure m({{0.0, {3.0, 0.0}}, {1.0, {0.0, -4.0}}});
    CHECK(tv_norm(m) == 7.0);

    AtomicMeasure one({{0.0, {3.0, 4.0}}});
    CHECK(tv_norm(one) == 5.0);
    CHECK(mdtest::partition_tv_oracle(one) == 5.0);
}

TEST_CASE("canonical form") {
    SECTION("atoms within tolerance merge") {
        AtomicMeasure m({{0.0, {1.0, 0.0}}, {1e-13, {2.0, 0.0}}});
        REQUIRE(m.size() == 1);
        CHECK(m.atoms()[0].w == cplx(3.0, 0.0));
    }
    SECTION("exact cancellation drops the atom") {
        auto m = add(AtomicMeasure::dirac(0.0), scale(AtomicMeasure::dirac(0.0), {-1.0, 0.0}));
        CHECK(m.empty());
    }
    SECTION("atoms are sorted by location") {
        AtomicMeasure m({{3.0, {1.0, 0.0}}, {-1.0, {1.0, 0.0}}, {0.5, {1.0, 0.0}}});
        REQUIRE(m.size() == 3);
        CHECK(m.atoms()[0].x == -1.0);
        CHECK(m.atoms()[2].x == 3.0);
    }
    SECTION("idempotence on random inputs") {
        auto rng = mdtest::seeded_rng(101);
        for (int c = 0; c < 1000; ++c) {
            auto m = mdtest::random_measure(rng, 10, -2.0, 2.0);
            AtomicMeasure again(std::vector<Atom>(m.atoms()), m.merge_tolerance());
            CHECK(atoms_equal_exact(m, again));
        }
    }
}

TEST_CASE("jordan decomposition") {
    SECTION("positive real atom") {
        auto p = jordan_decompose(AtomicMeasure::dirac(0.0, {5.0, 0.0}));
        REQUIRE(p.p1_plus.size() == 1);
        CHECK(p.p1_plus.atoms()[0].w == cplx(5.0, 0.0));
        CHECK(p.p1_minus.empty());
        CHECK(p.p2_plus.empty());
        CHECK(p.p2_minus.empty());
    }
    SECTION("sign split") {
        auto p = jordan_decompose(AtomicMeasure({{0.0, {-2.0, 0.0}}, {1.0, {0.0, 3.0}}}));
        REQUIRE(p.p1_minus.size() == 1);
        CHECK(p.p1_minus.atoms()[0].w == cplx(2.0, 0.0));
        REQUIRE(p.p2_plus.size() == 1);
        CHECK(p.p2_plus.atoms()[0].x == 1.0);
        CHECK(p.p2_plus.atoms()[0].w == cplx(3.0, 0.0));
        CHECK(p.p1_plus.empty());
        CHECK(p.p2_minus.empty());
    }
    SECTION("componentwise split") {
        auto p = jordan_decompose(AtomicMeasure::dirac(0.0, {1.0, -2.0}));
        REQUIRE(p.p1_plus.size() == 1);
        CHECK(p.p1_plus.atoms()[0].w == cplx(1.0, 0.0));
        REQUIRE(p.p2_minus.size() == 1);
        CHECK(p.p2_minus.atoms()[0].w == cplx(2.0, 0.0));
    }
    SECTION("recombination is exact and parts are mutually singular") {
        auto rng = mdtest::seeded_rng(202);
        for (int c = 0; c < 300; ++c) {
            auto m = mdtest::random_measure(rng, 8);
            auto p = jordan_decompose(m);
            CHECK(atoms_equal_exact(jordan_recombine(p), m));

            for (const auto& a : p.p1_plus.atoms())
                for (const auto& b : p.p1_minus.atoms()) CHECK(a.x != b.x);
            for (const auto& a : p.p2_plus.atoms())
                for (const auto& b : p.p2_minus.atoms()) CHECK(a.x != b.x);

            double parts = tv_norm(p.p1_plus) + tv_norm(p.p1_minus) + tv_norm(p.p2_plus) +
                           tv_norm(p.p2_minus);
            CHECK(tv_norm(m) <= parts * (1.0 + 1e-12));
            CHECK(parts <= 2.0 * tv_norm(m) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("pushforward") {
    auto shift = [](double t) { return t + 1.0; };
    SECTION("shift of a point mass") {
        auto m = pushforward(AtomicMeasure::dirac(0.0), shift);
        REQUIRE(m.size() == 1);
        CHECK(m.atoms()[0].x == 1.0);
        CHECK(m.atoms()[0].w == cplx(1.0, 0.0));
    }
    SECTION("empty measure") { CHECK(pushforward(AtomicMeasure{}, shift).empty()); }
    SECTION("tv preserved and duality against random polynomials") {
        AtomicMeasure m({{0.0, {2.0, 0.0}}, {3.0, {-1.0, 0.0}}});
        auto pm = pushforward(m, shift);
        REQUIRE(pm.size() == 2);
        CHECK(pm.atoms()[0].x == 1.0);
        CHECK(pm.atoms()[1].x == 4.0);
        CHECK(tv_norm(pm) == tv_norm(m));

        auto rng = mdtest::seeded_rng(303);
        for (int c = 0; c < 100; ++c) {
            auto g = mdtest::random_cubic(rng);
            auto lhs = pair(pm, g);
            auto rhs = pair(m, [&](double t) { return g(shift(t)); });
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
        }
    }
    SECTION("image collision is an error") {
        AtomicMeasure m({{0.0, {1.0, 0.0}}, {1.0, {1.0, 0.0}}});
        CHECK_THROWS_AS(pushforward(m, [](double) { return 42.0; }), collision_error);
    }
}

TEST_CASE("restrict") {
    AtomicMeasure m({{0.0, {1.0, 0.0}}, {5.0, {2.0, 0.0}}});
    SECTION("keep an interval") {
        auto r = restrict(m, [](double t) { return t >= -1.0 && t <= 1.0; });
        REQUIRE(r.size() == 1);
        CHECK(r.atoms()[0].x == 0.0);
    }
    SECTION("keep everything / nothing") {
        CHECK(atoms_equal_exact(restrict(m, [](double) { return true; }), m));
        CHECK(restrict(m, [](double) { return false; }).empty());
    }
    SECTION("complement identity is exact") {
        auto rng = mdtest::seeded_rng(404);
        for (int c = 0; c < 300; ++c) {
            auto x = mdtest::random_measure(rng, 8);
            auto keep = [](double t) { return t < 0.25; };
            auto left = restrict(x, keep);
            auto right = restrict(x, [&](double t) { return !keep(t); });
            CHECK(atoms_equal_exact(add(left, right), x));
        }
    }
}

TEST_CASE("pair") {
    CHECK(pair(AtomicMeasure::dirac(2.0, {3.0, 0.0}), [](double t) { return t * t; }) ==
          cplx(12.0, 0.0));
    CHECK(pair(AtomicMeasure{}, [](double) { return 1.0; }) == cplx(0.0, 0.0));
    AtomicMeasure zero_mass({{0.0, {1.0, 0.0}}, {1.0, {-1.0, 0.0}}});
    CHECK(pair(zero_mass, [](double) { return 1.0; }) == cplx(0.0, 0.0));
}

TEST_CASE("add and scale") {
    SECTION("examples") {
        CHECK(add(AtomicMeasure::dirac(0.0), scale(AtomicMeasure::dirac(0.0), {-1.0, 0.0})).empty());
        auto si = scale(AtomicMeasure::dirac(0.0, {2.0, 0.0}), {0.0, 1.0});
        REQUIRE(si.size() == 1);
        CHECK(si.atoms()[0].w == cplx(0.0, 2.0));
        auto two = add(AtomicMeasure::dirac(0.0), AtomicMeasure::dirac(1.0));
        CHECK(two.size() == 2);
        CHECK(tv_norm(two) == 2.0);
    }
    SECTION("triangle inequality and scaling homogeneity") {
        auto rng = mdtest::seeded_rng(505);
        for (int c = 0; c < 1000; ++c) {
            auto m1 = mdtest::random_measure(rng, 6);
            auto m2 = mdtest::random_measure(rng, 6);
            CHECK(tv_norm(add(m1, m2)) <=
                  (tv_norm(m1) + tv_norm(m2)) * (1.0 + 1e-12) + 1e-300);
            cplx c2(0.3, -1.2);
            CHECK(tv_norm(scale(m1, c2)) ==
                  Catch::Approx(std::abs(c2) * tv_norm(m1)).margin(1e-12).epsilon(1e-12));
        }
    }
}

TEST_CASE("partition oracle agrees with tv_norm on small measures") {
    auto rng = mdtest::seeded_rng(606);
    for (int c = 0; c < 1000; ++c) {
        auto m = mdtest::random_measure(rng, 6);
        CHECK(mdtest::partition_tv_oracle(m) == tv_norm(m));
    }
}

TEST_CASE("JSON round trip") {
    auto rng = mdtest::seeded_rng(707);
    for (int c = 0; c < 200; ++c) {
        auto m = mdtest::random_measure(rng, 8);
        auto j = to_json(m);
        // records are sorted by location
        for (std::size_t i = 1; i < j.size(); ++i)
            CHECK(j[i - 1]["x"].get<double>() < j[i]["x"].get<double>());
        CHECK(atoms_equal_exact(measure_from_json(j), m));
    }
    CHECK_THROWS_AS(measure_from_json(nlohmann::json::object()), config_error);
}
