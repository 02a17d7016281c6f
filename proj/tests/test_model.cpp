#include "doctest.h"

#include <vector>

#include "terrace/model.hpp"

using namespace terrace;

namespace {
const ModelParams kRef{1.0, 1.21, 0.5, 1.1};
}

TEST_CASE("validate_params accepts the monostable regime") {
    CHECK_NOTHROW(validate_params(kRef));
    CHECK_NOTHROW(validate_params({0.1, 5.0, 0.01, 1.001}));
}

TEST_CASE("validate_params rejects each boundary") {
    CHECK_THROWS_AS(validate_params({1, 1, 1.0, 1.1}), OutOfRegime);
    CHECK_THROWS_AS(validate_params({1, 1, 0.0, 1.1}), OutOfRegime);
    CHECK_THROWS_AS(validate_params({1, 1, 0.5, 1.0}), OutOfRegime);
    CHECK_THROWS_AS(validate_params({0, 1, 0.5, 1.1}), OutOfRegime);
    CHECK_THROWS_AS(validate_params({1, 0, 0.5, 1.1}), OutOfRegime);
    CHECK_THROWS_AS(validate_params({1, 1, -0.5, 1.1}), OutOfRegime);

    try {
        validate_params({1, 1, 1.0, 1.1});
        CHECK(false);
    } catch (const OutOfRegime& e) {
        CHECK(e.field == "a");
    }
}

TEST_CASE("derived speeds are recomputed from the fields") {
    CHECK(kRef.kpp_u_speed() == 2.0);
    CHECK(kRef.kpp_v_speed() == doctest::Approx(2.2).epsilon(1e-14));
}

TEST_CASE("reaction vanishes at the three equilibria") {
    for (const ModelParams& p :
         {kRef, ModelParams{2.0, 0.3, 0.8, 3.0}, ModelParams{0.5, 4.0, 0.2, 1.5}}) {
        for (auto [u, v] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}) {
            auto [fu, fv] = reaction(p, u, v);
            CHECK(fu == 0.0);
            CHECK(fv == 0.0);
        }
    }
}

TEST_CASE("reaction midpoint value matches direct arithmetic") {
    // u (1 - u - a v) = 0.5 (1 - 0.5 - 0.25) = 0.125
    // r v (1 - v - b u) = 1.21 * 0.5 * (1 - 0.5 - 0.55) = -0.030250
    auto [fu, fv] = reaction(kRef, 0.5, 0.5);
    CHECK(fu == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(fv == doctest::Approx(-0.030250).epsilon(1e-12));
}

TEST_CASE("delta-perturbed reaction shifts the carrying capacities") {
    auto [fu, fv] = reaction(kRef, 1.0, 0.0, 0.1);
    CHECK(fu == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(fv == 0.0);
    auto [gu, gv] = reaction(kRef, 0.0, 1.0, 0.1);
    CHECK(gu == 0.0);
    CHECK(gv == doctest::Approx(1.21 * (-0.2)).epsilon(1e-14));
}

TEST_CASE("reaction sign structure on the invariant-region walls") {
    for (double v : {0.0, 0.3, 1.0}) {
        CHECK(reaction(kRef, 0.0, v).first == 0.0);
        CHECK(reaction(kRef, 1.0, v).first <= 0.0);
    }
    for (double u : {0.0, 0.3, 1.0}) {
        CHECK(reaction(kRef, u, 0.0).second == 0.0);
        CHECK(reaction(kRef, u, 1.0).second <= 0.0);
    }
}

TEST_CASE("grid node placement is exact") {
    Grid g{-2.0, 3.0, 11};
    validate_grid(g);
    CHECK(g.dx() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.x(0) == -2.0);
    CHECK(g.x(10) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(validate_grid(Grid{0.0, 1.0, 2}), DomainError);
    CHECK_THROWS_AS(validate_grid(Grid{1.0, 0.0, 5}), DomainError);
}

namespace {
StatePair make_state(std::vector<double> u, std::vector<double> v) {
    StatePair s;
    s.u = std::move(u);
    s.v = std::move(v);
    return s;
}
}  // namespace

TEST_CASE("competitive order: reflexive, semi-extinct states ordered") {
    auto s = make_state({0.2, 0.4}, {0.9, 0.1});
    CHECK(competitive_leq(s, s));
    auto lo = make_state({0.0, 0.0}, {1.0, 1.0});
    auto hi = make_state({1.0, 1.0}, {0.0, 0.0});
    CHECK(competitive_leq(lo, hi));
    CHECK_FALSE(competitive_leq(hi, lo));
}

TEST_CASE("competitive order: incomparable pair, both directions false") {
    auto p = make_state({1.0, 1.0}, {1.0, 1.0});
    auto q = make_state({0.0, 0.0}, {0.0, 0.0});
    CHECK_FALSE(competitive_leq(p, q));
    CHECK_FALSE(competitive_leq(q, p));
}

TEST_CASE("competitive order is a partial order on sampled triples") {
    const std::vector<StatePair> states = {
        make_state({0.1, 0.2}, {0.9, 0.8}), make_state({0.2, 0.3}, {0.8, 0.7}),
        make_state({0.3, 0.4}, {0.7, 0.6}), make_state({0.2, 0.1}, {0.5, 0.9}),
        make_state({0.9, 0.9}, {0.1, 0.1})};
    for (const auto& x : states)
        for (const auto& y : states) {
            if (competitive_leq(x, y) && competitive_leq(y, x)) {
                CHECK(x.u == y.u);
                CHECK(x.v == y.v);
            }
            for (const auto& z : states)
                if (competitive_leq(x, y) && competitive_leq(y, z))
                    CHECK(competitive_leq(x, z));
        }
}

TEST_CASE("competitive order raises on size mismatch") {
    auto s = make_state({0.1}, {0.9});
    auto t = make_state({0.1, 0.2}, {0.9, 0.8});
    CHECK_THROWS_AS(competitive_leq(s, t), GridMismatch);
}
