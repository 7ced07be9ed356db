#include <cmath>

#include "biphos/phase.hpp"
#include "doctest.h"

using namespace biphos;

TEST_CASE("nullcline polylines satisfy their defining equations") {
    Params p;
    const auto ncs = trace_nullclines(p, 0.05, 12.0, 240);
    REQUIRE(!ncs.c_no.empty());
    REQUIRE(!ncs.c_nop.empty());
    int checked = 0;
    for (const auto& poly : ncs.c_no) {
        for (const auto& pt : poly.points) {
            const Vec2 x(pt.total * (1 - pt.frac), pt.total * pt.frac);
            CHECK(std::abs(rhs_reduced(x, p)[0]) <= 1e-6 * std::max(1.0, pt.total));
            ++checked;
        }
    }
    for (const auto& poly : ncs.c_nop)
        for (const auto& pt : poly.points) {
            const Vec2 x(pt.total * (1 - pt.frac), pt.total * pt.frac);
            CHECK(std::abs(rhs_reduced(x, p)[1]) <= 1e-6 * std::max(1.0, pt.total));
        }
    CHECK(checked > 100);

    // Defaults sit in the S-shaped regime: both nullclines triple-valued
    // somewhere.
    CHECK(max_roots_per_total(ncs, 0) == 3);
    CHECK(max_roots_per_total(ncs, 1) == 3);
}

TEST_CASE("step-like regime loses the fold structure") {
    Params p;
    p.tau = 70.0;  // past the bell top: no S anywhere
    const auto ncs = trace_nullclines(p, 0.05, 12.0, 240);
    CHECK(max_roots_per_total(ncs, 1) == 1);
}

TEST_CASE("equilibria: residuals, eigenvalues, and default-point stability") {
    Params p;  // reference point inside the oscillatory window
    const auto eqs = find_equilibria(p);
    REQUIRE(eqs.size() == 1);
    const auto& eq = eqs.front();
    CHECK(eq.residual <= 1e-10);
    CHECK(!eq.stable());  // the window point oscillates

    // Eigenvalues against the Jacobian's invariants (independent check).
    const Mat2 J = jacobian_reduced(eq.state, p);
    const auto l1 = eq.lambda1, l2 = eq.lambda2;
    CHECK((l1 + l2).real() == doctest::Approx(J.trace()).epsilon(1e-9));
    CHECK((l1 * l2).real() == doctest::Approx(J.determinant()).epsilon(1e-9));
    CHECK(std::abs((l1 + l2).imag()) <= 1e-12);
}

TEST_CASE("equilibrium fraction ordering across the window") {
    Params p;
    p.K_c = 1.0;  // below the window: stable, high phosphorylated fraction
    auto lo = find_equilibria(p);
    REQUIRE(!lo.empty());
    CHECK(lo.front().stable());
    CHECK(lo.front().frac() > 0.5);

    p.K_c = 4.2;  // above the window: stable, low fraction
    auto hi = find_equilibria(p);
    REQUIRE(!hi.empty());
    CHECK(hi.front().stable());
    CHECK(hi.front().frac() < 0.5);
}

TEST_CASE("bistable equilibria on the documented segment") {
    Params p;
    p.k_nt = 0.0025;
    p.K_c = 26.0;
    p.tau = 5.0;
    const auto eqs = find_equilibria(p);
    REQUIRE(eqs.size() == 3);
    int stable = 0, saddle = 0;
    for (const auto& eq : eqs) {
        if (eq.stable()) ++stable;
        if (eq.kind == EqKind::saddle) ++saddle;
    }
    CHECK(stable == 2);
    CHECK(saddle == 1);
}

TEST_CASE("refine_equilibrium converges from a nearby guess") {
    Params p;
    const auto eqs = find_equilibria(p);
    REQUIRE(!eqs.empty());
    const Vec2 guess = eqs.front().state * 1.05;
    const auto eq = refine_equilibrium(p, guess);
    CHECK((eq.state - eqs.front().state).norm() <= 1e-6 * eqs.front().state.norm());
    CHECK(eq.residual <= 1e-10);
}

TEST_CASE("classify_regime reproduces the three-regime sweep") {
    Params p;  // tau = 0.01, k_nt = 0.1
    const auto run = [&](double K_c) {
        Params q = p;
        q.K_c = K_c;
        const auto eqs = find_equilibria(q);
        return classify_regime(q, default_probes(q, eqs), 200.0, 150.0);
    };
    CHECK(run(1.0) == Regime::unique_stable_eq);
    CHECK(run(2.75) == Regime::unique_stable_cycle);
    CHECK(run(4.2) == Regime::unique_stable_eq);
}

TEST_CASE("classify_regime flags bistable equilibria") {
    Params p;
    p.k_nt = 0.0025;
    p.K_c = 26.0;
    p.tau = 5.0;
    const auto eqs = find_equilibria(p);
    CHECK(classify_regime(p, default_probes(p, eqs), 300.0, 200.0) ==
          Regime::bistable_equilibria);
}

TEST_CASE("regime labels are stable strings") {
    CHECK(std::string(to_string(Regime::unique_stable_eq)) == "unique-stable-eq");
    CHECK(std::string(to_string(Regime::unique_stable_cycle)) ==
          "unique-stable-cycle");
    CHECK(std::string(to_string(EqKind::saddle)) == "saddle");
}
