#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "gapsat/rearrange.hpp"

using namespace gapsat;

namespace {

DefectivePacking line_gap(double d) { return make_packing(Lattice::Honeycomb, Point(0, 1), 0.5, d); }

// A report whose only complaint is the missing gain.
bool only_gain_missing(const CheckReport& r) {
    return r.violations.size() == 1 && r.violations[0].rfind("net gain", 0) == 0;
}

}  // namespace

TEST_CASE("no gap, no widening") {
    auto s = optimize_widening_2d(line_gap(0.0), 4);
    CHECK(s.delta == 0.0);
}

TEST_CASE("positive widening at half a diameter, and it is maximal in the last stage") {
    auto pk = line_gap(0.5);
    auto f = trapezoid_family(4, pk.gap);
    OptimizerOptions opt;
    auto s = optimize_family(pk, f, opt);
    CHECK(s.delta > 0.0);
    CHECK(s.width == 0.5);
    WideningProblem prob(pk, f);
    auto [d1, d2, d3] = s.params;
    CHECK(d3 == s.delta);
    CHECK(prob.feasible(d1, d2, d3));
    REQUIRE(d3 + 10 * opt.eps_opt < prob.d3_cap());
    CHECK_FALSE(prob.stage_feasible(3, d1, d2, d3 + 10 * opt.eps_opt));
    // stage 1 may at most undo the gap
    CHECK(d1 <= 0.5);
}

TEST_CASE("widening does not depend on the family size") {
    for (double d : {0.25, 1.0}) {
        double a = optimize_widening_2d(line_gap(d), 4).delta;
        double b = optimize_widening_2d(line_gap(d), 6).delta;
        CHECK(a == doctest::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("apply_schedule") {
    auto pk = line_gap(0.5);
    auto f = trapezoid_family(4, pk.gap);
    Region box = Region::cube(2, 30);

    PackingPatch still(pk, box);
    auto s0 = make_schedule(f, 0.5, 0, 0, 0);
    CHECK(apply_schedule(still, s0, true).valid);
    CHECK(still.moved_ids().empty());

    PackingPatch over(pk, box);
    auto bad = make_schedule(f, 0.5, 0.6, 0, 0);
    auto r = apply_schedule(over, bad, true);
    CHECK_FALSE(r.valid);
    // rolled back
    CHECK(over.moved_ids().empty());

    PackingPatch good(pk, box);
    auto s = optimize_widening_2d(pk, 4);
    CHECK(apply_schedule(good, s, true).valid);
    CHECK(oracle::violations(good).empty());
}

TEST_CASE("stage one beyond the gap is infeasible") {
    auto pk = line_gap(0.5);
    WideningProblem prob(pk, trapezoid_family(4, pk.gap));
    CHECK(prob.stage_feasible(1, 0.5, 0, 0));
    CHECK_FALSE(prob.stage_feasible(1, 0.6, 0, 0));
}

TEST_CASE("iteration planning") {
    auto p0 = plan_iterations(2.0, [](double) { return 0.1; });
    CHECK(p0.k == 0);
    CHECK(p0.sizes.empty());

    auto p = plan_iterations(0.5, [](double) { return 0.5; });
    CHECK(p.k == 3);
    CHECK(p.widths == std::vector<double>{0.5, 1.0, 1.5, 2.0});
    CHECK(p.sizes == std::vector<long long>{51, 15, 3});
    for (std::size_t t = 0; t + 1 < p.sizes.size(); ++t) CHECK(p.sizes[t] == nesting_outer_size(p.sizes[t + 1]));

    auto fn = [](double d) { return 0.05 * d * d; };
    int last = 0;
    for (double d0 : {1.9, 1.5, 1.0, 0.7}) {
        int k = plan_iterations(d0, fn).k;
        CHECK(k >= last);
        last = k;
    }
    CHECK_THROWS_AS(plan_iterations(0.0, fn), InfeasibleError);
    CHECK_THROWS_AS(plan_iterations(1.0, [](double) { return 0.0; }), InfeasibleError);
    CHECK_THROWS_AS(plan_iterations(0.1, [](double) { return 1e-4; }, 2.0, 50), BudgetError);
}

TEST_CASE("one 3D step: moves and a single removal") {
    auto pk = make_packing(Lattice::Fcc, Point(0, 0, 1), 0.25, 1.0);
    Witness w = build_witness_3d_step(pk, 4);
    CHECK(w.removals.size() == 1);
    CHECK(w.insertions.empty());
    CHECK_FALSE(w.moves.empty());
    auto r = check_witness(w, false);
    CHECK(r.net_gain == -1);
    CHECK(only_gain_missing(r));
}

TEST_CASE("reduction of a sheared line gap") {
    auto pk = make_packing(Lattice::Honeycomb, normalized(Point(-0.3, 1)), 0.1, 0.4);
    for (int n : {5, 8}) {
        Reduction r = reduce_line_gap(pk, n);
        CHECK(r.valid);
        CHECK(r.width == doctest::Approx(0.160837168999307).epsilon(1e-9));
        CHECK(only_gain_missing(check_witness(r.result, false)));
    }
}

TEST_CASE("reduction of a honeycomb-layer gap") {
    Point nrm = normalized(Point(std::sqrt(2.0), 0, 1));
    REQUIRE(is_fcc_honeycomb_normal(nrm));
    auto pk = make_packing(Lattice::Fcc, nrm, 0.3, 0.5);
    Reduction z = reduce_honeycomb_gap(pk, 3, 0.0);
    CHECK(z.width == 0.0);
    double last = -1;
    for (double t : {0.1, 0.2, 0.3, 0.4}) {
        Reduction r = reduce_honeycomb_gap(pk, 3, t);
        CHECK(r.valid);
        CHECK(r.width > last);
        last = r.width;
    }
    for (int n : {2, 3}) {
        Reduction r = reduce_honeycomb_gap(pk, n);
        CHECK(r.valid);
        CHECK(r.width == doctest::Approx(0.288675134306138).epsilon(1e-9));
        CHECK(only_gain_missing(check_witness(r.result, false)));
    }
    CHECK(reduce_honeycomb_gap(pk, 3).moved.size() == 37);
}

TEST_CASE("reduction of a generic plane gap") {
    auto pk = make_packing(Lattice::Fcc, normalized(Point(0.3, 0.5, 1)), 0.2, 0.5);
    for (int n = 2; n <= 6; ++n) {
        Reduction r = reduce_plane_gap(pk, n);
        CHECK(r.valid);
        CHECK(r.width == doctest::Approx(0.097036).epsilon(1e-4));
        CHECK(only_gain_missing(check_witness(r.result, false)));
    }
}

TEST_CASE("rotated line gap: strict acceptance after two iterations") {
    auto pk = make_packing(Lattice::Honeycomb, Point(std::sqrt(3.0) / 2, 0.5), 0.5, 1.7);
    Witness w = build_witness_2d(pk);
    CHECK(w.insertions.size() == 1);
    CHECK(w.removals.empty());
    CHECK(check_witness(w, false).accepted);
    CHECK(check_witness(w, true).accepted);
    for (const auto& m : w.moves) CHECK(m.shift);
}
