#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "../oracles.hpp"
#include "gapsat/rearrange.hpp"
#include "gapsat/witness.hpp"

using namespace gapsat;

namespace {

Witness tangent_insertion(double d) {
    Witness w;
    w.base = make_packing(Lattice::Honeycomb, Point(0, 1), -0.5, d);
    w.region = Region::cube(2, 4);
    w.insertions.push_back(Point(0, 0));
    w.provenance = "test";
    return w;
}

}  // namespace

TEST_CASE("a circle fits at width two") {
    Witness w = tangent_insertion(2.0);
    auto r = check_witness(w, false);
    CHECK(r.accepted);
    CHECK(r.net_gain == 1);
    CHECK(oracle::witness_ok(w, 8));
    // tangency cannot be certified under error bounds
    CHECK_FALSE(check_witness(w, true).accepted);

    Witness narrow = tangent_insertion(1.9);
    auto n = check_witness(narrow, false);
    CHECK_FALSE(n.accepted);
    CHECK_FALSE(n.violations.empty());
    CHECK_FALSE(oracle::witness_ok(narrow, 8));
}

TEST_CASE("empty witness has no gain") {
    Witness w = tangent_insertion(2.0);
    w.insertions.clear();
    auto r = check_witness(w, false);
    CHECK_FALSE(r.accepted);
    CHECK(r.net_gain == 0);
}

TEST_CASE("edits outside the region are rejected") {
    Witness w = tangent_insertion(2.0);
    w.region = Region::cube(2, 4);
    w.insertions[0] = Point(0, 6);
    CHECK_FALSE(check_witness(w, false).accepted);
}

TEST_CASE("json round trip") {
    auto pk = make_packing(Lattice::Fcc, Point(0, 0, 1), 0.25, 2.2);
    auto w = direct_insertion_witness(pk, 5.0);
    REQUIRE(w);
    Witness back = witness_from_json(witness_to_json(*w));
    CHECK(back == *w);
    CHECK(check_witness(back, false).accepted);
    CHECK(check_witness(back, true).accepted);

    std::string path = "witness_roundtrip.json";
    write_witness(*w, path);
    CHECK(read_witness(path) == *w);
    std::remove(path.c_str());
    CHECK_THROWS(read_witness("no/such/dir/w.json"));
}

TEST_CASE("parse errors") {
    std::string good = witness_to_json(tangent_insertion(2.0));
    CHECK_NOTHROW(witness_from_json(good));
    CHECK_THROWS_AS(witness_from_json("{ not json"), ParseError);
    CHECK_THROWS_AS(witness_from_json("[]"), ParseError);

    auto j = good;
    auto at = j.find("\"version\": 1");
    REQUIRE(at != std::string::npos);
    j.replace(at, 12, "\"version\": 7");
    CHECK_THROWS_AS(witness_from_json(j), ParseError);

    // a 3-coordinate insertion in a 2D file
    Witness w = tangent_insertion(2.0);
    std::string t = witness_to_json(w);
    auto ins = t.find("\"insertions\"");
    auto lb = t.find('[', ins);
    auto rb = t.find(']', t.find('[', lb + 1));
    t.replace(lb, rb - lb + 1, "[[0.0, 0.0, 0.0]]");
    CHECK_THROWS_AS(witness_from_json(t), ParseError);

    // wrong arity reaches the checker only through the API
    w.removals.push_back(LatticeCoord(0, 0, 0));
    CHECK_THROWS_AS(check_witness(w, false), std::invalid_argument);
}

TEST_CASE("corrupted witnesses are caught") {
    auto pk = make_packing(Lattice::Honeycomb, Point(0, 1), 0.5, 2.3);
    auto base = direct_insertion_witness(pk);
    REQUIRE(base);
    REQUIRE(check_witness(*base, false).accepted);

    // shift an inserted center onto a neighbour
    Witness a = *base;
    a.insertions[0] = a.insertions[0] - pk.gap.normal * 0.5;
    CHECK_FALSE(check_witness(a, false).accepted);
    CHECK_FALSE(oracle::witness_ok(a, 12));

    // a moved sphere lands on a lattice center
    Witness b = *base;
    b.moves.push_back({LatticeCoord(0, -2), defect_center(pk, LatticeCoord(1, -2)) + Point(0.3, 0), std::nullopt});
    CHECK_FALSE(check_witness(b, false).accepted);
    CHECK_FALSE(oracle::witness_ok(b, 12));

    // the same sphere removed twice to fake the bookkeeping
    Witness c = *base;
    c.removals = {LatticeCoord(3, -3), LatticeCoord(3, -3)};
    c.insertions.push_back(defect_center(pk, LatticeCoord(3, -3)));
    c.insertions.push_back(defect_center(pk, LatticeCoord(3, -3)));
    CHECK_FALSE(check_witness(c, false).accepted);
    CHECK_FALSE(oracle::witness_ok(c, 12));
}

TEST_CASE("checker agrees with the brute-force rebuild; strict implies normal") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-3, 3), dd(1.6, 2.6);
    std::normal_distribution<double> g;
    for (int t = 0; t < 60; ++t) {
        bool three = t % 3 == 0;
        Point n = three ? normalized(Point(g(rng), g(rng), g(rng))) : normalized(Point(g(rng), g(rng)));
        auto pk = make_packing(three ? Lattice::Fcc : Lattice::Honeycomb, n, u(rng) / 3, dd(rng));
        Witness w;
        w.base = pk;
        w.region = Region::cube(pk.dim(), three ? 3.0 : 4.0);
        auto cs = enumerate_centers(pk, w.region);
        if (t % 2 && !cs.empty()) w.removals.push_back(cs[static_cast<std::size_t>(rng() % cs.size())].coord);
        int k = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < k; ++i) {
            Point p = zero_point(pk.dim());
            for (int c = 0; c < pk.dim(); ++c) p[static_cast<std::size_t>(c)] = u(rng);
            w.insertions.push_back(p);
        }
        if (auto ins = direct_insertion_witness(pk, 2.0); ins && t % 4 == 0) w = *ins;
        bool normal = check_witness(w, false).accepted;
        CHECK(normal == oracle::witness_ok(w, 10));
        if (check_witness(w, true).accepted) CHECK(normal);
    }
}
