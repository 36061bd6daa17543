#include <doctest.h>

#include <cmath>
#include <set>

#include "gapsat/geom.hpp"

using namespace gapsat;

static const double s3 = std::sqrt(3.0), s2 = std::sqrt(2.0);

TEST_CASE("dist2 small cases") {
    CHECK(dist2(Point(0, 0), Point(3, 4)) == 25.0);
    CHECK(dist2(Point(0, 0), Point(1, s3)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(dist2(Point(0, 0, 0), Point(1, 1, s2)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(dist2(Point(0, 0), Point(0, 0, 0)), std::invalid_argument);
}

TEST_CASE("lattice closed forms") {
    CHECK(honeycomb_point(0, 0) == Point(0, 0));
    CHECK(honeycomb_point(2, 1) == Point(5, s3));
    CHECK(honeycomb_point(-1, 2) == Point(0, 2 * s3));
    CHECK(fcc_point(0, 0, 0) == Point(0, 0, 0));
    CHECK(fcc_point(1, 0, 1) == Point(3, 1, s2));
    CHECK(fcc_point(0, 1, 2) == Point(2, 4, 2 * s2));
}

TEST_CASE("exact norms match the float ones") {
    for (int i = -6; i <= 6; ++i)
        for (int j = -6; j <= 6; ++j) {
            LatticeCoord c(i, j);
            Point p = lattice_point(Lattice::Honeycomb, c);
            CHECK(static_cast<double>(lattice_norm2(Lattice::Honeycomb, c)) == doctest::Approx(dot(p, p)));
            for (int k = -3; k <= 3; ++k) {
                LatticeCoord f(i, j, k);
                Point q = lattice_point(Lattice::Fcc, f);
                CHECK(static_cast<double>(lattice_norm2(Lattice::Fcc, f)) == doctest::Approx(dot(q, q)));
            }
        }
}

TEST_CASE("no two lattice points closer than a diameter, and injective") {
    // distance from the origin suffices by translation invariance; bounded range
    std::set<std::pair<double, double>> seen;
    for (int i = -30; i <= 30; ++i)
        for (int j = -30; j <= 30; ++j) {
            if (i == 0 && j == 0) continue;
            CHECK(lattice_norm2(Lattice::Honeycomb, LatticeCoord(i, j)) >= 4);
            Point p = honeycomb_point(i, j);
            CHECK(seen.insert({p[0], p[1]}).second);
        }
    // far from the origin the float distance still clears 4 - 1e-12
    Point a = honeycomb_point(10000, -9999), b = honeycomb_point(10001, -9999), c = honeycomb_point(10000, -9998);
    CHECK(dist2(a, b) >= 4 - 1e-12);
    CHECK(dist2(a, c) >= 4 - 1e-12);
    Point f = fcc_point(9999, -10000, 10000), g = fcc_point(9999, -10000, 9999);
    CHECK(dist2(f, g) >= 4 - 1e-12);
    for (int i = -5; i <= 5; ++i)
        for (int j = -5; j <= 5; ++j)
            for (int k = -5; k <= 5; ++k)
                if (i || j || k) CHECK(lattice_norm2(Lattice::Fcc, LatticeCoord(i, j, k)) >= 4);
}

TEST_CASE("cubic coordinates round trip") {
    for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j)
            for (int k = -4; k <= 4; ++k) {
                LatticeCoord c(i, j, k);
                auto u = fcc_to_cubic(c);
                CHECK((u[0] + u[1] + u[2]) % 2 == 0);
                CHECK(fcc_from_cubic(u) == c);
                // the direction map is an isometry; cubic unit = xyz length / sqrt 2
                Point x = cubic_dir_to_xyz(Point(u[0], u[1], u[2])) * s2;
                CHECK(dist2(x, fcc_point(i, j, k)) < 1e-24);
                Point back = xyz_dir_to_cubic(fcc_point(i, j, k)) * (1 / s2);
                CHECK(dist2(back, Point(u[0], u[1], u[2])) < 1e-24);
            }
}

TEST_CASE("rot60 is a lattice rotation") {
    for (int i = -3; i <= 3; ++i)
        for (int j = -3; j <= 3; ++j) {
            LatticeCoord c(i, j);
            Point r = rotate2d(honeycomb_point(i, j), M_PI / 3);
            Point q = lattice_point(Lattice::Honeycomb, honeycomb_rot60(c, 1));
            CHECK(dist2(r, q) < 1e-20);
            CHECK(honeycomb_rot60(c, 6) == c);
        }
}
