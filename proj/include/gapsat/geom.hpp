#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace gapsat {

// Real point in R^2 or R^3. Unused trailing component stays zero.
struct Point {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    int dim = 2;

    Point() = default;
    Point(double a, double b) : x{a, b, 0.0}, dim(2) {}
    Point(double a, double b, double c) : x{a, b, c}, dim(3) {}

    double& operator[](std::size_t i) { return x[i]; }
    double operator[](std::size_t i) const { return x[i]; }

    Point& operator+=(const Point& o) {
        for (int i = 0; i < 3; ++i) x[i] += o.x[i];
        return *this;
    }
    Point& operator-=(const Point& o) {
        for (int i = 0; i < 3; ++i) x[i] -= o.x[i];
        return *this;
    }
    Point& operator*=(double s) {
        for (int i = 0; i < 3; ++i) x[i] *= s;
        return *this;
    }
    friend Point operator+(Point a, const Point& b) { return a += b; }
    friend Point operator-(Point a, const Point& b) { return a -= b; }
    friend Point operator*(Point a, double s) { return a *= s; }
    friend Point operator*(double s, Point a) { return a *= s; }
    friend Point operator-(Point a) { return a *= -1.0; }
    bool operator==(const Point& o) const { return dim == o.dim && x == o.x; }
};

Point zero_point(int dim);
double dot(const Point& a, const Point& b);
double norm(const Point& a);
Point normalized(const Point& a);

// Squared Euclidean distance. Throws std::invalid_argument on dimension mismatch.
double dist2(const Point& a, const Point& b);

struct ToleranceConfig {
    double eps_valid = 1e-9;  // on squared distance
    double eps_cert = 1e-6;
    double eps_opt = 1e-9;
};

enum class Lattice { Honeycomb, Fcc };

int lattice_dim(Lattice l);
std::string lattice_name(Lattice l);
Lattice parse_lattice(const std::string& s);

// Integer index of a lattice point. Honeycomb uses (i, j), fcc uses (i, j, k).
struct LatticeCoord {
    std::array<int, 3> v{0, 0, 0};
    int dim = 2;

    LatticeCoord() = default;
    LatticeCoord(int i, int j) : v{i, j, 0}, dim(2) {}
    LatticeCoord(int i, int j, int k) : v{i, j, k}, dim(3) {}

    int operator[](std::size_t n) const { return v[n]; }
    int& operator[](std::size_t n) { return v[n]; }
    auto operator<=>(const LatticeCoord&) const = default;
    bool operator==(const LatticeCoord&) const = default;

    LatticeCoord operator+(const LatticeCoord& o) const {
        LatticeCoord r = *this;
        for (int n = 0; n < 3; ++n) r.v[n] += o.v[n];
        return r;
    }
    LatticeCoord operator-(const LatticeCoord& o) const {
        LatticeCoord r = *this;
        for (int n = 0; n < 3; ++n) r.v[n] -= o.v[n];
        return r;
    }
};

struct LatticeCoordHash {
    std::size_t operator()(const LatticeCoord& c) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (int n = 0; n < 3; ++n) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.v[n]));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// (2i + j, sqrt(3) j)
Point honeycomb_point(int i, int j);
// (2i + k, 2j + k, sqrt(2) k)
Point fcc_point(int i, int j, int k);
Point lattice_point(Lattice l, const LatticeCoord& c);

// Exact squared norm of the lattice vector with index c, as an integer.
// Honeycomb: (2i+j)^2 + 3j^2. Fcc: (2i+k)^2 + (2j+k)^2 + 2k^2.
long long lattice_norm2(Lattice l, const LatticeCoord& c);

// Fcc in cubic integer coordinates: U = i+j+k, V = i-j, W = k, with U+V+W even.
// Nearest neighbours are the permutations of (+-1, +-1, 0).
std::array<int, 3> fcc_to_cubic(const LatticeCoord& c);
LatticeCoord fcc_from_cubic(const std::array<int, 3>& u);
// Real direction conversions between the xyz frame and the cubic frame.
Point cubic_dir_to_xyz(const Point& u);
Point xyz_dir_to_cubic(const Point& p);

// Rotation by 60 degrees about the origin, as an index map on the honeycomb lattice.
LatticeCoord honeycomb_rot60(const LatticeCoord& c, int times);
Point rotate2d(const Point& p, double angle);

}  // namespace gapsat
