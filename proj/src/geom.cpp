#include "gapsat/geom.hpp"

namespace gapsat {

namespace {
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt2 = std::sqrt(2.0);
}  // namespace

Point zero_point(int dim) {
    Point p;
    p.dim = dim;
    return p;
}

double dot(const Point& a, const Point& b) {
    return a.x[0] * b.x[0] + a.x[1] * b.x[1] + a.x[2] * b.x[2];
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

Point normalized(const Point& a) {
    double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("cannot normalise a zero vector");
    return a * (1.0 / n);
}

double dist2(const Point& a, const Point& b) {
    if (a.dim != b.dim) throw std::invalid_argument("dist2: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) {
        double d = a.x[i] - b.x[i];
        s += d * d;
    }
    return s;
}

int lattice_dim(Lattice l) { return l == Lattice::Honeycomb ? 2 : 3; }

std::string lattice_name(Lattice l) { return l == Lattice::Honeycomb ? "honeycomb" : "fcc"; }

Lattice parse_lattice(const std::string& s) {
    if (s == "honeycomb") return Lattice::Honeycomb;
    if (s == "fcc") return Lattice::Fcc;
    throw std::invalid_argument("unknown lattice '" + s + "'");
}

Point honeycomb_point(int i, int j) {
    return Point(2.0 * i + j, kSqrt3 * j);
}

Point fcc_point(int i, int j, int k) {
    return Point(2.0 * i + k, 2.0 * j + k, kSqrt2 * k);
}

Point lattice_point(Lattice l, const LatticeCoord& c) {
    if (l == Lattice::Honeycomb) {
        if (c.dim != 2) throw std::invalid_argument("honeycomb coordinate must have 2 indices");
        return honeycomb_point(c[0], c[1]);
    }
    if (c.dim != 3) throw std::invalid_argument("fcc coordinate must have 3 indices");
    return fcc_point(c[0], c[1], c[2]);
}

long long lattice_norm2(Lattice l, const LatticeCoord& c) {
    long long i = c[0], j = c[1], k = c[2];
    if (l == Lattice::Honeycomb) return (2 * i + j) * (2 * i + j) + 3 * j * j;
    return (2 * i + k) * (2 * i + k) + (2 * j + k) * (2 * j + k) + 2 * k * k;
}

std::array<int, 3> fcc_to_cubic(const LatticeCoord& c) {
    return {c[0] + c[1] + c[2], c[0] - c[1], c[2]};
}

LatticeCoord fcc_from_cubic(const std::array<int, 3>& u) {
    if (((u[0] + u[1] + u[2]) % 2) != 0) throw std::invalid_argument("cubic coordinate off the fcc lattice");
    int k = u[2];
    int i = (u[0] - u[2] + u[1]) / 2;
    int j = (u[0] - u[2] - u[1]) / 2;
    return LatticeCoord(i, j, k);
}

// x = U + V, y = U - V, z = sqrt2 W for integer coordinates; as an orthogonal map on
// directions this is x = (u+v)/sqrt2, y = (u-v)/sqrt2, z = w.
Point cubic_dir_to_xyz(const Point& u) {
    return Point((u[0] + u[1]) / kSqrt2, (u[0] - u[1]) / kSqrt2, u[2]);
}

Point xyz_dir_to_cubic(const Point& p) {
    return Point((p[0] + p[1]) / kSqrt2, (p[0] - p[1]) / kSqrt2, p[2]);
}

LatticeCoord honeycomb_rot60(const LatticeCoord& c, int times) {
    int t = ((times % 6) + 6) % 6;
    LatticeCoord r = c;
    for (int n = 0; n < t; ++n) r = LatticeCoord(-r[1], r[0] + r[1]);
    return r;
}

Point rotate2d(const Point& p, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return Point(c * p[0] - s * p[1], s * p[0] + c * p[1]);
}

}  // namespace gapsat
