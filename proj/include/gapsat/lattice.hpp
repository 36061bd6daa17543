#pragma once

#include <utility>
#include <vector>

#include "gapsat/geom.hpp"

namespace gapsat {

// Half-space {p : <p,normal> >= offset} is translated by width * normal.
struct GapDefect {
    Point normal;
    double offset = 0.0;
    double width = 0.0;
};

struct DefectivePacking {
    Lattice lattice = Lattice::Honeycomb;
    GapDefect gap;

    int dim() const { return lattice_dim(lattice); }
    Point shift_vector() const { return gap.normal * gap.width; }
};

// Closed axis-aligned box.
struct Region {
    Point lo;
    Point hi;

    int dim() const { return lo.dim; }
    bool contains(const Point& p, double slack = 0.0) const;
    // Euclidean distance from p to the box (0 inside).
    double distance(const Point& p) const;
    Region expanded(double r) const;
    static Region cube(int dim, double half);
};

struct LatticeCenter {
    LatticeCoord coord;
    Point at;
    bool operator==(const LatticeCenter&) const = default;
};

// Validates and returns a packing; the normal must be unit length to 1e-9.
DefectivePacking make_packing(Lattice l, const Point& normal, double offset, double width);

bool in_upper_half(const DefectivePacking& pk, const Point& p);
Point defect_shift(const DefectivePacking& pk, const Point& p);
Point defect_center(const DefectivePacking& pk, const LatticeCoord& c);

// All centers of the defective packing inside the region, sorted by lattice coordinate.
std::vector<LatticeCenter> enumerate_centers(const DefectivePacking& pk, const Region& region);

// Centers outside the region but within `reach` of it.
std::vector<LatticeCenter> background_neighbors(const DefectivePacking& pk, const Region& region,
                                                double reach);

// Some lattice center lies within tol of the defect hyperplane, inside the box.
bool hyperplane_hits_center(const DefectivePacking& pk, const Region& box, double tol = 1e-9);

// Returns k in [0, 6) with normal == R^k (0, 1), or -1 if the normal is not
// perpendicular to a honeycomb lattice line.
int honeycomb_line_rotation(const Point& normal, double tol = 1e-9);

// Unit normals of square layers: the three cubic axes in xyz, both signs.
bool is_fcc_square_normal(const Point& normal, double tol = 1e-9);
// Unit normals of close-packed (honeycomb) layers of fcc.
bool is_fcc_honeycomb_normal(const Point& normal, double tol = 1e-9);
std::vector<Point> fcc_honeycomb_normals();
std::vector<Point> fcc_square_normals();

}  // namespace gapsat
