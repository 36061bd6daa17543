#include "gapsat/lattice.hpp"

#include <algorithm>
#include <numbers>

namespace gapsat {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt2 = std::sqrt(2.0);

// Index box covering every lattice point whose unshifted position lies in `box`.
struct IndexRange {
    int lo[3];
    int hi[3];
};

IndexRange index_range(Lattice l, const Region& box) {
    IndexRange r{};
    if (l == Lattice::Honeycomb) {
        r.lo[1] = static_cast<int>(std::floor(box.lo[1] / kSqrt3)) - 1;
        r.hi[1] = static_cast<int>(std::ceil(box.hi[1] / kSqrt3)) + 1;
        // i range depends on j; the caller handles it
        r.lo[0] = r.hi[0] = r.lo[2] = r.hi[2] = 0;
    } else {
        r.lo[2] = static_cast<int>(std::floor(box.lo[2] / kSqrt2)) - 1;
        r.hi[2] = static_cast<int>(std::ceil(box.hi[2] / kSqrt2)) + 1;
    }
    return r;
}

template <class F>
void for_each_lattice_point(Lattice l, const Region& box, F&& f) {
    IndexRange r = index_range(l, box);
    if (l == Lattice::Honeycomb) {
        for (int j = r.lo[1]; j <= r.hi[1]; ++j) {
            int i0 = static_cast<int>(std::floor((box.lo[0] - j) / 2.0)) - 1;
            int i1 = static_cast<int>(std::ceil((box.hi[0] - j) / 2.0)) + 1;
            for (int i = i0; i <= i1; ++i) f(LatticeCoord(i, j));
        }
        return;
    }
    for (int k = r.lo[2]; k <= r.hi[2]; ++k) {
        int i0 = static_cast<int>(std::floor((box.lo[0] - k) / 2.0)) - 1;
        int i1 = static_cast<int>(std::ceil((box.hi[0] - k) / 2.0)) + 1;
        int j0 = static_cast<int>(std::floor((box.lo[1] - k) / 2.0)) - 1;
        int j1 = static_cast<int>(std::ceil((box.hi[1] - k) / 2.0)) + 1;
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j) f(LatticeCoord(i, j, k));
    }
}

bool near_unit(const Point& a, const Point& b, double tol) {
    return std::abs(dot(a, b) - 1.0) <= tol;
}

}  // namespace

bool Region::contains(const Point& p, double slack) const {
    if (p.dim != lo.dim) return false;
    for (int i = 0; i < lo.dim; ++i)
        if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
}

double Region::distance(const Point& p) const {
    double s = 0.0;
    for (int i = 0; i < lo.dim; ++i) {
        double d = 0.0;
        if (p[i] < lo[i]) d = lo[i] - p[i];
        else if (p[i] > hi[i]) d = p[i] - hi[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Region Region::expanded(double r) const {
    Region e = *this;
    for (int i = 0; i < lo.dim; ++i) {
        e.lo[i] -= r;
        e.hi[i] += r;
    }
    return e;
}

Region Region::cube(int dim, double half) {
    Region r;
    r.lo = zero_point(dim);
    r.hi = zero_point(dim);
    for (int i = 0; i < dim; ++i) {
        r.lo[i] = -half;
        r.hi[i] = half;
    }
    return r;
}

DefectivePacking make_packing(Lattice l, const Point& normal, double offset, double width) {
    if (normal.dim != lattice_dim(l)) throw std::invalid_argument("gap normal dimension does not match lattice");
    if (std::abs(norm(normal) - 1.0) > 1e-9) throw std::invalid_argument("gap normal must be a unit vector");
    if (!(width >= 0.0)) throw std::invalid_argument("gap width must be non-negative");
    if (!std::isfinite(offset) || !std::isfinite(width)) throw std::invalid_argument("gap parameters must be finite");
    DefectivePacking pk;
    pk.lattice = l;
    pk.gap.normal = normal;
    pk.gap.offset = offset;
    pk.gap.width = width;
    return pk;
}

bool in_upper_half(const DefectivePacking& pk, const Point& p) {
    return dot(p, pk.gap.normal) >= pk.gap.offset - 1e-12;
}

Point defect_shift(const DefectivePacking& pk, const Point& p) {
    if (p.dim != pk.dim()) throw std::invalid_argument("defect_shift: dimension mismatch");
    if (in_upper_half(pk, p)) return p + pk.shift_vector();
    return p;
}

Point defect_center(const DefectivePacking& pk, const LatticeCoord& c) {
    return defect_shift(pk, lattice_point(pk.lattice, c));
}

std::vector<LatticeCenter> enumerate_centers(const DefectivePacking& pk, const Region& region) {
    if (region.dim() != pk.dim()) throw std::invalid_argument("region dimension does not match lattice");
    for (int i = 0; i < region.dim(); ++i)
        if (!(region.lo[i] <= region.hi[i])) throw std::invalid_argument("region is empty");
    std::vector<LatticeCenter> out;
    Region search = region.expanded(pk.gap.width + 1.0);
    for_each_lattice_point(pk.lattice, search, [&](const LatticeCoord& c) {
        Point p = defect_center(pk, c);
        if (region.contains(p)) out.push_back({c, p});
    });
    std::sort(out.begin(), out.end(), [](const LatticeCenter& a, const LatticeCenter& b) { return a.coord < b.coord; });
    return out;
}

std::vector<LatticeCenter> background_neighbors(const DefectivePacking& pk, const Region& region, double reach) {
    if (region.dim() != pk.dim()) throw std::invalid_argument("region dimension does not match lattice");
    std::vector<LatticeCenter> out;
    Region search = region.expanded(reach + pk.gap.width + 1.0);
    for_each_lattice_point(pk.lattice, search, [&](const LatticeCoord& c) {
        Point p = defect_center(pk, c);
        if (region.contains(p)) return;
        if (region.distance(p) <= reach) out.push_back({c, p});
    });
    std::sort(out.begin(), out.end(), [](const LatticeCenter& a, const LatticeCenter& b) { return a.coord < b.coord; });
    return out;
}

bool hyperplane_hits_center(const DefectivePacking& pk, const Region& box, double tol) {
    bool hit = false;
    for_each_lattice_point(pk.lattice, box, [&](const LatticeCoord& c) {
        Point p = lattice_point(pk.lattice, c);
        if (box.contains(p) && std::abs(dot(p, pk.gap.normal) - pk.gap.offset) < tol) hit = true;
    });
    return hit;
}

int honeycomb_line_rotation(const Point& normal, double tol) {
    if (normal.dim != 2) return -1;
    for (int k = 0; k < 6; ++k) {
        Point e = rotate2d(Point(0.0, 1.0), k * std::numbers::pi / 3.0);
        if (near_unit(normal, e, tol)) return k;
    }
    return -1;
}

std::vector<Point> fcc_square_normals() {
    std::vector<Point> out;
    for (int a = 0; a < 3; ++a)
        for (int s : {1, -1}) {
            Point u(0.0, 0.0, 0.0);
            u[a] = s;
            out.push_back(cubic_dir_to_xyz(u));
        }
    return out;
}

std::vector<Point> fcc_honeycomb_normals() {
    std::vector<Point> out;
    for (int a : {1, -1})
        for (int b : {1, -1})
            for (int c : {1, -1}) out.push_back(cubic_dir_to_xyz(Point(a, b, c) * (1.0 / kSqrt3)));
    return out;
}

bool is_fcc_square_normal(const Point& normal, double tol) {
    if (normal.dim != 3) return false;
    for (const Point& e : fcc_square_normals())
        if (near_unit(normal, e, tol)) return true;
    return false;
}

bool is_fcc_honeycomb_normal(const Point& normal, double tol) {
    if (normal.dim != 3) return false;
    for (const Point& e : fcc_honeycomb_normals())
        if (near_unit(normal, e, tol)) return true;
    return false;
}

}  // namespace gapsat
