#include "gapsat/blocks.hpp"

#include <algorithm>
#include <numbers>
#include <set>

namespace gapsat {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt2 = std::sqrt(2.0);

Block make_block(std::vector<LatticeCoord> m, BlockKind kind, int n, const LatticeCoord& anchor,
                 std::vector<LatticeCoord> corners) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    Block b;
    b.members = std::move(m);
    b.kind = kind;
    b.size = n;
    b.anchor = anchor;
    b.corners = std::move(corners);
    return b;
}

Block map_block(const Block& b, const Frame& f) {
    std::vector<LatticeCoord> m;
    m.reserve(b.members.size());
    for (const auto& c : b.members) m.push_back(f.map(c));
    std::vector<LatticeCoord> corners;
    for (const auto& c : b.corners) corners.push_back(f.map(c));
    return make_block(std::move(m), b.kind, b.size, f.map(b.anchor), std::move(corners));
}

void require_size(int n, int min) {
    if (n < min) throw std::invalid_argument("block size must be at least " + std::to_string(min));
}

Split split_generic(const Block& block, Lattice l, const Point& normal, double offset) {
    Point nn = normalized(normal);
    double off = offset / norm(normal);
    std::vector<LatticeCoord> pos, neg;
    for (const auto& c : block.members) {
        double s = dot(lattice_point(l, c), nn) - off;
        if (std::abs(s) < 1e-9) throw std::invalid_argument("cut passes within 1e-9 of a member center");
        (s > 0 ? pos : neg).push_back(c);
    }
    int corners_pos = 0;
    for (const auto& c : block.corners)
        if (dot(lattice_point(l, c), nn) - off > 0) ++corners_pos;
    int total = static_cast<int>(block.corners.size());
    if (pos.empty() || neg.empty() || corners_pos == 0 || corners_pos == total)
        throw std::invalid_argument("cut misses the block");
    Split s;
    if (corners_pos == 1) {
        s.t1 = make_block(pos, BlockKind::Generic, block.size, block.anchor, {});
        s.t2 = make_block(neg, BlockKind::Generic, block.size, block.anchor, {});
    } else if (total - corners_pos == 1) {
        s.t1 = make_block(neg, BlockKind::Generic, block.size, block.anchor, {});
        s.t2 = make_block(pos, BlockKind::Generic, block.size, block.anchor, {});
    } else {
        throw std::invalid_argument("degenerate split: no side holds exactly one corner");
    }
    for (const auto& c : block.corners) {
        if (s.t1.contains(c)) s.t1.corners.push_back(c);
        else s.t2.corners.push_back(c);
    }
    return s;
}

}  // namespace

std::string block_kind_name(BlockKind k) {
    switch (k) {
        case BlockKind::TriUp: return "tri_up";
        case BlockKind::TriDown: return "tri_down";
        case BlockKind::SquarePyramid: return "square_pyramid";
        case BlockKind::Simplex: return "simplex";
        case BlockKind::HalfCuboctahedron: return "half_cuboctahedron";
        case BlockKind::Tetrahedron: return "tetrahedron";
        case BlockKind::Generic: return "generic";
    }
    return "generic";
}

bool Block::contains(const LatticeCoord& c) const {
    return std::binary_search(members.begin(), members.end(), c);
}

LatticeCoord Frame::map(const LatticeCoord& c) const {
    if (lattice == Lattice::Honeycomb) return honeycomb_rot60(c, rot);
    auto u = fcc_to_cubic(c);
    std::array<int, 3> w{};
    for (int a = 0; a < 3; ++a) w[a] = sign[a] * u[perm[a]];
    return fcc_from_cubic(w);
}

Point Frame::map_dir(const Point& d) const {
    if (lattice == Lattice::Honeycomb) return rotate2d(d, rot * std::numbers::pi / 3.0);
    Point u = xyz_dir_to_cubic(d);
    Point w(0.0, 0.0, 0.0);
    for (int a = 0; a < 3; ++a) w[a] = sign[a] * u[perm[a]];
    return cubic_dir_to_xyz(w);
}

Frame lattice_gap_frame(Lattice l, const Point& normal) {
    Frame f;
    f.lattice = l;
    if (l == Lattice::Honeycomb) {
        int k = honeycomb_line_rotation(normal);
        if (k < 0) throw std::invalid_argument("gap normal is not perpendicular to a honeycomb lattice line");
        f.rot = k;
        return f;
    }
    if (!is_fcc_square_normal(normal)) throw std::invalid_argument("gap is not parallel to a square layer");
    Point u = xyz_dir_to_cubic(normal);
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (std::abs(u[a]) > std::abs(u[axis])) axis = a;
    int s = u[axis] > 0 ? 1 : -1;
    f.perm[axis] = 2;
    f.sign[axis] = s;
    int src = 0;
    for (int a = 0; a < 3; ++a) {
        if (a == axis) continue;
        f.perm[a] = src++;
        f.sign[a] = 1;
    }
    return f;
}

int first_upper_row(Lattice l, double offset) {
    double step = l == Lattice::Honeycomb ? kSqrt3 : kSqrt2;
    double lim = offset - 1e-12;
    int j = static_cast<int>(std::ceil(lim / step));
    while (step * (j - 1) >= lim) --j;
    while (step * j < lim) ++j;
    return j;
}

std::size_t BlockFamily::count() const {
    std::size_t s = 0;
    for (const auto& [_, b] : roles) s += b.count();
    return s;
}

std::vector<LatticeCoord> BlockFamily::all_members() const {
    std::vector<LatticeCoord> out;
    for (const auto& [_, b] : roles) out.insert(out.end(), b.members.begin(), b.members.end());
    std::sort(out.begin(), out.end());
    return out;
}

Block triangular_block(const LatticeCoord& anchor, TriOrientation o, int n) {
    require_size(n, 1);
    std::vector<LatticeCoord> m;
    int i0 = anchor[0], j0 = anchor[1];
    if (o == TriOrientation::Up) {
        for (int r = 0; r < n; ++r)
            for (int s = 0; s <= n - 1 - r; ++s) m.emplace_back(i0 + s, j0 + r);
        return make_block(std::move(m), BlockKind::TriUp, n, anchor,
                          {LatticeCoord(i0, j0), LatticeCoord(i0 + n - 1, j0), LatticeCoord(i0, j0 + n - 1)});
    }
    for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s) m.emplace_back(i0 - r + s, j0 + r);
    return make_block(std::move(m), BlockKind::TriDown, n, anchor,
                      {LatticeCoord(i0, j0), LatticeCoord(i0 - (n - 1), j0 + n - 1), LatticeCoord(i0, j0 + n - 1)});
}

Block square_pyramid_block(const LatticeCoord& anchor, int n, PyramidOrientation o) {
    require_size(n, 1);
    std::vector<LatticeCoord> m;
    int i0 = anchor[0], j0 = anchor[1], k0 = anchor[2];
    int sgn = o == PyramidOrientation::Up ? 1 : -1;
    int lift = o == PyramidOrientation::Up ? 0 : 1;
    for (int l = 0; l < n; ++l)
        for (int a = 0; a <= n - 1 - l; ++a)
            for (int b = 0; b <= n - 1 - l; ++b) m.emplace_back(i0 + a + lift * l, j0 + b + lift * l, k0 + sgn * l);
    int t = n - 1;
    std::vector<LatticeCoord> corners{LatticeCoord(i0, j0, k0), LatticeCoord(i0 + t, j0, k0),
                                      LatticeCoord(i0, j0 + t, k0), LatticeCoord(i0 + t, j0 + t, k0),
                                      LatticeCoord(i0 + lift * t, j0 + lift * t, k0 + sgn * t)};
    return make_block(std::move(m), BlockKind::SquarePyramid, n, anchor, std::move(corners));
}

Block simplex_block(const LatticeCoord& anchor, int n, SimplexOrientation o) {
    require_size(n, 1);
    std::vector<LatticeCoord> m;
    int i0 = anchor[0], j0 = anchor[1], k0 = anchor[2];
    int t = n - 1;
    for (int a = 0; a <= t; ++a)
        for (int b = 0; a + b <= t; ++b)
            for (int g = 0; a + b + g <= t; ++g) {
                if (o == SimplexOrientation::BottomX) m.emplace_back(i0 + a, j0 - g, k0 + b + g);
                else m.emplace_back(i0 - b, j0 + a, k0 + b + g);
            }
    std::vector<LatticeCoord> corners;
    if (o == SimplexOrientation::BottomX)
        corners = {LatticeCoord(i0, j0, k0), LatticeCoord(i0 + t, j0, k0), LatticeCoord(i0, j0, k0 + t),
                   LatticeCoord(i0, j0 - t, k0 + t)};
    else
        corners = {LatticeCoord(i0, j0, k0), LatticeCoord(i0, j0 + t, k0), LatticeCoord(i0 - t, j0, k0 + t),
                   LatticeCoord(i0, j0, k0 + t)};
    return make_block(std::move(m), BlockKind::Simplex, n, anchor, std::move(corners));
}

Block half_cuboctahedron_block(const LatticeCoord& anchor, int n, std::array<int, 3> face_sign) {
    require_size(n, 2);
    for (int s : face_sign)
        if (s != 1 && s != -1) throw std::invalid_argument("face_sign entries must be +-1");
    int s = n - 1;
    auto c = fcc_to_cubic(anchor);
    std::vector<LatticeCoord> m;
    std::vector<LatticeCoord> corners;
    for (int u = -s; u <= s; ++u)
        for (int v = -s; v <= s; ++v)
            for (int w = -s; w <= s; ++w) {
                if (((u + v + w) % 2) != 0) continue;
                if (std::abs(u) + std::abs(v) + std::abs(w) > 2 * s) continue;
                if (face_sign[0] * u + face_sign[1] * v + face_sign[2] * w < 0) continue;
                m.push_back(fcc_from_cubic({c[0] + u, c[1] + v, c[2] + w}));
                int nz = (std::abs(u) == s) + (std::abs(v) == s) + (std::abs(w) == s);
                if (nz == 2 && std::abs(u) + std::abs(v) + std::abs(w) == 2 * s)
                    corners.push_back(m.back());
            }
    return make_block(std::move(m), BlockKind::HalfCuboctahedron, n, anchor, std::move(corners));
}

BlockFamily trapezoid_family(int n, const GapDefect& gap) {
    require_size(n, 3);
    int j0 = first_upper_row(Lattice::Honeycomb, gap.offset);
    int i0 = static_cast<int>(std::floor((-3.0 * n - j0) / 2.0));
    return trapezoid_family_at(n, gap, i0);
}

// Canonical layout, row r = 0..n-1 at lattice row j0 + r, x = 2i + j:
//   outer_left  tri_up   size n    i in [i0, i0+n-1-r]
//   wedge_left  tri_down size n    i in [i0+n-r, i0+n]
//   middle      tri_up   size n-1  i in [i0+n+1, i0+2n-1-r]
//   wedge_right tri_down size n    i in [i0+2n-r, i0+2n]
//   outer_right tri_up   size n    i in [i0+2n+1, i0+3n-r]
// The two wedge tops meet above the apex of the middle block.
BlockFamily trapezoid_family_at(int n, const GapDefect& gap, int i0) {
    require_size(n, 3);
    BlockFamily f;
    f.lattice = Lattice::Honeycomb;
    f.gap = gap;
    f.frame = lattice_gap_frame(Lattice::Honeycomb, gap.normal);
    f.n = n;
    int j0 = first_upper_row(Lattice::Honeycomb, gap.offset);
    f.origin = LatticeCoord(i0, j0);
    std::map<std::string, Block> canon;
    canon["outer_left"] = triangular_block(LatticeCoord(i0, j0), TriOrientation::Up, n);
    canon["wedge_left"] = triangular_block(LatticeCoord(i0 + n, j0), TriOrientation::Down, n);
    canon["middle"] = triangular_block(LatticeCoord(i0 + n + 1, j0), TriOrientation::Up, n - 1);
    canon["wedge_right"] = triangular_block(LatticeCoord(i0 + 2 * n, j0), TriOrientation::Down, n);
    canon["outer_right"] = triangular_block(LatticeCoord(i0 + 2 * n + 1, j0), TriOrientation::Up, n);
    for (auto& [role, b] : canon) f.roles[role] = map_block(b, f.frame);
    return f;
}

BlockFamily cross_gable_family(int n, const GapDefect& gap) {
    require_size(n, 3);
    int k0 = first_upper_row(Lattice::Fcc, gap.offset);
    int o = static_cast<int>(std::floor(-(k0 + n - 2) / 2.0));
    return cross_gable_family_at(n, gap, o, o);
}

// Pinwheel arrangement around a middle pyramid of size m = n-1 whose base corner is
// (oi, oj) on the first shifted layer. Each simplex lies along one side of the middle
// pyramid and overhangs one corner; an outer pyramid of size n sits beyond it.
//   wedge_SE: east side, covers the south-east corner   (bottom edge along y)
//   wedge_NE: north side, covers the north-east corner  (bottom edge along x)
//   wedge_NW: west side, covers the north-west corner   (bottom edge along y)
//   wedge_SW: south side, covers the south-west corner  (bottom edge along x)
BlockFamily cross_gable_family_at(int n, const GapDefect& gap, int oi, int oj) {
    require_size(n, 3);
    BlockFamily f;
    f.lattice = Lattice::Fcc;
    f.gap = gap;
    f.frame = lattice_gap_frame(Lattice::Fcc, gap.normal);
    f.n = n;
    int k = first_upper_row(Lattice::Fcc, gap.offset);
    int m = n - 1;
    f.origin = LatticeCoord(oi, oj, k);
    std::map<std::string, Block> canon;
    canon["middle"] = square_pyramid_block(LatticeCoord(oi, oj, k), m);
    canon["wedge_SE"] = simplex_block(LatticeCoord(oi + m, oj - 1, k), n, SimplexOrientation::BottomY);
    canon["wedge_NW"] = simplex_block(LatticeCoord(oi - 1, oj, k), n, SimplexOrientation::BottomY);
    canon["wedge_NE"] = simplex_block(LatticeCoord(oi, oj + m, k), n, SimplexOrientation::BottomX);
    canon["wedge_SW"] = simplex_block(LatticeCoord(oi - 1, oj - 1, k), n, SimplexOrientation::BottomX);
    canon["outer_E"] = square_pyramid_block(LatticeCoord(oi + m + 1, oj - 1, k), n);
    canon["outer_W"] = square_pyramid_block(LatticeCoord(oi - 1 - n, oj, k), n);
    canon["outer_N"] = square_pyramid_block(LatticeCoord(oi, oj + m + 1, k), n);
    canon["outer_S"] = square_pyramid_block(LatticeCoord(oi - 1, oj - 1 - n, k), n);
    for (auto& [role, b] : canon) f.roles[role] = map_block(b, f.frame);
    return f;
}

std::map<std::string, Point> default_role_directions(const BlockFamily& f) {
    std::map<std::string, Point> canon;
    if (f.lattice == Lattice::Honeycomb) {
        canon["outer_left"] = Point(0.0, -1.0);
        canon["outer_right"] = Point(0.0, -1.0);
        canon["wedge_left"] = Point(-kSqrt3 / 2.0, -0.5);
        canon["wedge_right"] = Point(kSqrt3 / 2.0, -0.5);
        canon["middle"] = Point(0.0, 1.0);
    } else {
        for (const char* r : {"outer_E", "outer_W", "outer_N", "outer_S"}) canon[r] = Point(0.0, 0.0, -1.0);
        // down and out, perpendicular to the face shared with the outer pyramid
        canon["wedge_SE"] = Point(kSqrt2, 0.0, -1.0) * (1.0 / kSqrt3);
        canon["wedge_NW"] = Point(-kSqrt2, 0.0, -1.0) * (1.0 / kSqrt3);
        canon["wedge_NE"] = Point(0.0, kSqrt2, -1.0) * (1.0 / kSqrt3);
        canon["wedge_SW"] = Point(0.0, -kSqrt2, -1.0) * (1.0 / kSqrt3);
        canon["middle"] = Point(0.0, 0.0, 1.0);
    }
    std::map<std::string, Point> out;
    for (auto& [role, d] : canon) out[role] = f.frame.map_dir(d);
    // exactly along the normal, so that undoing the gap cancels bitwise
    for (auto& [role, d] : out) {
        if (role.rfind("outer", 0) == 0) d = -f.gap.normal;
        if (role == "middle") d = f.gap.normal;
    }
    return out;
}

std::map<std::string, int> role_stages(const BlockFamily& f) {
    std::map<std::string, int> out;
    for (const auto& [role, _] : f.roles) {
        if (role.rfind("outer", 0) == 0) out[role] = 1;
        else if (role.rfind("wedge", 0) == 0) out[role] = 2;
        else out[role] = 3;
    }
    return out;
}

Split split_block_by_line(const Block& block, const Point& normal, double offset) {
    if (normal.dim != 2) throw std::invalid_argument("split_block_by_line needs a 2D normal");
    if (block.corners.size() != 3) throw std::invalid_argument("split_block_by_line needs a triangular block");
    return split_generic(block, Lattice::Honeycomb, normal, offset);
}

Split split_tetrahedron_by_plane(const Block& block, const Point& normal, double offset) {
    if (normal.dim != 3) throw std::invalid_argument("split_tetrahedron_by_plane needs a 3D normal");
    if (block.corners.size() != 4) throw std::invalid_argument("split_tetrahedron_by_plane needs a tetrahedral block");
    Point nn = normalized(normal);
    if (is_fcc_honeycomb_normal(nn) || is_fcc_honeycomb_normal(-nn))
        throw std::invalid_argument("plane is parallel to a honeycomb layer");
    return split_generic(block, Lattice::Fcc, normal, offset);
}

}  // namespace gapsat
