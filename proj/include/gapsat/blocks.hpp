#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gapsat/lattice.hpp"

namespace gapsat {

enum class BlockKind { TriUp, TriDown, SquarePyramid, Simplex, HalfCuboctahedron, Tetrahedron, Generic };

std::string block_kind_name(BlockKind k);

struct Block {
    std::vector<LatticeCoord> members;  // sorted, unique
    BlockKind kind = BlockKind::Generic;
    int size = 0;
    LatticeCoord anchor;
    // Extreme lattice vertices (3 for triangles, 4 for tetrahedra).
    std::vector<LatticeCoord> corners;

    std::size_t count() const { return members.size(); }
    bool contains(const LatticeCoord& c) const;
};

// Lattice automorphism taking the canonical gap frame to the actual one.
// Honeycomb: rotation by rot * 60 degrees. Fcc: signed permutation of cubic axes.
struct Frame {
    Lattice lattice = Lattice::Honeycomb;
    int rot = 0;
    std::array<int, 3> perm{0, 1, 2};
    std::array<int, 3> sign{1, 1, 1};

    LatticeCoord map(const LatticeCoord& c) const;
    Point map_dir(const Point& d) const;
};

// Frame whose image of the canonical normal ((0,1) or (0,0,1)) is `normal`.
// Throws if the normal is not a lattice-line (honeycomb) or square-layer (fcc) normal.
Frame lattice_gap_frame(Lattice l, const Point& normal);

// First lattice row (honeycomb) or layer (fcc) index on the shifted side, in the
// canonical frame.
int first_upper_row(Lattice l, double offset);

struct BlockFamily {
    Lattice lattice = Lattice::Honeycomb;
    GapDefect gap;
    Frame frame;
    std::map<std::string, Block> roles;
    // Canonical placement data used by nesting.
    int n = 0;
    LatticeCoord origin;  // canonical coordinate of the family's reference point

    std::size_t count() const;
    std::vector<LatticeCoord> all_members() const;
};

enum class TriOrientation { Up, Down };
enum class PyramidOrientation { Up, Down };
// Simplices with one edge in a square layer: bottom edge along x or along y.
enum class SimplexOrientation { BottomX, BottomY };

// Up: anchor is the bottom-left corner. Down: anchor is the bottom vertex.
Block triangular_block(const LatticeCoord& anchor, TriOrientation o, int n);

// Anchor is the base corner with the smallest indices; Down hangs below the anchor layer.
Block square_pyramid_block(const LatticeCoord& anchor, int n, PyramidOrientation o = PyramidOrientation::Up);

// Anchor is the first point of the bottom edge; layers rise in k.
Block simplex_block(const LatticeCoord& anchor, int n, SimplexOrientation o = SimplexOrientation::BottomX);

// Half of the cuboctahedron of edge 2(n-1) centered at anchor, on the side
// where <cubic offset, face_sign> >= 0. face_sign holds +-1 per cubic axis.
Block half_cuboctahedron_block(const LatticeCoord& anchor, int n, std::array<int, 3> face_sign = {1, 1, 1});

// Roles outer_left, wedge_left, middle, wedge_right, outer_right. Rows start at
// the first shifted row; `origin_i` is the canonical i-index of the bottom-left member.
BlockFamily trapezoid_family(int n, const GapDefect& gap);
BlockFamily trapezoid_family_at(int n, const GapDefect& gap, int origin_i);

// Roles outer_N/S/E/W (pyramids of size n), wedge_NE/NW/SE/SW (simplices of size n),
// middle (pyramid of size n-1). `origin` is the canonical (i, j) of the middle base corner.
BlockFamily cross_gable_family(int n, const GapDefect& gap);
BlockFamily cross_gable_family_at(int n, const GapDefect& gap, int origin_i, int origin_j);

// Canonical direction of motion for each role.
std::map<std::string, Point> default_role_directions(const BlockFamily& f);
// Stage (1-based) in which each role moves.
std::map<std::string, int> role_stages(const BlockFamily& f);

struct Split {
    Block t1;  // side holding exactly one corner
    Block t2;
};

Split split_block_by_line(const Block& block, const Point& normal, double offset);
Split split_tetrahedron_by_plane(const Block& block, const Point& normal, double offset);

}  // namespace gapsat
