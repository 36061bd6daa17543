#pragma once

#include <string>
#include <vector>

#include "gapsat/lattice.hpp"
#include "gapsat/witness.hpp"

namespace gapsat {

// A window of a defective packing written to disk.
struct PatchFile {
    DefectivePacking base;
    Region region;
    std::vector<Point> centers;
};

PatchFile generate_patch(const DefectivePacking& pk, const Region& window);
std::string patch_to_json(const PatchFile& p);
PatchFile patch_from_json(const std::string& text);  // throws ParseError

// Shortest decimal that reads back to the same double.
std::string fmt_real(double v);

// 100 SVG units per diameter.
constexpr double kSvgScale = 50.0;

// Circles of radius 1 per center, the gap line, and removed spheres as dashed outlines.
std::string render_svg(const DefectivePacking& pk, const Region& view, const std::vector<TaggedCenter>& centers,
                       const std::vector<Point>& removed);

// Unit icosphere used for every sphere (one subdivision of the icosahedron).
std::size_t icosphere_vertices();
std::size_t icosphere_faces();

// One icosphere per center; material groups background / moved / inserted.
std::string render_obj(const std::vector<TaggedCenter>& centers, const std::string& mtl_file);
std::string render_mtl();

struct DeltaRow {
    double d = 0.0;
    double delta = 0.0;
    int n = 0;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

// Sweeps d over [d_min, d_max] in `steps` points on a lattice-aligned gap. Rows are in grid
// order whatever the thread count.
std::vector<DeltaRow> delta_curve(Lattice l, const Point& normal, double offset, double d_min, double d_max, int steps,
                                  int n, int threads);
std::string delta_csv(const std::vector<DeltaRow>& rows);

}  // namespace gapsat
