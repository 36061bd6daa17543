#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapsat/lattice.hpp"

namespace gapsat {

class PackingPatch;

struct Move {
    LatticeCoord coord;
    Point to;
    // Exact displacement from the undisplaced lattice point, when known. Spheres with
    // bitwise equal shifts form one rigid group in strict checking.
    std::optional<Point> shift;

    bool operator==(const Move&) const = default;
};

struct Witness {
    DefectivePacking base;
    Region region;
    std::vector<LatticeCoord> removals;
    std::vector<Move> moves;
    std::vector<Point> insertions;
    std::string provenance;
};

bool operator==(const Witness& a, const Witness& b);

struct CheckReport {
    bool accepted = false;
    long long net_gain = 0;
    std::vector<std::string> violations;
    bool strict_mode = false;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Independent verifier: rebuilds the final configuration from the lattice and scans
// all pairs. Throws std::invalid_argument on coordinates of the wrong arity.
CheckReport check_witness(const Witness& w, bool strict, const ToleranceConfig& tol = {});

// Collects the edits of a patch over a defective packing.
Witness witness_from_patch(const PackingPatch& patch, const std::string& provenance);

std::string witness_to_json(const Witness& w);
Witness witness_from_json(const std::string& text);
void write_witness(const Witness& w, const std::string& path);
Witness read_witness(const std::string& path);

// Final sphere centers of a witness, tagged 0 background, 1 moved, 2 inserted.
struct TaggedCenter {
    Point at;
    int tag = 0;
};
std::vector<TaggedCenter> witness_final_centers(const Witness& w, double margin);

}  // namespace gapsat
