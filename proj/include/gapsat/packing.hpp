#pragma once

#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "gapsat/lattice.hpp"

namespace gapsat {

// Uniform grid over R^d, cell edge = one sphere diameter.
class SpatialHash {
public:
    explicit SpatialHash(double cell = 2.0) : cell_(cell) {}

    void insert(int key, const Point& p);
    void erase(int key, const Point& p);
    void clear() { cells_.clear(); }

    // Calls f(key) for every stored key within the cells overlapping the ball.
    template <class F>
    void query(const Point& p, double r, F&& f) const;

    double cell() const { return cell_; }

private:
    struct Cell {
        long long a, b, c;
        bool operator==(const Cell&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const Cell& c) const noexcept {
            return static_cast<std::size_t>(c.a * 73856093ll ^ c.b * 19349663ll ^ c.c * 83492791ll);
        }
    };
    Cell cell_of(const Point& p) const;

    double cell_;
    std::unordered_map<Cell, std::vector<int>, CellHash> cells_;
};

// Pair of center handles (see PackingPatch::handle_point), a < b.
struct Violation {
    int a = -1;
    int b = -1;
    double dist2 = 0.0;
    auto operator<=>(const Violation&) const = default;
};

struct ValidityReport {
    bool valid = true;
    std::vector<Violation> violations;  // sorted by (a, b)
    // Minimum over pairs closer than one hash cell; +inf if there are none.
    double min_dist2 = std::numeric_limits<double>::infinity();
};

struct EmptyBall {
    Point center;
    double radius = 0.0;
};

// A finite, editable set of unit-sphere centers inside a region, plus the frozen
// background of a defective lattice around it.
class PackingPatch {
public:
    // Free patch with no background.
    PackingPatch(int dim, const Region& region);
    // Patch over a defective packing. When `populate` is set the patch starts with
    // every lattice center inside the region; otherwise it starts empty.
    PackingPatch(const DefectivePacking& pk, const Region& region, bool populate = true);

    int dim() const { return dim_; }
    const Region& region() const { return region_; }
    const std::optional<DefectivePacking>& packing() const { return packing_; }

    int insert_center(const Point& p);
    Point remove_center(int id);
    // Moves every listed center by distance * direction; the direction must be unit.
    void translate_set(const std::vector<int>& ids, const Point& direction, double distance);
    void translate_by(const std::vector<int>& ids, const Point& t);

    bool contains(int id) const;
    const Point& at(int id) const;
    // Origin lattice coordinate of a center that came from the lattice.
    std::optional<LatticeCoord> origin(int id) const;
    // Accumulated displacement from the undisplaced lattice point (lattice centers only).
    const Point& shift(int id) const;
    std::optional<int> id_of(const LatticeCoord& c) const;
    std::vector<int> ids() const;
    std::size_t size() const { return alive_; }

    const std::vector<LatticeCenter>& background() const { return background_; }

    // Handles >= 0 are patch ids; handles < 0 encode background index -1 - h.
    const Point& handle_point(int h) const;

    // Nearest stored center (patch or background) to p, squared distance.
    double nearest_dist2(const Point& p) const;

    template <class F>
    void for_each_near(const Point& p, double r, F&& f) const {
        hash_.query(p, r, f);
    }

    // Lattice coordinates that were removed, lattice centers whose position differs
    // from the defect position, and centers with no lattice origin.
    std::vector<LatticeCoord> removed_coords() const;
    std::vector<int> moved_ids() const;
    std::vector<int> inserted_ids() const;

private:
    struct Entry {
        Point at;
        Point shift;
        std::optional<LatticeCoord> origin;
        bool alive = false;
    };

    int dim_;
    Region region_;
    std::optional<DefectivePacking> packing_;
    std::vector<Entry> entries_;
    std::size_t alive_ = 0;
    std::vector<LatticeCenter> background_;
    std::unordered_map<LatticeCoord, int, LatticeCoordHash> by_coord_;
    std::vector<LatticeCoord> removed_;
    SpatialHash hash_;
};

ValidityReport is_valid_packing(const PackingPatch& patch, double tol = ToleranceConfig{}.eps_valid);

EmptyBall largest_empty_ball(const PackingPatch& patch, const Region& search);

template <class F>
void SpatialHash::query(const Point& p, double r, F&& f) const {
    long long lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int i = 0; i < p.dim; ++i) {
        lo[i] = static_cast<long long>(std::floor((p[i] - r) / cell_));
        hi[i] = static_cast<long long>(std::floor((p[i] + r) / cell_));
    }
    for (long long a = lo[0]; a <= hi[0]; ++a)
        for (long long b = lo[1]; b <= hi[1]; ++b)
            for (long long c = lo[2]; c <= hi[2]; ++c) {
                auto it = cells_.find(Cell{a, b, c});
                if (it == cells_.end()) continue;
                for (int key : it->second) f(key);
            }
}

}  // namespace gapsat
