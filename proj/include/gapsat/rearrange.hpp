#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapsat/blocks.hpp"
#include "gapsat/packing.hpp"
#include "gapsat/witness.hpp"

namespace gapsat {

struct StageMove {
    std::string role;
    Point direction;  // unit
    double distance = 0.0;
};

struct MoveStage {
    int index = 0;
    std::vector<StageMove> moves;
};

struct WidenSchedule {
    BlockFamily family;
    std::vector<MoveStage> stages;
    // Removed before the last stage (apex of the middle pyramid in 3D).
    std::optional<LatticeCoord> removed;
    double delta = 0.0;
    double width = 0.0;                  // gap width the schedule was computed for
    std::array<double, 3> params{0, 0, 0};  // stage distances d1, d2, d3
};

struct IterationPlan {
    double d0 = 0.0;
    double target = 2.0;
    std::vector<double> widths;     // d_0 .. d_k
    std::vector<long long> sizes;   // n_0 .. n_{k-1}
    int k = 0;
};

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The construction exists but exceeds the configured size budget.
class BudgetError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

// Executes the stages in order. With check_stages, validity is checked after every
// stage; on failure the offending stage is rolled back and its report returned.
ValidityReport apply_schedule(PackingPatch& patch, const WidenSchedule& s, bool check_stages);

// Builds a schedule for a family with the default role directions.
WidenSchedule make_schedule(const BlockFamily& f, double width, double d1, double d2, double d3);

// Feasibility of the three-stage move of a family over a defective packing, evaluated
// on every pair whose distance can change. Exact lattice arithmetic is used for pairs
// that start on the same side of the gap.
class WideningProblem {
public:
    WideningProblem(const DefectivePacking& pk, const BlockFamily& family, double d_cap = -1.0);

    bool stage_feasible(int stage, double d1, double d2, double d3) const;
    bool feasible(double d1, double d2, double d3) const;
    // Largest d2 in [0, 2d] keeping stage 2 feasible, by bisection.
    double max_d2(double d1, double eps) const;
    // Largest d3 in [0, d3 cap] keeping stage 3 feasible, by bisection.
    double max_d3(double d1, double d2, double eps) const;

    double d3_cap() const { return d3_cap_; }
    std::size_t pair_count() const { return pairs_.size(); }

private:
    struct Pair {
        int body_a, body_b;  // -1 static
        int stage;
        Point lat;           // lattice part of a - b
        Point shift;         // shift difference, zero for same-side pairs
        double excess;       // |lat|^2 - 4, exact
    };
    std::vector<Pair> pairs_;
    std::vector<Point> dir_;    // per body
    std::vector<int> stage_;    // per body
    double width_;
    double d3_cap_;
};

struct OptimizerOptions {
    double eps_opt = 1e-9;
    int grid = 20;
    double shrink = 1e-9;
};

WidenSchedule optimize_family(const DefectivePacking& pk, const BlockFamily& family,
                              const OptimizerOptions& opt = {});
WidenSchedule optimize_widening_2d(const DefectivePacking& pk, int n, const OptimizerOptions& opt = {});
WidenSchedule optimize_widening_3d(const DefectivePacking& pk, int n, const OptimizerOptions& opt = {});

// Smallest family size whose middle block can hold a nested family of the given size
// with one lattice step of clearance on every side.
long long nesting_outer_size(long long inner);

IterationPlan plan_iterations(double d0, const std::function<double(double)>& delta_fn, double target = 2.0,
                              int max_iterations = 200);

struct WitnessOptions {
    std::size_t max_centers = 400000;  // size budget of the working patch
    int optimizer_n = 4;               // family size used to compute each schedule
    ToleranceConfig tol;
    // Called with progress messages when set.
    std::function<void(const std::string&)> log;
};

Witness build_witness_2d(const DefectivePacking& pk, const WitnessOptions& opt = {});

// One widening iteration of the 3D construction: moves plus one removal, no insertion.
Witness build_witness_3d_step(const DefectivePacking& pk, int n, const WitnessOptions& opt = {});
// Full 3D chain: k iterations, then at least k + 1 insertions.
Witness build_witness_3d(const DefectivePacking& pk, const WitnessOptions& opt = {});

// Inserts a sphere directly when the gap already leaves room near the origin.
std::optional<Witness> direct_insertion_witness(const DefectivePacking& pk, double half_window = 8.0);

struct Reduction {
    std::vector<LatticeCoord> moved;  // members of the translated sub-block
    Point translation;
    double width = 0.0;               // normal width of each created gap
    std::vector<double> face_widths;  // per created face
    Witness result;                   // the rearranged configuration (moves only)
    bool valid = false;
};

Reduction reduce_line_gap(const DefectivePacking& pk, int n);
Reduction reduce_honeycomb_gap(const DefectivePacking& pk, int n, double translation = -1.0);
Reduction reduce_plane_gap(const DefectivePacking& pk, int n);

}  // namespace gapsat
