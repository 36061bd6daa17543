#include "gapsat/rearrange.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace gapsat {

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt2 = std::sqrt(2.0);

Region bounding_box(const std::vector<Point>& pts, double margin) {
    if (pts.empty()) throw std::invalid_argument("bounding box of no points");
    Region r;
    r.lo = pts.front();
    r.hi = pts.front();
    for (const auto& p : pts)
        for (int i = 0; i < p.dim; ++i) {
            r.lo[i] = std::min(r.lo[i], p[i]);
            r.hi[i] = std::max(r.hi[i], p[i]);
        }
    return r.expanded(margin);
}

std::vector<Point> member_positions(const DefectivePacking& pk, const std::vector<LatticeCoord>& cs) {
    std::vector<Point> out;
    out.reserve(cs.size());
    for (const auto& c : cs) out.push_back(defect_center(pk, c));
    return out;
}

Point shift_of(const DefectivePacking& pk, const LatticeCoord& c) {
    return in_upper_half(pk, lattice_point(pk.lattice, c)) ? pk.shift_vector() : zero_point(pk.dim());
}

DefectivePacking with_width(const DefectivePacking& pk, double d) {
    DefectivePacking q = pk;
    q.gap.width = d;
    return q;
}

std::optional<LatticeCoord> middle_apex(const BlockFamily& f) {
    if (f.lattice != Lattice::Fcc) return std::nullopt;
    int m = f.n - 1;
    LatticeCoord canon(f.origin[0], f.origin[1], f.origin[2] + m - 1);
    return f.frame.map(canon);
}

// Maximizes f on [a, b]; returns the best argument seen.
template <class F>
double golden_max(F&& f, double a, double b, double tol, double& best_val) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double best_x = a;
    best_val = f(a);
    double fb = f(b);
    if (fb > best_val) {
        best_val = fb;
        best_x = b;
    }
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        if (f1 > best_val) {
            best_val = f1;
            best_x = x1;
        }
        if (f2 > best_val) {
            best_val = f2;
            best_x = x2;
        }
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if (f1 > best_val) {
        best_val = f1;
        best_x = x1;
    }
    if (f2 > best_val) {
        best_val = f2;
        best_x = x2;
    }
    return best_x;
}

template <class F>
double bisect_max(F&& ok, double lo, double hi, double eps) {
    if (ok(hi)) return hi;
    while (hi - lo > eps) {
        double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

void say(const WitnessOptions& opt, const std::string& s) {
    if (opt.log) opt.log(s);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- schedules

WidenSchedule make_schedule(const BlockFamily& f, double width, double d1, double d2, double d3) {
    WidenSchedule s;
    s.family = f;
    s.width = width;
    s.params = {d1, d2, d3};
    s.delta = d3;
    s.removed = middle_apex(f);
    auto dirs = default_role_directions(f);
    auto stages = role_stages(f);
    for (int k = 1; k <= 3; ++k) {
        MoveStage st;
        st.index = k;
        for (const auto& [role, stg] : stages)
            if (stg == k) st.moves.push_back({role, dirs.at(role), s.params[static_cast<std::size_t>(k - 1)]});
        s.stages.push_back(st);
    }
    return s;
}

ValidityReport apply_schedule(PackingPatch& patch, const WidenSchedule& s, bool check_stages) {
    for (const auto& st : s.stages)
        for (const auto& mv : st.moves) {
            if (mv.distance < 0) throw std::invalid_argument("negative stage distance");
            if (std::abs(norm(mv.direction) - 1.0) > 1e-12) throw std::invalid_argument("stage direction not unit");
            auto it = s.family.roles.find(mv.role);
            if (it == s.family.roles.end()) throw std::invalid_argument("unknown role " + mv.role);
            for (const auto& c : it->second.members)
                if (!patch.id_of(c)) throw std::invalid_argument("block member missing from patch (role " + mv.role + ")");
        }
    ValidityReport rep;
    for (std::size_t k = 0; k < s.stages.size(); ++k) {
        const MoveStage& st = s.stages[k];
        std::optional<PackingPatch> snapshot;
        if (check_stages) snapshot.emplace(patch);
        if (s.removed && k + 1 == s.stages.size()) patch.remove_center(*patch.id_of(*s.removed));
        for (const auto& mv : st.moves) {
            if (mv.distance == 0.0) continue;
            std::vector<int> ids;
            for (const auto& c : s.family.roles.at(mv.role).members)
                if (auto id = patch.id_of(c)) ids.push_back(*id);
            patch.translate_by(ids, mv.direction * mv.distance);
        }
        if (check_stages) {
            rep = is_valid_packing(patch);
            if (!rep.valid) {
                patch = std::move(*snapshot);
                return rep;
            }
        }
    }
    if (!check_stages) rep = is_valid_packing(patch);
    return rep;
}

// ---------------------------------------------------------------- feasibility

WideningProblem::WideningProblem(const DefectivePacking& pk, const BlockFamily& family, double d_cap)
    : width_(pk.gap.width), d3_cap_(d_cap > 0 ? d_cap : 2.0) {
    const double d = width_;
    auto dirs = default_role_directions(family);
    auto stages = role_stages(family);
    std::map<LatticeCoord, int> body_of;
    int body = 0;
    for (const auto& [role, blk] : family.roles) {
        dir_.push_back(dirs.at(role));
        stage_.push_back(stages.at(role));
        for (const auto& c : blk.members) body_of[c] = body;
        ++body;
    }
    // the removed apex stays in place until it disappears before stage 3
    std::optional<LatticeCoord> apex = middle_apex(family);
    int apex_body = -1;
    int middle_body = -1;
    if (apex) {
        middle_body = body_of.at(*apex);
        apex_body = body;
        dir_.push_back(zero_point(pk.dim()));
        stage_.push_back(0);
        body_of[*apex] = apex_body;
    }
    auto bound = [&](int b) {
        if (b < 0) return 0.0;
        switch (stage_[static_cast<std::size_t>(b)]) {
            case 1: return d;
            case 2: return 2.0 * d;
            case 3: return d3_cap_;
            default: return 0.0;
        }
    };
    double reach = 2.0 + d + 2.0 * d + d3_cap_ + 0.5;
    std::vector<LatticeCoord> members = family.all_members();
    Region box = bounding_box(member_positions(pk, members), reach);
    std::vector<LatticeCenter> pts = enumerate_centers(pk, box);
    SpatialHash hash(2.0);
    for (std::size_t i = 0; i < pts.size(); ++i) hash.insert(static_cast<int>(i), pts[i].at);
    auto body_at = [&](std::size_t i) {
        auto it = body_of.find(pts[i].coord);
        return it == body_of.end() ? -1 : it->second;
    };
    for (std::size_t a = 0; a < pts.size(); ++a) {
        int ba = body_at(a);
        if (ba < 0) continue;
        double ra = 2.0 + bound(ba) + std::max({d, 2.0 * d, d3_cap_});
        hash.query(pts[a].at, ra, [&](int key) {
            auto b = static_cast<std::size_t>(key);
            int bb = body_at(b);
            if (bb == ba) return;
            if (bb >= 0 && b < a) return;  // family pairs once
            bool a_apex = ba == apex_body, b_apex = bb == apex_body;
            if ((a_apex && bb == middle_body) || (b_apex && ba == middle_body)) return;
            int sa = stage_[static_cast<std::size_t>(ba)];
            int sb = bb < 0 ? 0 : stage_[static_cast<std::size_t>(bb)];
            int st = std::max(sa, sb);
            if (st == 0) return;
            if ((a_apex || b_apex) && st >= 3) return;
            Point e = pts[a].at - pts[b].at;
            double lim = 2.0 + bound(ba) + bound(bb);
            if (dot(e, e) >= lim * lim) return;
            Pair p;
            p.body_a = ba;
            p.body_b = bb;
            p.stage = st;
            Point sa_shift = shift_of(pk, pts[a].coord), sb_shift = shift_of(pk, pts[b].coord);
            p.lat = lattice_point(pk.lattice, pts[a].coord - pts[b].coord);
            p.shift = sa_shift - sb_shift;
            p.excess = static_cast<double>(lattice_norm2(pk.lattice, pts[a].coord - pts[b].coord) - 4);
            pairs_.push_back(p);
        });
    }
}

bool WideningProblem::stage_feasible(int stage, double d1, double d2, double d3) const {
    const double dist[4] = {0.0, d1, d2, d3};
    auto disp = [&](int b, Point& out) {
        out.x = {0.0, 0.0, 0.0};
        if (b < 0) return;
        int s = stage_[static_cast<std::size_t>(b)];
        if (s == 0 || s > stage) return;
        out = dir_[static_cast<std::size_t>(b)] * dist[s];
    };
    Point da, db;
    for (const auto& p : pairs_) {
        if (p.stage != stage) continue;
        disp(p.body_a, da);
        disp(p.body_b, db);
        // shift + displacement cancels exactly when a move undoes the gap
        Point w = p.shift + (da - db);
        double ex = p.excess + 2.0 * dot(p.lat, w) + dot(w, w);
        if (ex < 0.0) return false;
    }
    return true;
}

bool WideningProblem::feasible(double d1, double d2, double d3) const {
    return stage_feasible(1, d1, d2, d3) && stage_feasible(2, d1, d2, d3) && stage_feasible(3, d1, d2, d3);
}

double WideningProblem::max_d2(double d1, double eps) const {
    if (!stage_feasible(2, d1, 0.0, 0.0)) return -1.0;
    return bisect_max([&](double x) { return stage_feasible(2, d1, x, 0.0); }, 0.0, 2.0 * width_, eps);
}

double WideningProblem::max_d3(double d1, double d2, double eps) const {
    if (!stage_feasible(3, d1, d2, 0.0)) return -1.0;
    return bisect_max([&](double x) { return stage_feasible(3, d1, d2, x); }, 0.0, d3_cap_, eps);
}

// ---------------------------------------------------------------- optimizer

WidenSchedule optimize_family(const DefectivePacking& pk, const BlockFamily& family, const OptimizerOptions& opt) {
    const double d = pk.gap.width;
    if (!(d >= 0.0)) throw std::invalid_argument("negative gap width");
    WideningProblem prob(pk, family);
    const int G = std::max(2, opt.grid);
    const double eps = opt.eps_opt;

    struct Best {
        double d1 = 0, d2 = 0, d3 = -1;
        int a = 0, b = 0;
    } best;
    for (int a = 0; a < G; ++a) {
        double d1 = a == G - 1 ? d : d * a / (G - 1);
        if (!prob.stage_feasible(1, d1, 0, 0)) continue;
        double m2 = prob.max_d2(d1, eps);
        if (m2 < 0) continue;
        for (int b = 0; b < G; ++b) {
            double d2 = m2 * b / (G - 1);
            double d3 = prob.max_d3(d1, d2, eps);
            if (d3 > best.d3) best = {d1, d2, d3, a, b};
        }
    }
    if (best.d3 < 0) throw InfeasibleError("infeasible family placement: no stage-1 move is valid");

    if (d > 0 && best.d3 > 0) {
        // refine around the best grid cell
        double a_lo = d * std::max(0, best.a - 1) / (G - 1), a_hi = best.a + 1 >= G - 1 ? d : d * (best.a + 1) / (G - 1);
        double t_lo = std::max(0, best.b - 1) / double(G - 1), t_hi = std::min(G - 1, best.b + 1) / double(G - 1);
        auto inner = [&](double d1, double& arg_d2) {
            arg_d2 = 0;
            if (!prob.stage_feasible(1, d1, 0, 0)) return -1.0;
            double m2 = prob.max_d2(d1, eps);
            if (m2 < 0) {
                arg_d2 = 0;
                return -1.0;
            }
            double val = -1.0;
            double t = golden_max(
                [&](double tt) { return prob.max_d3(d1, m2 * tt, eps); }, t_lo, t_hi, 1e-9, val);
            arg_d2 = m2 * t;
            return val;
        };
        double val = -1.0;
        double d1 = golden_max(
            [&](double x) {
                double tmp;
                return inner(x, tmp);
            },
            a_lo, a_hi, eps, val);
        double d2 = 0.0;
        double v = inner(d1, d2);
        if (v > best.d3) best = {d1, d2, v, best.a, best.b};
        // a first stage within rounding of d closes the gap exactly
        if (best.d1 != d && std::abs(best.d1 - d) <= 1e-12 * std::max(1.0, d) && prob.stage_feasible(1, d, 0, 0)) {
            double d2 = std::min(best.d2, prob.max_d2(d, eps));
            double v3 = d2 >= 0 ? prob.max_d3(d, d2, eps) : -1.0;
            if (v3 >= 0) best = {d, d2, v3, best.a, best.b};
        }
    }
    double delta = std::max(0.0, best.d3) * (1.0 - opt.shrink);
    if (!prob.feasible(best.d1, best.d2, delta)) delta = 0.0;
    return make_schedule(family, d, best.d1, best.d2, delta);
}

namespace {

void verify_stages(const DefectivePacking& pk, const WidenSchedule& s) {
    std::vector<LatticeCoord> members = s.family.all_members();
    Region region = bounding_box(member_positions(pk, members), 3.0 * pk.gap.width + 4.0);
    PackingPatch patch(pk, region, true);
    ValidityReport rep = apply_schedule(patch, s, true);
    if (!rep.valid) throw InfeasibleError("optimized schedule fails a stage-boundary validity check");
}

}  // namespace

WidenSchedule optimize_widening_2d(const DefectivePacking& pk, int n, const OptimizerOptions& opt) {
    if (pk.lattice != Lattice::Honeycomb) throw std::invalid_argument("optimize_widening_2d needs the honeycomb lattice");
    if (n < 3) throw std::invalid_argument("family size must be at least 3");
    BlockFamily f = trapezoid_family(n, pk.gap);
    WidenSchedule s = optimize_family(pk, f, opt);
    verify_stages(pk, s);
    return s;
}

WidenSchedule optimize_widening_3d(const DefectivePacking& pk, int n, const OptimizerOptions& opt) {
    if (pk.lattice != Lattice::Fcc) throw std::invalid_argument("optimize_widening_3d needs the fcc lattice");
    if (n < 3) throw std::invalid_argument("family size must be at least 3");
    BlockFamily f = cross_gable_family(n, pk.gap);
    WidenSchedule s = optimize_family(pk, f, opt);
    verify_stages(pk, s);
    return s;
}

// ---------------------------------------------------------------- planning

long long nesting_outer_size(long long inner) {
    if (inner > LLONG_MAX / 4) return LLONG_MAX / 4;
    return 3 * inner + 6;
}

IterationPlan plan_iterations(double d0, const std::function<double(double)>& delta_fn, double target,
                              int max_iterations) {
    if (!(d0 > 0.0)) throw InfeasibleError("cannot reach target: gap width " + fmt(d0) + " is not positive");
    IterationPlan p;
    p.d0 = d0;
    p.target = target;
    p.widths.push_back(d0);
    double d = d0;
    while (d < target) {
        if (p.k >= max_iterations)
            throw BudgetError("required size exceeds budget: more than " + std::to_string(max_iterations) +
                              " iterations needed from width " + fmt(d0) + ", reached " + fmt(d) + " so far");
        double delta = delta_fn(d);
        if (!(delta > 0.0)) throw InfeasibleError("cannot reach target: no widening at d = " + fmt(d));
        d += delta;
        p.widths.push_back(d);
        ++p.k;
    }
    p.sizes.assign(static_cast<std::size_t>(p.k), 3);
    for (int t = p.k - 2; t >= 0; --t)
        p.sizes[static_cast<std::size_t>(t)] = nesting_outer_size(p.sizes[static_cast<std::size_t>(t + 1)]);
    return p;
}

// ---------------------------------------------------------------- witnesses

namespace {

// Shifts that agree to rounding are made bitwise equal, so that contacts between
// spheres with different move histories cancel exactly. Moves that land back on the
// defect position are dropped. Each center moves by at most 1e-12.
Witness snap_shifts(Witness w) {
    const DefectivePacking& pk = w.base;
    std::vector<Point> reps{zero_point(pk.dim()), pk.shift_vector()};
    auto close = [](const Point& a, const Point& b) {
        for (int i = 0; i < a.dim; ++i)
            if (std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) > 1e-12) return false;
        return true;
    };
    std::vector<Move> kept;
    for (Move m : w.moves) {
        if (m.shift) {
            auto it = std::find_if(reps.begin(), reps.end(), [&](const Point& r) { return close(r, *m.shift); });
            if (it == reps.end()) reps.push_back(*m.shift);
            else m.shift = *it;
            m.to = lattice_point(pk.lattice, m.coord) + *m.shift;
            if (*m.shift == shift_of(pk, m.coord)) continue;
        }
        kept.push_back(m);
    }
    w.moves = std::move(kept);
    return w;
}

// Centers needed for a patch around a family of size n, rough upper estimate.
double estimate_patch_centers(Lattice l, long long n) {
    double nn = static_cast<double>(n);
    if (l == Lattice::Honeycomb) {
        double w = 6.0 * nn + 16.0, h = kSqrt3 * nn + 16.0;
        return w * h / (2.0 * kSqrt3);
    }
    double w = 6.0 * nn + 16.0, h = kSqrt2 * nn + 16.0;
    return w * w * h / (4.0 * kSqrt2);
}

// Most iterations whose nested families still fit in the budget.
int iteration_cap(Lattice l, std::size_t max_centers) {
    long long n = 3;
    int k = 1;
    while (k < 200) {
        long long next = nesting_outer_size(n);
        if (estimate_patch_centers(l, next) > static_cast<double>(max_centers)) break;
        n = next;
        ++k;
    }
    return k;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

std::string join(const std::vector<long long>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

// Positions of the centers bounding the void beneath the middle block of a family.
Region void_search_box(const PackingPatch& patch, const BlockFamily& f) {
    const DefectivePacking& pk = *patch.packing();
    std::vector<Point> pts;
    const Block& mid = f.roles.at("middle");
    LatticeCoord down = f.lattice == Lattice::Honeycomb ? f.frame.map(LatticeCoord(0, -1)) - f.frame.map(LatticeCoord(0, 0))
                                                        : f.frame.map(LatticeCoord(0, 0, -1)) - f.frame.map(LatticeCoord(0, 0, 0));
    int base_layer = f.origin[f.lattice == Lattice::Honeycomb ? 1 : 2];
    for (const auto& c : mid.members) {
        auto id = patch.id_of(c);
        if (!id) continue;
        // base members are those whose canonical row equals the family's first row
        LatticeCoord below = c + down;
        bool base = !std::binary_search(mid.members.begin(), mid.members.end(), below);
        if (!base) continue;
        pts.push_back(patch.at(*id));
        pts.push_back(defect_center(pk, below));
    }
    (void)base_layer;
    Region r = bounding_box(pts, 0.0);
    Region clip = patch.region();
    for (int i = 0; i < r.dim(); ++i) {
        r.lo[i] = std::max(r.lo[i], clip.lo[i]);
        r.hi[i] = std::min(r.hi[i], clip.hi[i]);
    }
    return r;
}

int insert_into_void(PackingPatch& patch, const Region& search, int count, const ToleranceConfig& tol,
                     double& min_radius) {
    int inserted = 0;
    min_radius = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        EmptyBall b = largest_empty_ball(patch, search);
        if (!(b.radius * b.radius >= 4.0 - tol.eps_valid)) break;
        patch.insert_center(b.center);
        min_radius = std::min(min_radius, b.radius);
        ++inserted;
    }
    return inserted;
}

}  // namespace

std::optional<Witness> direct_insertion_witness(const DefectivePacking& pk, double half_window) {
    Point foot = pk.gap.normal * (pk.gap.offset + 0.5 * pk.gap.width);
    Region search = Region::cube(pk.dim(), half_window);
    for (int i = 0; i < pk.dim(); ++i) {
        search.lo[i] += foot[i];
        search.hi[i] += foot[i];
    }
    PackingPatch patch(pk, search.expanded(2.5), true);
    EmptyBall b = largest_empty_ball(patch, search);
    if (!(b.radius * b.radius >= 4.0 - ToleranceConfig{}.eps_valid)) return std::nullopt;
    patch.insert_center(b.center);
    return witness_from_patch(patch, "direct insertion into a gap of width " + fmt(pk.gap.width) +
                                         ", clearance radius " + fmt(b.radius));
}

Witness build_witness_2d(const DefectivePacking& pk, const WitnessOptions& opt) {
    if (pk.lattice != Lattice::Honeycomb) throw std::invalid_argument("build_witness_2d needs the honeycomb lattice");
    lattice_gap_frame(pk.lattice, pk.gap.normal);  // lattice-line check
    const double d0 = pk.gap.width;
    if (!(d0 > 0.0)) throw InfeasibleError("cannot reach target: gap width is 0, no widening is possible");

    std::map<double, WidenSchedule> cache;
    auto schedule_at = [&](double d) -> const WidenSchedule& {
        auto it = cache.find(d);
        if (it != cache.end()) return it->second;
        WidenSchedule s = optimize_widening_2d(with_width(pk, d), opt.optimizer_n);
        say(opt, "width " + fmt(d) + ": delta " + fmt(s.delta));
        return cache.emplace(d, s).first->second;
    };
    IterationPlan plan = plan_iterations(d0, [&](double d) { return schedule_at(d).delta; }, 2.0,
                                         iteration_cap(Lattice::Honeycomb, opt.max_centers));
    say(opt, "plan: k = " + std::to_string(plan.k) + ", widths " + join(plan.widths) + ", sizes " + join(plan.sizes));

    if (plan.k == 0) {
        auto w = direct_insertion_witness(pk);
        if (!w) throw InfeasibleError("gap width " + fmt(d0) + " leaves no room for a circle near the origin");
        return *w;
    }
    double need = estimate_patch_centers(Lattice::Honeycomb, plan.sizes.front());
    if (need > static_cast<double>(opt.max_centers))
        throw BudgetError("required size exceeds budget: " + std::to_string(plan.k) +
                          " widening iterations from width " + fmt(d0) + " need an outermost family of size " +
                          std::to_string(plan.sizes.front()) + " (about " + fmt(need) + " centers, budget " +
                          std::to_string(opt.max_centers) + "); widths " + join(plan.widths));

    std::vector<BlockFamily> fams;
    fams.push_back(trapezoid_family(static_cast<int>(plan.sizes[0]), pk.gap));
    for (int t = 1; t < plan.k; ++t) {
        const BlockFamily& outer = fams.back();
        int n = outer.n;
        int m = static_cast<int>(plan.sizes[static_cast<std::size_t>(t)]);
        int i0 = outer.origin[0];
        int lo = i0 + n + 3, hi = i0 + 2 * n - 3 * m - 3;
        if (lo > hi) throw InfeasibleError("nested family does not fit");
        fams.push_back(trapezoid_family_at(m, pk.gap, lo + (hi - lo) / 2));
    }
    Region region = bounding_box(member_positions(pk, fams.front().all_members()), 3.0 * plan.widths.back() + 4.0);
    PackingPatch patch(pk, region, true);
    say(opt, "patch with " + std::to_string(patch.size()) + " centers");

    for (int t = 0; t < plan.k; ++t) {
        const WidenSchedule& base = schedule_at(plan.widths[static_cast<std::size_t>(t)]);
        WidenSchedule s = make_schedule(fams[static_cast<std::size_t>(t)], base.width, base.params[0], base.params[1],
                                        base.params[2]);
        ValidityReport rep = apply_schedule(patch, s, true);
        if (!rep.valid)
            throw InfeasibleError("iteration " + std::to_string(t) + " failed a stage-boundary validity check");
        say(opt, "iteration " + std::to_string(t) + " applied, width now " +
                     fmt(plan.widths[static_cast<std::size_t>(t + 1)]));
    }
    Region search = void_search_box(patch, fams.back());
    double r = 0.0;
    if (insert_into_void(patch, search, 1, opt.tol, r) != 1)
        throw InfeasibleError("no room for a circle under the last middle block");
    std::ostringstream prov;
    prov << "honeycomb gap of width " << fmt(d0) << "; " << plan.k << " widening iterations; widths "
         << join(plan.widths) << "; family sizes " << join(plan.sizes) << "; inserted circle clearance radius "
         << fmt(r);
    return snap_shifts(witness_from_patch(patch, prov.str()));
}

Witness build_witness_3d_step(const DefectivePacking& pk, int n, const WitnessOptions& opt) {
    if (pk.lattice != Lattice::Fcc) throw std::invalid_argument("build_witness_3d_step needs the fcc lattice");
    WidenSchedule s = optimize_widening_3d(pk, n);
    Region region = bounding_box(member_positions(pk, s.family.all_members()), 3.0 * pk.gap.width + 4.0);
    PackingPatch patch(pk, region, true);
    ValidityReport rep = apply_schedule(patch, s, true);
    if (!rep.valid) throw InfeasibleError("widening step failed a stage-boundary validity check");
    say(opt, "3D step: delta " + fmt(s.delta));
    return snap_shifts(witness_from_patch(patch, "one cross-gable widening step at width " + fmt(pk.gap.width) + ", delta " +
                                         fmt(s.delta) + ", n " + std::to_string(n)));
}

Witness build_witness_3d(const DefectivePacking& pk, const WitnessOptions& opt) {
    if (pk.lattice != Lattice::Fcc) throw std::invalid_argument("build_witness_3d needs the fcc lattice");
    lattice_gap_frame(pk.lattice, pk.gap.normal);
    const double d0 = pk.gap.width;
    if (!(d0 > 0.0)) throw InfeasibleError("cannot reach target: gap width is 0, no widening is possible");
    std::map<double, WidenSchedule> cache;
    const int nopt = std::max(3, opt.optimizer_n);
    auto schedule_at = [&](double d) -> const WidenSchedule& {
        auto it = cache.find(d);
        if (it != cache.end()) return it->second;
        WidenSchedule s = optimize_widening_3d(with_width(pk, d), nopt);
        say(opt, "width " + fmt(d) + ": delta " + fmt(s.delta));
        return cache.emplace(d, s).first->second;
    };
    IterationPlan plan = plan_iterations(d0, [&](double d) { return schedule_at(d).delta; }, 2.0,
                                         iteration_cap(Lattice::Fcc, opt.max_centers));
    if (plan.k == 0) {
        auto w = direct_insertion_witness(pk, 5.0);
        if (!w) throw InfeasibleError("gap width " + fmt(d0) + " leaves no room for a sphere near the origin");
        return *w;
    }
    // the last middle pyramid must leave room for k + 1 spheres
    long long last = 3;
    while ((last - 1) * (last - 1) < plan.k + 1) ++last;
    plan.sizes.back() = last;
    for (int t = plan.k - 2; t >= 0; --t)
        plan.sizes[static_cast<std::size_t>(t)] = nesting_outer_size(plan.sizes[static_cast<std::size_t>(t + 1)]);
    say(opt, "plan: k = " + std::to_string(plan.k) + ", widths " + join(plan.widths) + ", sizes " + join(plan.sizes));
    double need = estimate_patch_centers(Lattice::Fcc, plan.sizes.front());
    if (need > static_cast<double>(opt.max_centers))
        throw BudgetError("required size exceeds budget: " + std::to_string(plan.k) +
                          " widening iterations from width " + fmt(d0) + " need an outermost family of size " +
                          std::to_string(plan.sizes.front()) + " (about " + fmt(need) + " centers, budget " +
                          std::to_string(opt.max_centers) + "); widths " + join(plan.widths));

    std::vector<BlockFamily> fams;
    fams.push_back(cross_gable_family(static_cast<int>(plan.sizes[0]), pk.gap));
    for (int t = 1; t < plan.k; ++t) {
        const BlockFamily& outer = fams.back();
        int mo = outer.n - 1;
        int m = static_cast<int>(plan.sizes[static_cast<std::size_t>(t)]);
        int ai = outer.origin[0], aj = outer.origin[1];
        int lo_i = ai + m + 3, hi_i = ai + mo - 2 * m - 2;
        int lo_j = aj + m + 3, hi_j = aj + mo - 2 * m - 2;
        if (lo_i > hi_i || lo_j > hi_j) throw InfeasibleError("nested family does not fit");
        fams.push_back(cross_gable_family_at(m, pk.gap, lo_i + (hi_i - lo_i) / 2, lo_j + (hi_j - lo_j) / 2));
    }
    Region region = bounding_box(member_positions(pk, fams.front().all_members()), 3.0 * plan.widths.back() + 4.0);
    PackingPatch patch(pk, region, true);
    for (int t = 0; t < plan.k; ++t) {
        const WidenSchedule& base = schedule_at(plan.widths[static_cast<std::size_t>(t)]);
        WidenSchedule s = make_schedule(fams[static_cast<std::size_t>(t)], base.width, base.params[0], base.params[1],
                                        base.params[2]);
        ValidityReport rep = apply_schedule(patch, s, true);
        if (!rep.valid)
            throw InfeasibleError("iteration " + std::to_string(t) + " failed a stage-boundary validity check");
    }
    Region search = void_search_box(patch, fams.back());
    double r = 0.0;
    int got = insert_into_void(patch, search, plan.k + 1, opt.tol, r);
    if (got < plan.k + 1)
        throw InfeasibleError("only " + std::to_string(got) + " spheres fit under the last middle pyramid, need " +
                              std::to_string(plan.k + 1));
    std::ostringstream prov;
    prov << "fcc square-layer gap of width " << fmt(d0) << "; " << plan.k << " widening iterations, " << plan.k
         << " removals; widths " << join(plan.widths) << "; family sizes " << join(plan.sizes) << "; " << got
         << " insertions, min clearance radius " << fmt(r);
    return snap_shifts(witness_from_patch(patch, prov.str()));
}

// ---------------------------------------------------------------- reductions

namespace {

// Largest t such that translating `ids` by t * dir keeps every pair at distance >= 2,
// computed from the exact quadratic of each pair. Returns hi if nothing blocks.
double max_rigid_translation(const PackingPatch& patch, const std::vector<int>& ids, const Point& dir, double hi) {
    const DefectivePacking& pk = *patch.packing();
    std::set<int> moving(ids.begin(), ids.end());
    double best = hi;
    for (int id : ids) {
        const Point& p = patch.at(id);
        LatticeCoord ca = *patch.origin(id);
        const Point& sa = patch.shift(id);
        patch.for_each_near(p, 2.0 + hi, [&](int h) {
            if (moving.count(h)) return;
            LatticeCoord cb;
            Point sb;
            bool lattice_b = true;
            if (h >= 0) {
                auto o = patch.origin(h);
                if (o) {
                    cb = *o;
                    sb = patch.shift(h);
                } else {
                    lattice_b = false;
                }
            } else {
                cb = patch.background()[static_cast<std::size_t>(-1 - h)].coord;
                sb = shift_of(pk, cb);
            }
            Point e;
            double excess;
            if (lattice_b) {
                e = lattice_point(pk.lattice, ca - cb) + (sa - sb);
                excess = sa == sb ? static_cast<double>(lattice_norm2(pk.lattice, ca - cb) - 4) : dot(e, e) - 4.0;
            } else {
                e = p - patch.handle_point(h);
                excess = dot(e, e) - 4.0;
            }
            // |e + t dir|^2 - 4 = t^2 + 2 (e.dir) t + excess
            double bdot = dot(e, dir);
            if (excess < 0) {
                best = 0.0;
                return;
            }
            if (bdot >= 0) return;
            double disc = bdot * bdot - excess;
            if (disc <= 0) return;
            // blocked on (t1, t2); an interval ending within rounding of 0 is a sliding contact
            double t1 = -bdot - std::sqrt(disc), t2 = -bdot + std::sqrt(disc);
            if (t2 <= 1e-12) return;
            best = std::min(best, std::max(0.0, t1));
        });
    }
    return best;
}

Point centroid(const DefectivePacking& pk, const std::vector<LatticeCoord>& cs) {
    Point c = zero_point(pk.dim());
    for (const auto& x : cs) c += lattice_point(pk.lattice, x);
    return c * (1.0 / static_cast<double>(cs.size()));
}

// True when the corner piece touches the face opposite its corner; such a piece is
// in contact with same-side spheres straight ahead of its motion.
bool reaches_far_face(const Block& blk, const Split& sp) {
    const LatticeCoord& v = sp.t1.corners.front();
    int steps = blk.size - 1;
    if (steps <= 0) return true;
    for (const auto& c : blk.corners) {
        if (c == v) continue;
        LatticeCoord diff = c - v;
        LatticeCoord step = diff;
        for (int i = 0; i < diff.dim; ++i) step.v[static_cast<std::size_t>(i)] = diff[i] / steps;
        for (const auto& m : sp.t1.members)
            if (!blk.contains(m + step)) return true;
    }
    return false;
}

struct Candidate {
    Block block;
    Split split;
    double score = 0;
};

// Picks a block crossed by the gap hyperplane with the cut avoiding member centers and
// separating exactly one corner.
template <class Make>
std::optional<Candidate> choose_block(const DefectivePacking& pk, Make&& make, int window) {
    Point foot = pk.gap.normal * pk.gap.offset;
    std::optional<Candidate> best;
    const int dim = pk.dim();
    for (int a = -window; a <= window; ++a)
        for (int b = -window; b <= window; ++b)
            for (int c = (dim == 3 ? -window : 0); c <= (dim == 3 ? window : 0); ++c)
                for (int orient = 0; orient < 2; ++orient) {
                    Block blk = make(a, b, c, orient);
                    Split sp;
                    try {
                        sp = dim == 2 ? split_block_by_line(blk, pk.gap.normal, pk.gap.offset)
                                      : split_tetrahedron_by_plane(blk, pk.gap.normal, pk.gap.offset);
                    } catch (const std::invalid_argument&) {
                        continue;
                    }
                    if (reaches_far_face(blk, sp)) continue;
                    Point cen = centroid(pk, blk.members);
                    double score = std::abs(dot(cen, pk.gap.normal) - pk.gap.offset) + 1e-3 * norm(cen - foot);
                    if (!best || score < best->score) best = Candidate{blk, sp, score};
                }
    return best;
}

Reduction finish_reduction(PackingPatch& patch, const std::vector<LatticeCoord>& moved, const Point& dir, double t,
                           std::vector<double> face_widths, const std::string& what) {
    Reduction r;
    r.moved = moved;
    r.translation = dir * t;
    std::vector<int> ids;
    for (const auto& c : moved) ids.push_back(*patch.id_of(c));
    if (t > 0) patch.translate_by(ids, r.translation);
    r.face_widths = std::move(face_widths);
    r.width = *std::min_element(r.face_widths.begin(), r.face_widths.end());
    r.valid = is_valid_packing(patch).valid;
    r.result = witness_from_patch(patch, what + ", translation " + fmt(t) + ", new gap width " + fmt(r.width));
    return r;
}

}  // namespace

Reduction reduce_line_gap(const DefectivePacking& pk, int n) {
    if (pk.lattice != Lattice::Honeycomb) throw std::invalid_argument("reduce_line_gap needs the honeycomb lattice");
    if (n < 2) throw std::invalid_argument("block size must be at least 2");
    if (honeycomb_line_rotation(pk.gap.normal) >= 0 || honeycomb_line_rotation(-pk.gap.normal) >= 0)
        throw std::invalid_argument("gap runs along a lattice line; no reduction needed");
    Point foot = pk.gap.normal * pk.gap.offset;
    Region near = Region::cube(2, 4.0 * n + 8.0);
    for (int i = 0; i < 2; ++i) {
        near.lo[i] += foot[i];
        near.hi[i] += foot[i];
    }
    if (hyperplane_hits_center(pk, near)) throw std::invalid_argument("gap line passes through a lattice center");
    // anchors around the foot of the origin on the line
    int fi = static_cast<int>(std::lround((foot[0] - foot[1] / kSqrt3) / 2.0));
    int fj = static_cast<int>(std::lround(foot[1] / kSqrt3));
    auto make = [&](int a, int b, int, int orient) {
        LatticeCoord anchor(fi + a, fj + b);
        return triangular_block(anchor, orient == 0 ? TriOrientation::Up : TriOrientation::Down, n);
    };
    auto cand = choose_block(pk, make, n + 2);
    if (!cand) throw std::invalid_argument("no admissible block: the line is too close to centers for all anchors");
    const Split& sp = cand->split;
    Point corner = lattice_point(pk.lattice, sp.t1.corners.front());
    Point dir = normalized(centroid(pk, cand->block.members) - corner);

    Region region = bounding_box(member_positions(pk, cand->block.members), pk.gap.width + 6.0);
    PackingPatch patch(pk, region, true);
    std::vector<int> ids;
    for (const auto& c : sp.t1.members) ids.push_back(*patch.id_of(c));
    double cap = pk.gap.width * std::abs(dot(dir, pk.gap.normal));
    double t = std::min(max_rigid_translation(patch, ids, dir, cap + 1.0), cap) * (1.0 - 1e-9);
    // both outer sides of the corner piece make 60 degrees with the bisector
    std::vector<double> widths;
    for (const auto& c : sp.t1.corners) (void)c;
    const auto& tc = cand->block.corners;
    for (const auto& other : tc) {
        if (other == sp.t1.corners.front()) continue;
        Point side = normalized(lattice_point(pk.lattice, other) - corner);
        Point nrm(-side[1], side[0]);
        if (dot(nrm, dir) < 0) nrm = -nrm;
        widths.push_back(t * dot(nrm, dir));
    }
    return finish_reduction(patch, sp.t1.members, dir, t, widths, "line-gap reduction");
}

Reduction reduce_honeycomb_gap(const DefectivePacking& pk, int n, double translation) {
    if (pk.lattice != Lattice::Fcc) throw std::invalid_argument("reduce_honeycomb_gap needs the fcc lattice");
    if (n < 2) throw std::invalid_argument("block size must be at least 2");
    if (!is_fcc_honeycomb_normal(pk.gap.normal)) throw std::invalid_argument("gap is not parallel to a honeycomb layer");
    Point u = xyz_dir_to_cubic(pk.gap.normal);
    std::array<int, 3> sgn{u[0] > 0 ? 1 : -1, u[1] > 0 ? 1 : -1, u[2] > 0 ? 1 : -1};
    // hexagon center: the shifted-side lattice point closest to the gap near the origin
    Point foot = pk.gap.normal * pk.gap.offset;
    Region near = Region::cube(3, 4.0);
    for (int i = 0; i < 3; ++i) {
        near.lo[i] += foot[i];
        near.hi[i] += foot[i];
    }
    DefectivePacking flat = with_width(pk, 0.0);
    std::optional<LatticeCoord> anchor;
    double best_h = 0, best_r = 0;
    for (const auto& c : enumerate_centers(flat, near)) {
        double h = dot(c.at, pk.gap.normal) - pk.gap.offset;
        if (h < -1e-12) continue;
        double r = norm(c.at - foot);
        if (!anchor || h < best_h - 1e-9 || (std::abs(h - best_h) <= 1e-9 && r < best_r)) {
            anchor = c.coord;
            best_h = h;
            best_r = r;
        }
    }
    if (!anchor) throw InfeasibleError("no lattice point next to the gap");
    Block blk = half_cuboctahedron_block(*anchor, n, sgn);
    for (const auto& c : blk.members)
        if (!in_upper_half(pk, lattice_point(pk.lattice, c))) throw InfeasibleError("block straddles the gap");
    Point dir = -pk.gap.normal;
    Region region = bounding_box(member_positions(pk, blk.members), pk.gap.width + 6.0);
    PackingPatch patch(pk, region, true);
    std::vector<int> ids;
    for (const auto& c : blk.members) ids.push_back(*patch.id_of(c));
    double t = translation;
    if (t < 0) t = std::min(max_rigid_translation(patch, ids, dir, pk.gap.width + 1.0), pk.gap.width) * (1.0 - 1e-9);
    std::vector<double> widths;
    for (int a = 0; a < 3; ++a) {
        Point ax(0.0, 0.0, 0.0);
        ax[static_cast<std::size_t>(a)] = sgn[static_cast<std::size_t>(a)];
        Point out = cubic_dir_to_xyz(ax);  // outward normal of the square face
        widths.push_back(t * dot(-dir, out));
    }
    return finish_reduction(patch, blk.members, dir, t, widths, "honeycomb-layer reduction");
}

Reduction reduce_plane_gap(const DefectivePacking& pk, int n) {
    if (pk.lattice != Lattice::Fcc) throw std::invalid_argument("reduce_plane_gap needs the fcc lattice");
    if (n < 2) throw std::invalid_argument("block size must be at least 2");
    if (is_fcc_honeycomb_normal(pk.gap.normal)) throw std::invalid_argument("plane is parallel to a honeycomb layer");
    if (is_fcc_square_normal(pk.gap.normal)) throw std::invalid_argument("degenerate split: plane parallel to a square layer");
    Point foot = pk.gap.normal * pk.gap.offset;
    int fk = static_cast<int>(std::lround(foot[2] / kSqrt2));
    int fi = static_cast<int>(std::lround((foot[0] - fk) / 2.0));
    int fj = static_cast<int>(std::lround((foot[1] - fk) / 2.0));
    auto make = [&](int a, int b, int c, int orient) {
        return simplex_block(LatticeCoord(fi + a, fj + b, fk + c), n,
                             orient == 0 ? SimplexOrientation::BottomX : SimplexOrientation::BottomY);
    };
    auto cand = choose_block(pk, make, n);
    if (!cand) throw std::invalid_argument("degenerate split: no tetrahedron is cut one vertex against three");
    const Split& sp = cand->split;
    Point vertex = lattice_point(pk.lattice, sp.t1.corners.front());
    Point dir = normalized(centroid(pk, cand->block.members) - vertex);
    Region region = bounding_box(member_positions(pk, cand->block.members), pk.gap.width + 6.0);
    PackingPatch patch(pk, region, true);
    std::vector<int> ids;
    for (const auto& c : sp.t1.members) ids.push_back(*patch.id_of(c));
    double cap = pk.gap.width;
    double t = std::min(max_rigid_translation(patch, ids, dir, cap + 1.0), cap) * (1.0 - 1e-9);
    // the three faces through the vertex
    std::vector<Point> others;
    for (const auto& c : cand->block.corners)
        if (!(c == sp.t1.corners.front())) others.push_back(lattice_point(pk.lattice, c) - vertex);
    std::vector<double> widths;
    for (std::size_t i = 0; i < others.size(); ++i)
        for (std::size_t j = i + 1; j < others.size(); ++j) {
            const Point& a = others[i];
            const Point& b = others[j];
            Point nrm(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
            nrm = normalized(nrm);
            if (dot(nrm, dir) < 0) nrm = -nrm;
            widths.push_back(t * dot(nrm, dir));
        }
    return finish_reduction(patch, sp.t1.members, dir, t, widths, "plane-gap reduction");
}

}  // namespace gapsat
