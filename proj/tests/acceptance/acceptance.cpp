// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "gapsat/rearrange.hpp"

using namespace gapsat;

namespace {

struct Outcome {
    bool pass = true;
    std::string note;
};

// Collects the first failure message; later ones only count.
struct Tally {
    bool ok = true;
    std::string first;
    int failures = 0;
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        if (ok) first = what;
        ok = false;
        ++failures;
    }
    Outcome done(const std::string& summary) const {
        if (ok) return {true, summary};
        return {false, first + (failures > 1 ? " (+" + std::to_string(failures - 1) + " more)" : "")};
    }
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Point random_normal(std::mt19937& rng, int dim) {
    std::normal_distribution<double> g;
    for (;;) {
        Point p = dim == 2 ? Point(g(rng), g(rng)) : Point(g(rng), g(rng), g(rng));
        if (norm(p) > 1e-3) return normalized(p);
    }
}

long long tri(long long n) { return n * (n + 1) / 2; }
long long pyr(long long n) { return n * (n + 1) * (2 * n + 1) / 6; }
long long tet(long long n) { return n * (n + 1) * (n + 2) / 6; }

Outcome counting() {
    Tally t;
    for (int n = 1; n <= 10; ++n) {
        t.expect((long long)triangular_block(LatticeCoord(0, 0), TriOrientation::Up, n).count() == tri(n),
                 "triangle n=" + std::to_string(n));
        t.expect((long long)triangular_block(LatticeCoord(0, 0), TriOrientation::Down, n).count() == tri(n),
                 "inverted triangle n=" + std::to_string(n));
        t.expect((long long)square_pyramid_block(LatticeCoord(0, 0, 0), n).count() == pyr(n),
                 "pyramid n=" + std::to_string(n));
        t.expect((long long)simplex_block(LatticeCoord(0, 0, 0), n).count() == tet(n), "simplex n=" + std::to_string(n));
    }
    return t.done("triangle, pyramid and simplex sizes exact for n = 1..10");
}

Outcome gap_preservation() {
    Tally t;
    std::mt19937 rng(20240601);
    std::uniform_real_distribution<double> off(-1.5, 1.5), wid(0.0, 3.0);
    for (int s = 0; s < 200; ++s) {
        Lattice l = s % 2 ? Lattice::Fcc : Lattice::Honeycomb;
        auto pk = make_packing(l, random_normal(rng, lattice_dim(l)), off(rng), wid(rng));
        PackingPatch p(pk, Region::cube(pk.dim(), pk.dim() == 2 ? 8.0 : 5.0));
        auto r = is_valid_packing(p);
        t.expect(r.valid, "sample " + std::to_string(s) + " has " + std::to_string(r.violations.size()) + " overlaps");
        t.expect(r.violations == oracle::violations(p), "sample " + std::to_string(s) + " disagrees with all-pairs");
    }
    return t.done("200 random windows valid, matching the all-pairs scan");
}

Outcome deep_hole() {
    Tally t;
    auto flat = make_packing(Lattice::Honeycomb, Point(0, 1), 0.5, 0.0);
    PackingPatch p(flat, Region::cube(2, 8));
    EmptyBall b = largest_empty_ball(p, Region::cube(2, 3));
    t.expect(std::abs(b.radius - 2 / std::sqrt(3.0)) <= 1e-6, "perfect honeycomb radius " + num(b.radius));
    t.expect(oracle::min_dist(p, b.center) >= b.radius - 1e-9, "reported ball is not empty");

    auto gap = make_packing(Lattice::Honeycomb, Point(0, 1), -0.5, 2.0);
    PackingPatch q(gap, Region::cube(2, 8));
    // strip of the gap between the cut and row j = 0; the tangent slot is (0, 0)
    Region mid;
    mid.lo = Point(-2, -0.5);
    mid.hi = Point(2, 0.5);
    EmptyBall c = largest_empty_ball(q, mid);
    t.expect(c.radius >= 2 - 1e-9, "width-2 gap radius " + num(c.radius));
    t.expect(oracle::min_dist(q, c.center) >= c.radius - 1e-9, "reported ball is not empty");
    return t.done("honeycomb hole " + num(b.radius) + ", gap of width 2 gives " + num(c.radius));
}

// Applies the stages one at a time and runs the all-pairs scan after each.
bool stages_oracle_valid(const DefectivePacking& pk, const WidenSchedule& s) {
    std::vector<Point> pos;
    for (const auto& c : s.family.all_members()) pos.push_back(defect_center(pk, c));
    Region box{pos[0], pos[0]};
    for (const auto& p : pos)
        for (int i = 0; i < p.dim; ++i) {
            auto k = static_cast<std::size_t>(i);
            box.lo[k] = std::min(box.lo[k], p[k]);
            box.hi[k] = std::max(box.hi[k], p[k]);
        }
    PackingPatch patch(pk, box.expanded(3.0 * pk.gap.width + 4.0), true);
    for (std::size_t k = 0; k < s.stages.size(); ++k) {
        if (s.removed && k + 1 == s.stages.size()) patch.remove_center(*patch.id_of(*s.removed));
        for (const auto& mv : s.stages[k].moves) {
            std::vector<int> ids;
            for (const auto& c : s.family.roles.at(mv.role).members)
                if (auto id = patch.id_of(c)) ids.push_back(*id);  // the removed apex is gone
            patch.translate_by(ids, mv.direction * mv.distance);
        }
        if (!oracle::violations(patch).empty()) return false;
    }
    return true;
}

std::vector<double> grid_2d() {
    std::vector<double> g;
    for (int i = 1; i <= 20; ++i) g.push_back(0.05 * i);
    return g;
}
const std::vector<double> kGrid3d{0.25, 0.5, 1.0};

DefectivePacking line_gap(double d) { return make_packing(Lattice::Honeycomb, Point(0, 1), 0.5, d); }
DefectivePacking layer_gap(double d) { return make_packing(Lattice::Fcc, Point(0, 0, 1), 0.25, d); }

std::vector<double> deltas2d, deltas3d;

Outcome widening_exists() {
    Tally t;
    double lo = INFINITY;
    for (double d : grid_2d()) {
        WidenSchedule s;
        try {
            s = optimize_widening_2d(line_gap(d), 6);
        } catch (const std::exception& e) {
            t.expect(false, "2D d=" + num(d) + ": " + e.what());
            deltas2d.push_back(0);
            continue;
        }
        deltas2d.push_back(s.delta);
        lo = std::min(lo, s.delta);
        t.expect(s.delta > 0, "2D d=" + num(d) + " delta " + num(s.delta));
        t.expect(stages_oracle_valid(line_gap(d), s), "2D d=" + num(d) + " stage boundary overlaps");
    }
    for (double d : kGrid3d) {
        WidenSchedule s;
        try {
            s = optimize_widening_3d(layer_gap(d), 4);
        } catch (const std::exception& e) {
            t.expect(false, "3D d=" + num(d) + ": " + e.what());
            deltas3d.push_back(0);
            continue;
        }
        deltas3d.push_back(s.delta);
        t.expect(s.delta > 0, "3D d=" + num(d) + " delta " + num(s.delta));
        t.expect(s.removed.has_value(), "3D d=" + num(d) + " schedule removes nothing");
        t.expect(stages_oracle_valid(layer_gap(d), s), "3D d=" + num(d) + " stage boundary overlaps");
        Witness w = build_witness_3d_step(layer_gap(d), 4);
        t.expect(w.removals.size() == 1, "3D d=" + num(d) + " step removes " + std::to_string(w.removals.size()));
        t.expect(oracle::config_ok(w, oracle::index_reach(w.region)), "3D d=" + num(d) + " step overlaps");
    }
    return t.done("2D delta in [" + num(lo) + ", " + num(deltas2d.back()) + "] over 20 widths, 3D delta " +
                  num(deltas3d.empty() ? 0 : deltas3d.front()) + ".." + num(deltas3d.empty() ? 0 : deltas3d.back()) +
                  ", one removal each");
}

Outcome monotone_and_n_free() {
    Tally t;
    auto g2 = grid_2d();
    for (std::size_t i = 1; i < deltas2d.size(); ++i)
        t.expect(deltas2d[i] >= deltas2d[i - 1] - 1e-6, "2D delta drops at d=" + num(g2[i]));
    for (std::size_t i = 1; i < deltas3d.size(); ++i)
        t.expect(deltas3d[i] >= deltas3d[i - 1] - 1e-6, "3D delta drops at d=" + num(kGrid3d[i]));
    double spread2 = 0, spread3 = 0;
    for (double d : {0.25, 0.5, 1.0}) {
        double a = optimize_widening_2d(line_gap(d), 4).delta;
        for (int n : {6, 8}) spread2 = std::max(spread2, std::abs(optimize_widening_2d(line_gap(d), n).delta - a));
    }
    for (double d : {0.5}) {
        double a = optimize_widening_3d(layer_gap(d), 3).delta;
        for (int n : {4, 5}) spread3 = std::max(spread3, std::abs(optimize_widening_3d(layer_gap(d), n).delta - a));
    }
    t.expect(spread2 <= 1e-6, "2D delta varies by " + num(spread2) + " across n");
    t.expect(spread3 <= 1e-6, "3D delta varies by " + num(spread3) + " across n");
    return t.done("monotone on both grids, spread across n " + num(spread2) + " (2D), " + num(spread3) + " (3D)");
}

Outcome end_to_end_2d() {
    auto pk = line_gap(0.5);
    Witness w;
    try {
        w = build_witness_2d(pk);
    } catch (const std::exception& e) {
        return {false, std::string("no witness at d=0.5: ") + e.what()};
    }
    auto n = check_witness(w, false), s = check_witness(w, true);
    Tally t;
    t.expect(n.net_gain == 1, "net gain " + std::to_string(n.net_gain));
    t.expect(n.accepted, "rejected in normal mode");
    t.expect(s.accepted, "rejected in strict mode");
    return t.done("witness at d=0.5 accepted in normal and strict mode, net gain +1");
}

Outcome reductions() {
    Tally t;
    auto line = make_packing(Lattice::Honeycomb, normalized(Point(-0.3, 1)), 0.1, 0.4);
    Reduction a = reduce_line_gap(line, 5), b = reduce_line_gap(line, 8);
    t.expect(a.width > 0 && b.width > 0, "line reduction width not positive");
    t.expect(std::abs(a.width - b.width) <= 1e-9, "line width differs across n by " + num(a.width - b.width));
    t.expect(oracle::config_ok(a.result, oracle::index_reach(a.result.region)), "line reduction n=5 overlaps");
    t.expect(oracle::config_ok(b.result, oracle::index_reach(b.result.region)), "line reduction n=8 overlaps");

    auto hc = make_packing(Lattice::Fcc, normalized(Point(std::sqrt(2.0), 0, 1)), 0.3, 0.5);
    Reduction c = reduce_honeycomb_gap(hc, 3);
    t.expect(c.width > 0, "honeycomb-layer reduction width not positive");
    t.expect(oracle::config_ok(c.result, oracle::index_reach(c.result.region)), "honeycomb-layer reduction overlaps");

    auto pl = make_packing(Lattice::Fcc, normalized(Point(0.3, 0.5, 1)), 0.2, 0.5);
    Reduction d = reduce_plane_gap(pl, 4);
    t.expect(d.width > 0, "plane reduction width not positive");
    t.expect(oracle::config_ok(d.result, oracle::index_reach(d.result.region)), "plane reduction overlaps");
    return t.done("widths " + num(a.width) + " (line), " + num(c.width) + " (honeycomb layer), " + num(d.width) +
                  " (plane)");
}

Outcome adversarial() {
    Tally t;
    std::vector<Witness> accepted;
    for (auto pk : {line_gap(2.3), layer_gap(2.2), make_packing(Lattice::Honeycomb, normalized(Point(1, 3)), 0.2, 2.1)})
        if (auto w = direct_insertion_witness(pk)) accepted.push_back(*w);
    try {
        accepted.push_back(build_witness_2d(line_gap(1.7)));
    } catch (const std::exception& e) {
        t.expect(false, std::string("widened witness failed: ") + e.what());
    }
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        const Witness& w = accepted[i];
        std::string tag = "witness " + std::to_string(i);
        t.expect(check_witness(w, false).accepted, tag + " not accepted to begin with");
        Witness overlap = w;
        overlap.insertions.push_back(w.insertions.back() + w.base.gap.normal * 0.5);
        t.expect(!check_witness(overlap, false).accepted, tag + ": overlap injection accepted");
        Witness outside = w;
        Point far = outside.region.hi;
        for (int k = 0; k < far.dim; ++k) far[static_cast<std::size_t>(k)] += 5.0;
        outside.insertions.back() = far;
        t.expect(!check_witness(outside, false).accepted, tag + ": out-of-region edit accepted");
        Witness flat = w;
        while (flat.insertions.size() > flat.removals.size()) flat.insertions.pop_back();
        t.expect(!check_witness(flat, false).accepted, tag + ": net gain 0 accepted");
    }
    return t.done(std::to_string(accepted.size()) + " accepted witnesses, all three corruptions rejected for each");
}

Outcome oracle_equivalence() {
    Tally t;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1, 1), wid(0, 2.5);
    std::size_t biggest = 0;
    long long viol = 0;
    for (int s = 0; s < 100; ++s) {
        int dim = 2 + s % 2;
        double half = dim == 2 ? 14.0 : 6.0;
        std::unique_ptr<PackingPatch> p;
        if (s % 4 < 2) {
            // jittered lattice window over a defect
            Lattice l = dim == 2 ? Lattice::Honeycomb : Lattice::Fcc;
            auto pk = make_packing(l, random_normal(rng, dim), u(rng), wid(rng));
            p = std::make_unique<PackingPatch>(pk, Region::cube(dim, dim == 2 ? 9.0 : 2.5));
            auto ids = p->ids();
            for (int id : ids)
                if (rng() % 5 == 0) {
                    Point j = zero_point(dim);
                    for (int k = 0; k < dim; ++k) j[static_cast<std::size_t>(k)] = 0.3 * u(rng);
                    if (p->region().contains(p->at(id) + j)) p->translate_by({id}, j);
                }
        } else {
            p = std::make_unique<PackingPatch>(dim, Region::cube(dim, half));
            int m = 1 + static_cast<int>(rng() % 500);
            for (int i = 0; i < m; ++i) {
                Point q = zero_point(dim);
                for (int k = 0; k < dim; ++k) q[static_cast<std::size_t>(k)] = half * u(rng);
                p->insert_center(q);
            }
        }
        std::size_t total = p->size() + p->background().size();
        biggest = std::max(biggest, total);
        t.expect(total <= 500, "patch " + std::to_string(s) + " has " + std::to_string(total) + " centers");
        auto fast = is_valid_packing(*p);
        auto slow = oracle::violations(*p);
        viol += static_cast<long long>(slow.size());
        t.expect(fast.violations == slow, "patch " + std::to_string(s) + " violation sets differ");
        t.expect(fast.valid == slow.empty(), "patch " + std::to_string(s) + " verdict differs");
    }
    return t.done("100 patches up to " + std::to_string(biggest) + " centers, " + std::to_string(viol) +
                  " violations, identical sets");
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> crits{
        {"counting identities", counting},
        {"gap preservation", gap_preservation},
        {"deep-hole sanity", deep_hole},
        {"widening exists", widening_exists},
        {"monotonicity and n-independence", monotone_and_n_free},
        {"end-to-end 2D witness at d=0.5", end_to_end_2d},
        {"reductions", reductions},
        {"adversarial checker", adversarial},
        {"oracle equivalence", oracle_equivalence},
    };
    int failed = 0;
    for (std::size_t i = 0; i < crits.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = crits[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, crits[i].first.c_str(), o.note.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(crits.size()) - failed, crits.size());
    return failed == 0 ? 0 : 1;
}
