#include "gapsat/packing.hpp"

#include <algorithm>

namespace gapsat {

SpatialHash::Cell SpatialHash::cell_of(const Point& p) const {
    Cell c{0, 0, 0};
    c.a = static_cast<long long>(std::floor(p[0] / cell_));
    c.b = static_cast<long long>(std::floor(p[1] / cell_));
    if (p.dim == 3) c.c = static_cast<long long>(std::floor(p[2] / cell_));
    return c;
}

void SpatialHash::insert(int key, const Point& p) { cells_[cell_of(p)].push_back(key); }

void SpatialHash::erase(int key, const Point& p) {
    auto it = cells_.find(cell_of(p));
    if (it == cells_.end()) return;
    auto& v = it->second;
    v.erase(std::remove(v.begin(), v.end(), key), v.end());
    if (v.empty()) cells_.erase(it);
}

PackingPatch::PackingPatch(int dim, const Region& region) : dim_(dim), region_(region) {
    if (region.dim() != dim) throw std::invalid_argument("region dimension mismatch");
}

PackingPatch::PackingPatch(const DefectivePacking& pk, const Region& region, bool populate)
    : dim_(pk.dim()), region_(region), packing_(pk) {
    if (region.dim() != dim_) throw std::invalid_argument("region dimension mismatch");
    background_ = background_neighbors(pk, region, 4.0);
    for (std::size_t b = 0; b < background_.size(); ++b)
        hash_.insert(-1 - static_cast<int>(b), background_[b].at);
    if (!populate) {
        for (const auto& c : enumerate_centers(pk, region)) removed_.push_back(c.coord);
        return;
    }
    for (const auto& c : enumerate_centers(pk, region)) {
        Entry e;
        e.at = c.at;
        e.shift = in_upper_half(pk, lattice_point(pk.lattice, c.coord)) ? pk.shift_vector() : zero_point(dim_);
        e.origin = c.coord;
        e.alive = true;
        int id = static_cast<int>(entries_.size());
        entries_.push_back(e);
        by_coord_[c.coord] = id;
        hash_.insert(id, e.at);
        ++alive_;
    }
}

int PackingPatch::insert_center(const Point& p) {
    if (p.dim != dim_) throw std::invalid_argument("insert_center: dimension mismatch");
    if (!region_.contains(p)) throw std::invalid_argument("insert_center: point outside region");
    Entry e;
    e.at = p;
    e.shift = zero_point(dim_);
    e.alive = true;
    int id = static_cast<int>(entries_.size());
    entries_.push_back(e);
    hash_.insert(id, p);
    ++alive_;
    return id;
}

Point PackingPatch::remove_center(int id) {
    if (!contains(id)) throw std::out_of_range("remove_center: unknown id " + std::to_string(id));
    Entry& e = entries_[static_cast<std::size_t>(id)];
    hash_.erase(id, e.at);
    e.alive = false;
    --alive_;
    if (e.origin) {
        by_coord_.erase(*e.origin);
        removed_.push_back(*e.origin);
    }
    return e.at;
}

void PackingPatch::translate_set(const std::vector<int>& ids, const Point& direction, double distance) {
    if (std::abs(norm(direction) - 1.0) > 1e-12) throw std::invalid_argument("translate_set: direction must be unit");
    translate_by(ids, direction * distance);
}

void PackingPatch::translate_by(const std::vector<int>& ids, const Point& t) {
    if (t.dim != dim_) throw std::invalid_argument("translate_set: dimension mismatch");
    for (int id : ids) {
        if (!contains(id)) throw std::out_of_range("translate_set: unknown id " + std::to_string(id));
        if (!region_.contains(entries_[static_cast<std::size_t>(id)].at + t))
            throw std::domain_error("translate_set: center would leave the region");
    }
    for (int id : ids) {
        Entry& e = entries_[static_cast<std::size_t>(id)];
        hash_.erase(id, e.at);
        e.shift += t;
        if (e.origin && packing_) e.at = lattice_point(packing_->lattice, *e.origin) + e.shift;
        else e.at += t;
        hash_.insert(id, e.at);
    }
}

bool PackingPatch::contains(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < entries_.size() && entries_[static_cast<std::size_t>(id)].alive;
}

const Point& PackingPatch::at(int id) const {
    if (!contains(id)) throw std::out_of_range("unknown center id " + std::to_string(id));
    return entries_[static_cast<std::size_t>(id)].at;
}

std::optional<LatticeCoord> PackingPatch::origin(int id) const {
    if (!contains(id)) throw std::out_of_range("unknown center id " + std::to_string(id));
    return entries_[static_cast<std::size_t>(id)].origin;
}

const Point& PackingPatch::shift(int id) const {
    if (!contains(id)) throw std::out_of_range("unknown center id " + std::to_string(id));
    return entries_[static_cast<std::size_t>(id)].shift;
}

std::optional<int> PackingPatch::id_of(const LatticeCoord& c) const {
    auto it = by_coord_.find(c);
    if (it == by_coord_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> PackingPatch::ids() const {
    std::vector<int> out;
    out.reserve(alive_);
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].alive) out.push_back(static_cast<int>(i));
    return out;
}

const Point& PackingPatch::handle_point(int h) const {
    if (h >= 0) return at(h);
    return background_.at(static_cast<std::size_t>(-1 - h)).at;
}

double PackingPatch::nearest_dist2(const Point& p) const {
    double best = std::numeric_limits<double>::infinity();
    double r = hash_.cell();
    // grow the query ball until it certainly contains the nearest center
    for (int ring = 0; ring < 64; ++ring) {
        hash_.query(p, r, [&](int h) { best = std::min(best, dist2(p, handle_point(h))); });
        if (best <= r * r) return best;
        if (alive_ + background_.size() == 0) return best;
        r *= 2.0;
    }
    return best;
}

std::vector<LatticeCoord> PackingPatch::removed_coords() const {
    std::vector<LatticeCoord> out = removed_;
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> PackingPatch::moved_ids() const {
    std::vector<int> out;
    if (!packing_) return out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        if (!e.alive || !e.origin) continue;
        if (!(e.at == defect_center(*packing_, *e.origin))) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> PackingPatch::inserted_ids() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].alive && !entries_[i].origin) out.push_back(static_cast<int>(i));
    return out;
}

ValidityReport is_valid_packing(const PackingPatch& patch, double tol) {
    ValidityReport rep;
    const double reach = 2.0;
    auto visit = [&](int h, const Point& p) {
        patch.for_each_near(p, reach, [&](int g) {
            // each unordered pair once: order handles, background keys are negative
            if (g <= h) return;
            double d2 = dist2(p, patch.handle_point(g));
            if (d2 >= reach * reach) return;
            rep.min_dist2 = std::min(rep.min_dist2, d2);
            if (d2 < 4.0 - tol) rep.violations.push_back({h, g, d2});
        });
    };
    for (std::size_t b = 0; b < patch.background().size(); ++b) {
        int h = -1 - static_cast<int>(b);
        visit(h, patch.background()[b].at);
    }
    for (int id : patch.ids()) visit(id, patch.at(id));
    std::sort(rep.violations.begin(), rep.violations.end());
    rep.valid = rep.violations.empty();
    return rep;
}

namespace {

struct Circumcircle {
    bool ok = false;
    Point c;
};

Circumcircle circumcenter(const Point& a, const Point& b, const Point& c) {
    double bx = b[0] - a[0], by = b[1] - a[1];
    double cx = c[0] - a[0], cy = c[1] - a[1];
    double d = 2.0 * (bx * cy - by * cx);
    if (std::abs(d) < 1e-12) return {};
    double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    double ux = (cy * b2 - by * c2) / d;
    double uy = (bx * c2 - cx * b2) / d;
    return {true, Point(a[0] + ux, a[1] + uy)};
}

Point clamp_to(const Region& r, Point p) {
    for (int i = 0; i < r.dim(); ++i) p[i] = std::clamp(p[i], r.lo[i], r.hi[i]);
    return p;
}

// Coarse grid evaluation; returns the best grid point and the grid step per axis.
std::vector<std::pair<double, Point>> grid_scan(const PackingPatch& patch, const Region& search, double step,
                                                std::size_t max_points, double& used_step) {
    int d = search.dim();
    double h = step;
    double cells = 1.0;
    for (;;) {
        cells = 1.0;
        for (int i = 0; i < d; ++i) cells *= std::floor((search.hi[i] - search.lo[i]) / h) + 1.0;
        if (cells <= static_cast<double>(max_points)) break;
        h *= 1.5;
    }
    used_step = h;
    int n[3] = {1, 1, 1};
    for (int i = 0; i < d; ++i) n[i] = static_cast<int>(std::floor((search.hi[i] - search.lo[i]) / h)) + 1;
    std::vector<std::pair<double, Point>> out;
    out.reserve(static_cast<std::size_t>(cells));
    for (int a = 0; a < n[0]; ++a)
        for (int b = 0; b < n[1]; ++b)
            for (int c = 0; c < n[2]; ++c) {
                Point p = search.lo;
                p[0] += a * h;
                p[1] += b * h;
                if (d == 3) p[2] += c * h;
                out.emplace_back(patch.nearest_dist2(p), p);
            }
    return out;
}

EmptyBall largest_empty_ball_2d(const PackingPatch& patch, const Region& search) {
    double h = 0.0;
    auto grid = grid_scan(patch, search, 0.25, 250000, h);
    EmptyBall best;
    best.center = search.lo;
    best.radius = -1.0;
    auto consider = [&](const Point& p) {
        if (!search.contains(p)) return;
        double r = std::sqrt(patch.nearest_dist2(p));
        if (r > best.radius) {
            best.radius = r;
            best.center = p;
        }
    };
    double r0 = 0.0;
    for (const auto& [d2, p] : grid) {
        r0 = std::max(r0, std::sqrt(d2));
        consider(p);
    }
    if (patch.size() + patch.background().size() == 0) return best;
    // distance to the nearest center is 1-Lipschitz, so the optimum is below this bound
    double R = r0 + h * std::sqrt(0.5) + 1e-9;

    std::vector<Point> sites;
    Region reach = search.expanded(R);
    for (const auto& b : patch.background())
        if (reach.contains(b.at)) sites.push_back(b.at);
    for (int id : patch.ids())
        if (reach.contains(patch.at(id))) sites.push_back(patch.at(id));

    const double pair_lim = 4.0 * R * R;
    // voronoi vertices
    for (std::size_t a = 0; a < sites.size(); ++a) {
        std::vector<std::size_t> nb;
        for (std::size_t b = a + 1; b < sites.size(); ++b)
            if (dist2(sites[a], sites[b]) <= pair_lim) nb.push_back(b);
        for (std::size_t x = 0; x < nb.size(); ++x)
            for (std::size_t y = x + 1; y < nb.size(); ++y) {
                if (dist2(sites[nb[x]], sites[nb[y]]) > pair_lim) continue;
                Circumcircle cc = circumcenter(sites[a], sites[nb[x]], sites[nb[y]]);
                if (cc.ok) consider(cc.c);
            }
    }
    // voronoi edges crossing the boundary of the search box
    for (std::size_t a = 0; a < sites.size(); ++a)
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            if (dist2(sites[a], sites[b]) > pair_lim) continue;
            Point m = (sites[a] + sites[b]) * 0.5;
            Point dir = sites[b] - sites[a];
            for (int axis = 0; axis < 2; ++axis) {
                int other = 1 - axis;
                if (std::abs(dir[other]) < 1e-15) continue;
                for (double v : {search.lo[axis], search.hi[axis]}) {
                    // points q with q[axis] = v and (q - m).dir = 0
                    Point q = m;
                    q[axis] = v;
                    q[other] = m[other] - (v - m[axis]) * dir[axis] / dir[other];
                    consider(q);
                }
            }
        }
    for (double x : {search.lo[0], search.hi[0]})
        for (double y : {search.lo[1], search.hi[1]}) consider(Point(x, y));
    return best;
}

EmptyBall largest_empty_ball_3d(const PackingPatch& patch, const Region& search) {
    double h = 0.0;
    auto grid = grid_scan(patch, search, 0.25, 2000000, h);
    std::partial_sort(grid.begin(), grid.begin() + std::min<std::size_t>(10, grid.size()), grid.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    EmptyBall best;
    best.center = search.lo;
    best.radius = -1.0;
    std::size_t seeds = std::min<std::size_t>(10, grid.size());
    for (std::size_t s = 0; s < seeds; ++s) {
        Point p = grid[s].second;
        double span = h;
        for (int round = 0; round < 40 && span > 1e-12; ++round) {
            for (int axis = 0; axis < 3; ++axis) {
                double lo = std::max(search.lo[axis], p[axis] - span);
                double hi = std::min(search.hi[axis], p[axis] + span);
                for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
                    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    Point q1 = p, q2 = p;
                    q1[axis] = m1;
                    q2[axis] = m2;
                    if (patch.nearest_dist2(q1) < patch.nearest_dist2(q2)) lo = m1;
                    else hi = m2;
                }
                Point q = p;
                q[axis] = 0.5 * (lo + hi);
                if (patch.nearest_dist2(q) >= patch.nearest_dist2(p)) p = q;
            }
            span *= 0.5;
        }
        p = clamp_to(search, p);
        double r = std::sqrt(patch.nearest_dist2(p));
        if (r > best.radius) {
            best.radius = r;
            best.center = p;
        }
    }
    return best;
}

}  // namespace

EmptyBall largest_empty_ball(const PackingPatch& patch, const Region& search) {
    if (search.dim() != patch.dim()) throw std::invalid_argument("largest_empty_ball: dimension mismatch");
    for (int i = 0; i < search.dim(); ++i)
        if (!(search.lo[i] <= search.hi[i])) throw std::invalid_argument("largest_empty_ball: empty search region");
    if (patch.dim() == 2) return largest_empty_ball_2d(patch, search);
    return largest_empty_ball_3d(patch, search);
}

}  // namespace gapsat
