#include "gapsat/witness.hpp"

#include <algorithm>
#include <cfloat>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gapsat/packing.hpp"

namespace gapsat {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
const char* kFormatName = "gapsat-witness";

bool same_point(const Point& a, const Point& b) { return a.dim == b.dim && a.x == b.x; }

double ulp(double x) {
    double a = std::abs(x);
    return std::nextafter(a, std::numeric_limits<double>::infinity()) - a;
}

std::string coord_str(const LatticeCoord& c) {
    std::string s = "(" + std::to_string(c[0]) + "," + std::to_string(c[1]);
    if (c.dim == 3) s += "," + std::to_string(c[2]);
    return s + ")";
}

std::string point_str(const Point& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << p[0] << "," << p[1];
    if (p.dim == 3) os << "," << p[2];
    os << ")";
    return os.str();
}

// A sphere of the reconstructed configuration.
struct Sphere {
    Point at;
    bool anchored = false;  // at = lattice_point(coord) + shift exactly
    LatticeCoord coord;
    Point shift;
    std::string label;
};

// Conservative bounds for strict mode: each coordinate carries an absolute error.
struct Bounded {
    Point v;
    std::array<double, 3> err{0.0, 0.0, 0.0};
};

Bounded lattice_bounded(Lattice l, const LatticeCoord& c) {
    Bounded b;
    b.v = lattice_point(l, c);
    for (int i = 0; i < b.v.dim; ++i) b.err[static_cast<std::size_t>(i)] = 4.0 * ulp(b.v[i]);
    return b;
}

Bounded add(const Bounded& a, const Point& s, double s_err) {
    Bounded r;
    r.v = a.v + s;
    for (int i = 0; i < r.v.dim; ++i) {
        auto k = static_cast<std::size_t>(i);
        r.err[k] = a.err[k] + s_err * ulp(s[i]) + ulp(r.v[i]);
    }
    return r;
}

Bounded sub(const Bounded& a, const Bounded& b) {
    Bounded r;
    r.v = a.v - b.v;
    for (int i = 0; i < r.v.dim; ++i) {
        auto k = static_cast<std::size_t>(i);
        r.err[k] = a.err[k] + b.err[k] + ulp(r.v[i]);
    }
    return r;
}

double lower_norm2(const Bounded& d) {
    double s = 0.0;
    for (int i = 0; i < d.v.dim; ++i) {
        double m = std::max(0.0, std::abs(d.v[i]) - d.err[static_cast<std::size_t>(i)]);
        s += m * m;
    }
    return s * (1.0 - 8.0 * DBL_EPSILON);
}

Bounded sphere_bounded(Lattice l, const Sphere& s) {
    if (s.anchored) return add(lattice_bounded(l, s.coord), s.shift, 0.0);
    Bounded b;
    b.v = s.at;
    for (int i = 0; i < s.at.dim; ++i) b.err[static_cast<std::size_t>(i)] = ulp(s.at[i]);
    return b;
}

double strict_lower_dist2(Lattice l, const Sphere& a, const Sphere& b) {
    if (a.anchored && b.anchored) {
        if (same_point(a.shift, b.shift)) return static_cast<double>(lattice_norm2(l, a.coord - b.coord));
        Bounded lat = lattice_bounded(l, a.coord - b.coord);
        Point ds = a.shift - b.shift;
        Bounded d;
        d.v = lat.v + ds;
        for (int i = 0; i < d.v.dim; ++i) {
            auto k = static_cast<std::size_t>(i);
            d.err[k] = lat.err[k] + ulp(ds[i]) + ulp(d.v[i]);
        }
        return lower_norm2(d);
    }
    return lower_norm2(sub(sphere_bounded(l, a), sphere_bounded(l, b)));
}

void check_coord_arity(const DefectivePacking& pk, const LatticeCoord& c) {
    if (c.dim != pk.dim()) throw std::invalid_argument("lattice coordinate " + coord_str(c) + " has wrong arity");
}

}  // namespace

bool operator==(const Witness& a, const Witness& b) {
    return a.base.lattice == b.base.lattice && same_point(a.base.gap.normal, b.base.gap.normal) &&
           a.base.gap.offset == b.base.gap.offset && a.base.gap.width == b.base.gap.width &&
           same_point(a.region.lo, b.region.lo) && same_point(a.region.hi, b.region.hi) && a.removals == b.removals &&
           a.moves == b.moves && a.insertions == b.insertions && a.provenance == b.provenance;
}

CheckReport check_witness(const Witness& w, bool strict, const ToleranceConfig& tol) {
    CheckReport rep;
    rep.strict_mode = strict;
    const DefectivePacking& pk = w.base;
    const int dim = pk.dim();
    if (w.region.dim() != dim) throw std::invalid_argument("region dimension does not match lattice");
    for (const auto& c : w.removals) check_coord_arity(pk, c);
    for (const auto& m : w.moves) {
        check_coord_arity(pk, m.coord);
        if (m.to.dim != dim) throw std::invalid_argument("move target has wrong dimension");
        if (m.shift && m.shift->dim != dim) throw std::invalid_argument("move shift has wrong dimension");
    }
    for (const auto& p : w.insertions)
        if (p.dim != dim) throw std::invalid_argument("insertion has wrong dimension");

    rep.net_gain = static_cast<long long>(w.insertions.size()) - static_cast<long long>(w.removals.size());

    // (a) edits confined to the region, bookkeeping consistent
    std::set<LatticeCoord> removed(w.removals.begin(), w.removals.end());
    if (removed.size() != w.removals.size()) rep.violations.push_back("duplicate removal");
    std::set<LatticeCoord> moved;
    for (const auto& c : w.removals)
        if (!w.region.contains(defect_center(pk, c)))
            rep.violations.push_back("removal " + coord_str(c) + " outside region");
    for (const auto& m : w.moves) {
        if (!moved.insert(m.coord).second) rep.violations.push_back("duplicate move of " + coord_str(m.coord));
        if (removed.count(m.coord)) rep.violations.push_back("sphere " + coord_str(m.coord) + " both moved and removed");
        if (!w.region.contains(defect_center(pk, m.coord)))
            rep.violations.push_back("moved sphere " + coord_str(m.coord) + " starts outside region");
        if (!w.region.contains(m.to))
            rep.violations.push_back("moved sphere " + coord_str(m.coord) + " ends outside region at " + point_str(m.to));
        if (m.shift) {
            Point p = lattice_point(pk.lattice, m.coord) + *m.shift;
            if (std::sqrt(dist2(p, m.to)) > 1e-9 * (1.0 + norm(m.to)))
                rep.violations.push_back("move of " + coord_str(m.coord) + " disagrees with its shift");
        }
    }
    for (const auto& p : w.insertions)
        if (!w.region.contains(p)) rep.violations.push_back("insertion " + point_str(p) + " outside region");

    // (b) validity of the reconstructed configuration
    std::vector<Sphere> spheres;
    const Point v = pk.shift_vector();
    for (const auto& c : enumerate_centers(pk, w.region.expanded(2.0 + 1e-6))) {
        if (removed.count(c.coord) || moved.count(c.coord)) continue;
        Sphere s;
        s.at = c.at;
        s.anchored = true;
        s.coord = c.coord;
        s.shift = in_upper_half(pk, lattice_point(pk.lattice, c.coord)) ? v : zero_point(dim);
        s.label = "lattice " + coord_str(c.coord);
        spheres.push_back(s);
    }
    for (const auto& m : w.moves) {
        Sphere s;
        s.at = m.to;
        s.coord = m.coord;
        s.anchored = m.shift.has_value();
        if (m.shift) s.shift = *m.shift;
        s.label = "moved " + coord_str(m.coord);
        spheres.push_back(s);
    }
    for (const auto& p : w.insertions) {
        Sphere s;
        s.at = p;
        s.label = "inserted " + point_str(p);
        spheres.push_back(s);
    }

    const double lim = 4.0 - tol.eps_valid;
    std::size_t reported = 0;
    // sweep along x; every pair closer than the window is examined
    std::vector<std::size_t> order(spheres.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return spheres[p].at[0] < spheres[q].at[0]; });
    const double window = 2.2;
    for (std::size_t ia = 0; ia < order.size(); ++ia)
        for (std::size_t ib = ia + 1; ib < order.size(); ++ib) {
            std::size_t a = order[ia], b = order[ib];
            if (spheres[b].at[0] - spheres[a].at[0] > window) break;
            double d2 = dist2(spheres[a].at, spheres[b].at);
            bool bad;
            if (strict) bad = d2 < 4.5 && strict_lower_dist2(pk.lattice, spheres[a], spheres[b]) < 4.0;
            else bad = d2 < lim;
            if (!bad) continue;
            if (reported++ < 50) {
                std::ostringstream os;
                os.precision(17);
                os << "overlap: " << spheres[a].label << " and " << spheres[b].label << " at dist2 " << d2;
                rep.violations.push_back(os.str());
            }
        }
    if (reported > 50) rep.violations.push_back(std::to_string(reported - 50) + " further overlaps");

    // (c) net gain
    if (rep.net_gain < 1) rep.violations.push_back("net gain " + std::to_string(rep.net_gain) + " < 1");
    rep.accepted = rep.violations.empty();
    return rep;
}

Witness witness_from_patch(const PackingPatch& patch, const std::string& provenance) {
    if (!patch.packing()) throw std::invalid_argument("witness_from_patch needs a patch over a defective packing");
    Witness w;
    w.base = *patch.packing();
    w.region = patch.region();
    w.removals = patch.removed_coords();
    for (int id : patch.moved_ids()) w.moves.push_back({*patch.origin(id), patch.at(id), patch.shift(id)});
    std::sort(w.moves.begin(), w.moves.end(), [](const Move& a, const Move& b) { return a.coord < b.coord; });
    for (int id : patch.inserted_ids()) w.insertions.push_back(patch.at(id));
    w.provenance = provenance;
    return w;
}

std::vector<TaggedCenter> witness_final_centers(const Witness& w, double margin) {
    std::set<LatticeCoord> gone(w.removals.begin(), w.removals.end());
    for (const auto& m : w.moves) gone.insert(m.coord);
    std::vector<TaggedCenter> out;
    for (const auto& c : enumerate_centers(w.base, w.region.expanded(margin)))
        if (!gone.count(c.coord)) out.push_back({c.at, 0});
    for (const auto& m : w.moves) out.push_back({m.to, 1});
    for (const auto& p : w.insertions) out.push_back({p, 2});
    return out;
}

// ---- serialization ----

namespace {

json point_json(const Point& p) {
    json a = json::array();
    for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
    return a;
}

json coord_json(const LatticeCoord& c) {
    json a = json::array();
    for (int i = 0; i < c.dim; ++i) a.push_back(c[i]);
    return a;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ParseError("field '" + field + "': " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) field_error(path + key, "missing");
    return j.at(key);
}

Point parse_point(const json& j, int dim, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        field_error(field, "expected " + std::to_string(dim) + " numbers");
    Point p = zero_point(dim);
    for (int i = 0; i < dim; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) field_error(field, "expected a number");
        p[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return p;
}

LatticeCoord parse_coord(const json& j, int dim, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        field_error(field, "expected " + std::to_string(dim) + " integers");
    LatticeCoord c;
    c.dim = dim;
    for (int i = 0; i < dim; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number_integer()) field_error(field, "expected an integer");
        c[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)].get<int>();
    }
    return c;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

std::string witness_to_json(const Witness& w) {
    json j;
    j["format"] = kFormatName;
    j["version"] = kFormatVersion;
    j["dim"] = w.base.dim();
    j["lattice"] = lattice_name(w.base.lattice);
    j["gap"] = {{"normal", point_json(w.base.gap.normal)}, {"offset", w.base.gap.offset}, {"width", w.base.gap.width}};
    j["region"] = {{"lo", point_json(w.region.lo)}, {"hi", point_json(w.region.hi)}};
    json rem = json::array();
    for (const auto& c : w.removals) rem.push_back(coord_json(c));
    j["removals"] = rem;
    json mv = json::array();
    for (const auto& m : w.moves) {
        json e = {{"coord", coord_json(m.coord)}, {"to", point_json(m.to)}};
        if (m.shift) e["shift"] = point_json(*m.shift);
        mv.push_back(e);
    }
    j["moves"] = mv;
    json ins = json::array();
    for (const auto& p : w.insertions) ins.push_back(point_json(p));
    j["insertions"] = ins;
    j["provenance"] = w.provenance;
    return j.dump(1) + "\n";
}

Witness witness_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError("line 1: top level must be an object");
    const json& fmt = require(j, "format", "");
    if (!fmt.is_string() || fmt.get<std::string>() != kFormatName) field_error("format", "not a witness file");
    const json& ver = require(j, "version", "");
    if (!ver.is_number_integer() || ver.get<int>() != kFormatVersion)
        field_error("version", "unsupported version " + ver.dump());
    const json& dimj = require(j, "dim", "");
    if (!dimj.is_number_integer()) field_error("dim", "expected an integer");
    int dim = dimj.get<int>();
    const json& latj = require(j, "lattice", "");
    if (!latj.is_string()) field_error("lattice", "expected a string");
    Lattice lat;
    try {
        lat = parse_lattice(latj.get<std::string>());
    } catch (const std::invalid_argument& e) {
        field_error("lattice", e.what());
    }
    if (lattice_dim(lat) != dim) field_error("dim", "does not match lattice");

    Witness w;
    const json& gap = require(j, "gap", "");
    Point normal = parse_point(require(gap, "normal", "gap."), dim, "gap.normal");
    const json& off = require(gap, "offset", "gap.");
    const json& wid = require(gap, "width", "gap.");
    if (!off.is_number()) field_error("gap.offset", "expected a number");
    if (!wid.is_number()) field_error("gap.width", "expected a number");
    try {
        w.base = make_packing(lat, normal, off.get<double>(), wid.get<double>());
    } catch (const std::invalid_argument& e) {
        field_error("gap", e.what());
    }
    const json& reg = require(j, "region", "");
    w.region.lo = parse_point(require(reg, "lo", "region."), dim, "region.lo");
    w.region.hi = parse_point(require(reg, "hi", "region."), dim, "region.hi");

    const json& rem = require(j, "removals", "");
    if (!rem.is_array()) field_error("removals", "expected an array");
    for (std::size_t i = 0; i < rem.size(); ++i)
        w.removals.push_back(parse_coord(rem[i], dim, "removals[" + std::to_string(i) + "]"));
    const json& mv = require(j, "moves", "");
    if (!mv.is_array()) field_error("moves", "expected an array");
    for (std::size_t i = 0; i < mv.size(); ++i) {
        std::string f = "moves[" + std::to_string(i) + "]";
        Move m;
        m.coord = parse_coord(require(mv[i], "coord", f + "."), dim, f + ".coord");
        m.to = parse_point(require(mv[i], "to", f + "."), dim, f + ".to");
        if (mv[i].contains("shift")) m.shift = parse_point(mv[i]["shift"], dim, f + ".shift");
        w.moves.push_back(m);
    }
    const json& ins = require(j, "insertions", "");
    if (!ins.is_array()) field_error("insertions", "expected an array");
    for (std::size_t i = 0; i < ins.size(); ++i)
        w.insertions.push_back(parse_point(ins[i], dim, "insertions[" + std::to_string(i) + "]"));
    if (j.contains("provenance")) {
        if (!j["provenance"].is_string()) field_error("provenance", "expected a string");
        w.provenance = j["provenance"].get<std::string>();
    }
    return w;
}

void write_witness(const Witness& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << witness_to_json(w);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Witness read_witness(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return witness_from_json(ss.str());
}

}  // namespace gapsat
