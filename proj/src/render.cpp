#include "gapsat/render.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gapsat/rearrange.hpp"

namespace gapsat {

using json = nlohmann::json;

std::string fmt_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// ---- patch files ----

PatchFile generate_patch(const DefectivePacking& pk, const Region& window) {
    if (window.dim() != pk.dim()) throw std::invalid_argument("window dimension does not match lattice");
    PatchFile p{pk, window, {}};
    for (const auto& c : enumerate_centers(pk, window)) p.centers.push_back(c.at);
    return p;
}

namespace {

json pt(const Point& p) {
    json a = json::array();
    for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
    return a;
}

Point read_pt(const json& j, int dim, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ParseError("field '" + field + "': expected " + std::to_string(dim) + " numbers");
    Point p = zero_point(dim);
    for (int i = 0; i < dim; ++i) {
        if (!j[static_cast<std::size_t>(i)].is_number()) throw ParseError("field '" + field + "': not a number");
        p[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)].get<double>();
    }
    return p;
}

}  // namespace

std::string patch_to_json(const PatchFile& p) {
    json j;
    j["format"] = "gapsat-patch";
    j["version"] = 1;
    j["dim"] = p.base.dim();
    j["lattice"] = lattice_name(p.base.lattice);
    j["gap"] = {{"normal", pt(p.base.gap.normal)}, {"offset", p.base.gap.offset}, {"width", p.base.gap.width}};
    j["region"] = {{"lo", pt(p.region.lo)}, {"hi", pt(p.region.hi)}};
    json cs = json::array();
    for (const auto& c : p.centers) cs.push_back(pt(c));
    j["centers"] = cs;
    return j.dump(1) + "\n";
}

PatchFile patch_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed patch file: ") + e.what());
    }
    auto need = [&](const json& o, const char* k, const std::string& path) -> const json& {
        if (!o.is_object() || !o.contains(k)) throw ParseError("field '" + path + k + "': missing");
        return o.at(k);
    };
    if (need(j, "format", "") != "gapsat-patch") throw ParseError("field 'format': not a patch file");
    if (need(j, "version", "") != 1) throw ParseError("field 'version': unsupported");
    Lattice l;
    try {
        l = parse_lattice(need(j, "lattice", "").get<std::string>());
    } catch (const std::exception&) {
        throw ParseError("field 'lattice': unknown lattice");
    }
    int dim = lattice_dim(l);
    if (need(j, "dim", "") != dim) throw ParseError("field 'dim': does not match lattice");
    const json& g = need(j, "gap", "");
    PatchFile p;
    try {
        p.base = make_packing(l, read_pt(need(g, "normal", "gap."), dim, "gap.normal"),
                              need(g, "offset", "gap.").get<double>(), need(g, "width", "gap.").get<double>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("field 'gap': ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("field 'gap': ") + e.what());
    }
    const json& r = need(j, "region", "");
    p.region.lo = read_pt(need(r, "lo", "region."), dim, "region.lo");
    p.region.hi = read_pt(need(r, "hi", "region."), dim, "region.hi");
    const json& cs = need(j, "centers", "");
    if (!cs.is_array()) throw ParseError("field 'centers': expected a list");
    for (std::size_t i = 0; i < cs.size(); ++i) p.centers.push_back(read_pt(cs[i], dim, "centers[" + std::to_string(i) + "]"));
    return p;
}

// ---- SVG ----

std::string render_svg(const DefectivePacking& pk, const Region& view, const std::vector<TaggedCenter>& centers,
                       const std::vector<Point>& removed) {
    if (pk.dim() != 2 || view.dim() != 2) throw std::invalid_argument("SVG output is for the honeycomb lattice");
    const double s = kSvgScale;
    // one radius of padding so boundary circles are whole
    Region v = view.expanded(1.0);
    auto X = [&](double x) { return fmt_real((x - v.lo[0]) * s); };
    auto Y = [&](double y) { return fmt_real((v.hi[1] - y) * s); };
    double w = (v.hi[0] - v.lo[0]) * s, h = (v.hi[1] - v.lo[1]) * s;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt_real(w) << "\" height=\"" << fmt_real(h)
       << "\" viewBox=\"0 0 " << fmt_real(w) << " " << fmt_real(h) << "\">\n";
    os << "<style>.background{fill:#d8d8d8;stroke:#555}.moved{fill:#7fb2e5;stroke:#1f4e79}"
          ".inserted{fill:#e8706b;stroke:#8b1a14}.removed{fill:none;stroke:#8b1a14;stroke-dasharray:6 4}"
          ".gap{stroke:#222;stroke-width:2}.gap-edge{stroke:#222;stroke-width:1;stroke-dasharray:8 6}</style>\n";
    static const char* cls[] = {"background", "moved", "inserted"};
    for (const auto& c : centers)
        os << "<circle class=\"" << cls[c.tag] << "\" cx=\"" << X(c.at[0]) << "\" cy=\"" << Y(c.at[1]) << "\" r=\""
           << fmt_real(s) << "\"/>\n";
    for (const auto& p : removed)
        os << "<circle class=\"removed\" cx=\"" << X(p[0]) << "\" cy=\"" << Y(p[1]) << "\" r=\"" << fmt_real(s)
           << "\"/>\n";
    // the hyperplane and the far edge of the gap, long enough to cross the view
    Point n = pk.gap.normal;
    Point t(-n[1], n[0]);
    double reach = norm(v.hi - v.lo) + norm(v.hi) + norm(v.lo) + std::abs(pk.gap.offset) + pk.gap.width;
    auto line = [&](double off, const char* c) {
        Point f = n * off;
        Point a = f - t * reach, b = f + t * reach;
        os << "<line class=\"" << c << "\" x1=\"" << X(a[0]) << "\" y1=\"" << Y(a[1]) << "\" x2=\"" << X(b[0])
           << "\" y2=\"" << Y(b[1]) << "\"/>\n";
    };
    line(pk.gap.offset, "gap");
    if (pk.gap.width > 0) line(pk.gap.offset + pk.gap.width, "gap-edge");
    os << "</svg>\n";
    return os.str();
}

// ---- OBJ ----

namespace {

struct Mesh {
    std::vector<Point> v;
    std::vector<std::array<int, 3>> f;
};

const Mesh& icosphere() {
    static const Mesh mesh = [] {
        Mesh m;
        const double p = (1.0 + std::sqrt(5.0)) / 2.0;
        double raw[12][3] = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                             {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
        for (auto& r : raw) m.v.push_back(normalized(Point(r[0], r[1], r[2])));
        std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            m.v.push_back(normalized(m.v[static_cast<std::size_t>(a)] + m.v[static_cast<std::size_t>(b)]));
            int id = static_cast<int>(m.v.size()) - 1;
            mid[key] = id;
            return id;
        };
        for (const auto& t : faces) {
            int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
            m.f.push_back({t[0], a, c});
            m.f.push_back({t[1], b, a});
            m.f.push_back({t[2], c, b});
            m.f.push_back({a, b, c});
        }
        return m;
    }();
    return mesh;
}

}  // namespace

std::size_t icosphere_vertices() { return icosphere().v.size(); }
std::size_t icosphere_faces() { return icosphere().f.size(); }

std::string render_obj(const std::vector<TaggedCenter>& centers, const std::string& mtl_file) {
    const Mesh& m = icosphere();
    static const char* mat[] = {"background", "moved", "inserted"};
    std::ostringstream os;
    os << "# gapsat scene, " << centers.size() << " spheres\n";
    if (!mtl_file.empty()) os << "mtllib " << mtl_file << "\n";
    std::size_t base = 1;
    // grouped by material so each role is one block
    for (int tag = 0; tag < 3; ++tag) {
        bool any = false;
        for (const auto& c : centers) {
            if (c.tag != tag) continue;
            if (!any) {
                os << "g " << mat[tag] << "\nusemtl " << mat[tag] << "\n";
                any = true;
            }
            for (const auto& v : m.v)
                os << "v " << fmt_real(c.at[0] + v[0]) << " " << fmt_real(c.at[1] + v[1]) << " "
                   << fmt_real(c.at[2] + v[2]) << "\n";
            for (const auto& f : m.f)
                os << "f " << base + static_cast<std::size_t>(f[0]) << " " << base + static_cast<std::size_t>(f[1])
                   << " " << base + static_cast<std::size_t>(f[2]) << "\n";
            base += m.v.size();
        }
    }
    return os.str();
}

std::string render_mtl() {
    return "newmtl background\nKd 0.75 0.75 0.75\n\n"
           "newmtl moved\nKd 0.35 0.6 0.9\n\n"
           "newmtl inserted\nKd 0.9 0.3 0.25\n";
}

// ---- delta curve ----

std::vector<DeltaRow> delta_curve(Lattice l, const Point& normal, double offset, double d_min, double d_max, int steps,
                                  int n, int threads) {
    if (steps < 1) throw std::invalid_argument("the d grid needs at least one point");
    if (d_min < 0 || d_max < d_min) throw std::invalid_argument("bad d range");
    std::vector<double> grid;
    for (int i = 0; i < steps; ++i) grid.push_back(steps == 1 ? d_min : d_min + (d_max - d_min) * i / (steps - 1));
    std::vector<DeltaRow> rows(grid.size());
    std::vector<std::string> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                DefectivePacking pk = make_packing(l, normal, offset, grid[i]);
                WidenSchedule s = l == Lattice::Honeycomb ? optimize_widening_2d(pk, n) : optimize_widening_3d(pk, n);
                rows[i] = {grid[i], s.delta, n, s.params[0], s.params[1], s.params[2]};
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    int nt = std::max(1, std::min<int>(threads, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) throw std::runtime_error("d = " + fmt_real(grid[i]) + ": " + errors[i]);
    return rows;
}

std::string delta_csv(const std::vector<DeltaRow>& rows) {
    std::string out = "d,delta,n,d1,d2,d3\n";
    for (const auto& r : rows)
        out += fmt_real(r.d) + "," + fmt_real(r.delta) + "," + std::to_string(r.n) + "," + fmt_real(r.d1) + "," +
               fmt_real(r.d2) + "," + fmt_real(r.d3) + "\n";
    return out;
}

}  // namespace gapsat
