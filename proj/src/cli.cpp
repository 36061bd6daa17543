#include "gapsat/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gapsat/packing.hpp"
#include "gapsat/rearrange.hpp"
#include "gapsat/render.hpp"
#include "gapsat/witness.hpp"

namespace gapsat {

using json = nlohmann::json;

namespace {

bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
    std::ofstream f(path, std::ios::binary);
    if (f) f << text;
    if (!f) {
        err << "error: cannot write " << path << "\n";
        return false;
    }
    return true;
}

// Writes to the output path, or to `out` when none was given.
bool emit(const RunConfig& c, const std::string& text, std::ostream& out, std::ostream& err) {
    if (c.output.empty()) {
        out << text;
        return true;
    }
    return write_file(c.output, text, err);
}

json pt(const Point& p) {
    json a = json::array();
    for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
    return a;
}

std::string schedule_json(const WidenSchedule& s) {
    json j;
    j["format"] = "gapsat-schedule";
    j["version"] = 1;
    j["lattice"] = lattice_name(s.family.lattice);
    j["n"] = s.family.n;
    j["width"] = s.width;
    j["delta"] = s.delta;
    j["params"] = {s.params[0], s.params[1], s.params[2]};
    json stages = json::array();
    for (const auto& st : s.stages) {
        json moves = json::array();
        for (const auto& m : st.moves)
            moves.push_back({{"role", m.role}, {"direction", pt(m.direction)}, {"distance", m.distance},
                             {"members", s.family.roles.at(m.role).count()}});
        stages.push_back({{"index", st.index}, {"moves", moves}});
    }
    j["stages"] = stages;
    if (s.removed) {
        json r = json::array();
        for (int i = 0; i < s.removed->dim; ++i) r.push_back((*s.removed)[static_cast<std::size_t>(i)]);
        j["removed"] = r;
    }
    return j.dump(1) + "\n";
}

int threads_of(const RunConfig& c) {
    if (c.threads > 0) return c.threads;
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

bool lattice_aligned(const DefectivePacking& pk) {
    if (pk.lattice == Lattice::Honeycomb) return honeycomb_line_rotation(pk.gap.normal) >= 0;
    return is_fcc_square_normal(pk.gap.normal);
}

}  // namespace

DefectivePacking config_packing(const RunConfig& c) {
    int dim = lattice_dim(c.lattice);
    Point n = dim == 2 ? Point(0.0, 1.0) : Point(0.0, 0.0, 1.0);
    if (!c.normal.empty()) {
        if (static_cast<int>(c.normal.size()) != dim)
            throw std::invalid_argument("gap normal needs " + std::to_string(dim) + " components");
        n = zero_point(dim);
        for (int i = 0; i < dim; ++i) n[static_cast<std::size_t>(i)] = c.normal[static_cast<std::size_t>(i)];
        double len = norm(n);
        if (len == 0) throw std::invalid_argument("gap normal is zero");
        n = n * (1.0 / len);
    }
    return make_packing(c.lattice, n, c.offset, c.width);
}

int run_generate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    DefectivePacking pk = config_packing(c);
    PatchFile p = generate_patch(pk, Region::cube(pk.dim(), c.window));
    if (!emit(c, patch_to_json(p), out, err)) return kExitRejected;
    if (!c.output.empty()) out << p.centers.size() << " centers written to " << c.output << "\n";
    return kExitOk;
}

int run_widen(const RunConfig& c, std::ostream& out, std::ostream& err) {
    DefectivePacking pk = config_packing(c);
    WidenSchedule s;
    try {
        s = pk.lattice == Lattice::Honeycomb ? optimize_widening_2d(pk, c.n) : optimize_widening_3d(pk, c.n);
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitRejected;
    }
    if (!emit(c, schedule_json(s), out, err)) return kExitRejected;
    if (!c.output.empty()) out << "delta " << fmt_real(s.delta) << "\n";
    return kExitOk;
}

int run_witness(const RunConfig& c, std::ostream& out, std::ostream& err) {
    DefectivePacking pk = config_packing(c);
    WitnessOptions opt;
    opt.max_centers = c.max_centers;
    opt.log = [&](const std::string& s) { err << "  " << s << "\n"; };
    std::optional<Witness> w;
    try {
        if (lattice_aligned(pk)) {
            w = pk.lattice == Lattice::Honeycomb ? build_witness_2d(pk, opt) : build_witness_3d(pk, opt);
        } else {
            w = direct_insertion_witness(pk, pk.dim() == 2 ? 8.0 : 5.0);
            if (!w) {
                Reduction r = pk.lattice == Lattice::Honeycomb ? reduce_line_gap(pk, c.n)
                              : is_fcc_honeycomb_normal(pk.gap.normal) ? reduce_honeycomb_gap(pk, c.n)
                                                                        : reduce_plane_gap(pk, c.n);
                err << "reduction: translation " << fmt_real(norm(r.translation)) << ", new gap width "
                    << fmt_real(r.width) << (r.valid ? "" : " (invalid)") << "\n";
                err << "infeasible: the reduced gaps are sheared; widening them is not supported, and the gap is "
                       "too narrow for direct insertion\n";
                return kExitRejected;
            }
        }
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitRejected;
    }
    std::string text = witness_to_json(*w);
    if (!emit(c, text, out, err)) return kExitRejected;
    // verify what was written, not the in-memory copy
    Witness back = c.output.empty() ? witness_from_json(text) : read_witness(c.output);
    CheckReport rep = check_witness(back, c.strict);
    for (const auto& v : rep.violations) err << "violation: " << v << "\n";
    err << (rep.accepted ? "accepted" : "rejected") << ", net gain " << rep.net_gain << "\n";
    return rep.accepted ? kExitOk : kExitRejected;
}

int run_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
    Witness w;
    try {
        w = read_witness(c.input);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    CheckReport rep;
    try {
        rep = check_witness(w, c.strict);
    } catch (const std::invalid_argument& e) {
        err << "malformed witness: " << e.what() << "\n";
        return kExitUsage;
    }
    for (const auto& v : rep.violations) out << "violation: " << v << "\n";
    out << (rep.accepted ? "accepted" : "rejected") << (rep.strict_mode ? " (strict)" : "") << ", net gain "
        << rep.net_gain << "\n";
    return rep.accepted ? kExitOk : kExitRejected;
}

int run_delta_curve(const RunConfig& c, std::ostream& out, std::ostream& err) {
    DefectivePacking pk = config_packing(c);
    if (!lattice_aligned(pk)) {
        err << "error: the delta curve needs a lattice-line or square-layer gap\n";
        return kExitUsage;
    }
    std::vector<DeltaRow> rows;
    try {
        rows = delta_curve(c.lattice, pk.gap.normal, c.offset, c.d_min, c.d_max, c.steps, c.n, threads_of(c));
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return emit(c, delta_csv(rows), out, err) ? kExitOk : kExitRejected;
}

int run_render(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::ifstream f(c.input, std::ios::binary);
    if (!f) {
        err << "error: cannot read " << c.input << "\n";
        return kExitUsage;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    std::string format;
    try {
        format = json::parse(text).value("format", "");
    } catch (const json::exception&) {
        err << "parse error: " << c.input << " is not a witness or patch file\n";
        return kExitUsage;
    }
    DefectivePacking pk;
    Region view;
    std::vector<TaggedCenter> centers;
    std::vector<Point> removed;
    try {
        if (format == "gapsat-witness") {
            Witness w = witness_from_json(text);
            pk = w.base;
            view = w.region;
            centers = witness_final_centers(w, 2.0);
            for (const auto& r : w.removals) removed.push_back(defect_center(pk, r));
        } else if (format == "gapsat-patch") {
            PatchFile p = patch_from_json(text);
            pk = p.base;
            view = p.region;
            for (const auto& x : p.centers) centers.push_back({x, 0});
        } else {
            err << "parse error: unknown format '" << format << "'\n";
            return kExitUsage;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (pk.dim() == 2) return emit(c, render_svg(pk, view, centers, removed), out, err) ? kExitOk : kExitRejected;
    if (format == "gapsat-witness") {
        // 3D scenes keep only the background near an edit
        std::vector<Point> pts;
        for (const auto& t : centers)
            if (t.tag != 0) pts.push_back(t.at);
        pts.insert(pts.end(), removed.begin(), removed.end());
        SpatialHash edits(2.0);
        for (std::size_t i = 0; i < pts.size(); ++i) edits.insert(static_cast<int>(i), pts[i]);
        std::vector<TaggedCenter> kept;
        for (const auto& t : centers) {
            bool near = t.tag != 0;
            if (!near)
                edits.query(t.at, 4.0, [&](int i) { near = near || dist2(t.at, pts[static_cast<std::size_t>(i)]) <= 16.0; });
            if (near) kept.push_back(t);
        }
        centers.swap(kept);
    }
    std::string mtl;
    if (!c.output.empty()) {
        mtl = c.output + ".mtl";
        if (!write_file(mtl, render_mtl(), err)) return kExitRejected;
        auto slash = mtl.find_last_of('/');
        if (slash != std::string::npos) mtl = mtl.substr(slash + 1);
    }
    return emit(c, render_obj(centers, mtl), out, err) ? kExitOk : kExitRejected;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        if (c.subcommand == "generate") return run_generate(c, out, err);
        if (c.subcommand == "widen") return run_widen(c, out, err);
        if (c.subcommand == "witness") return run_witness(c, out, err);
        if (c.subcommand == "check") return run_check(c, out, err);
        if (c.subcommand == "delta-curve") return run_delta_curve(c, out, err);
        if (c.subcommand == "render") return run_render(c, out, err);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRejected;
    }
    err << "error: unknown subcommand '" << c.subcommand << "'\n";
    return kExitUsage;
}

}  // namespace gapsat
