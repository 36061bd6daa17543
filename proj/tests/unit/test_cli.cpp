#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../oracles.hpp"
#include "gapsat/cli.hpp"
#include "gapsat/render.hpp"
#include "gapsat/witness.hpp"

using namespace gapsat;

namespace {

struct Out {
    int rc;
    std::string out, err;
};

Out run_cfg(const RunConfig& c) {
    std::ostringstream o, e;
    int rc = run(c, o, e);
    return {rc, o.str(), e.str()};
}

RunConfig cfg(const std::string& sub) {
    RunConfig c;
    c.subcommand = sub;
    return c;
}

std::size_t count_prefix(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    std::size_t k = 0;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) ++k;
    return k;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t k = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++k;
    return k;
}

}  // namespace

TEST_CASE("generate writes the enumerated window") {
    for (auto l : {Lattice::Honeycomb, Lattice::Fcc}) {
        RunConfig c = cfg("generate");
        c.lattice = l;
        c.window = 4;
        c.width = 0.7;
        Out r = run_cfg(c);
        REQUIRE(r.rc == kExitOk);
        auto j = nlohmann::json::parse(r.out);
        auto pk = config_packing(c);
        CHECK(j["centers"].size() == oracle::enumerate(pk, Region::cube(pk.dim(), 4), 8).size());
        PatchFile p = patch_from_json(r.out);
        CHECK(p.centers.size() == j["centers"].size());
    }
    RunConfig bad = cfg("generate");
    bad.output = "no/such/dir/patch.json";
    CHECK(run_cfg(bad).rc != kExitOk);
    RunConfig wrong = cfg("generate");
    wrong.normal = {0, 0, 1};
    CHECK(run_cfg(wrong).rc == kExitUsage);
}

TEST_CASE("check exit codes") {
    Witness w;
    w.base = make_packing(Lattice::Honeycomb, Point(0, 1), -0.5, 2.0);
    w.region = Region::cube(2, 4);
    w.insertions.push_back(Point(0, 0));
    write_witness(w, "cli_ok.json");
    w.base.gap.width = 1.9;
    write_witness(w, "cli_bad.json");
    std::ofstream("cli_junk.json") << "{\"format\": \"gapsat-witness\", \"version\": ";

    RunConfig c = cfg("check");
    c.input = "cli_ok.json";
    Out ok = run_cfg(c);
    CHECK(ok.rc == kExitOk);
    CHECK(ok.out.find("accepted") != std::string::npos);
    c.input = "cli_bad.json";
    CHECK(run_cfg(c).rc == kExitRejected);
    c.input = "cli_junk.json";
    CHECK(run_cfg(c).rc == kExitUsage);
    c.input = "cli_missing.json";
    CHECK(run_cfg(c).rc == kExitUsage);
}

TEST_CASE("witness then check") {
    for (auto l : {Lattice::Honeycomb, Lattice::Fcc}) {
        RunConfig c = cfg("witness");
        c.lattice = l;
        c.width = 2.2;
        c.output = "cli_witness.json";
        Out w = run_cfg(c);
        CHECK(w.rc == kExitOk);
        RunConfig k = cfg("check");
        k.input = c.output;
        CHECK(run_cfg(k).rc == w.rc);
    }
    // sheared gap: the reduction runs but no witness comes out
    RunConfig s = cfg("witness");
    s.normal = {-0.3, 1};
    s.offset = 0.1;
    s.width = 0.4;
    s.n = 5;
    Out r = run_cfg(s);
    CHECK(r.rc == kExitRejected);
    CHECK(r.err.find("0.1608371") != std::string::npos);
}

TEST_CASE("delta curve") {
    RunConfig c = cfg("delta-curve");
    c.n = 4;
    c.threads = 2;
    Out r = run_cfg(c);
    REQUIRE(r.rc == kExitOk);
    CHECK(r.out.rfind("d,delta,n,d1,d2,d3\n", 0) == 0);
    CHECK(count_prefix(r.out, "0.") + count_prefix(r.out, "1") == 10);

    c.steps = 1;
    c.d_min = c.d_max = 0.8;
    r = run_cfg(c);
    CHECK(count_of(r.out, "\n") == 2);

    // same rows whatever the thread count
    RunConfig a = cfg("delta-curve"), b = a;
    a.n = b.n = 4;
    a.steps = b.steps = 4;
    a.threads = 1;
    b.threads = 3;
    CHECK(run_cfg(a).out == run_cfg(b).out);

    auto rows = delta_curve(Lattice::Fcc, Point(0, 0, 1), 0.25, 0.5, 1.0, 3, 4, 3);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) CHECK(row.delta > 0);

    RunConfig sheared = cfg("delta-curve");
    sheared.normal = {-0.3, 1};
    CHECK(run_cfg(sheared).rc == kExitUsage);
}

TEST_CASE("render") {
    PatchFile empty;
    empty.base = make_packing(Lattice::Honeycomb, Point(0, 1), 0.5, 100.0);
    empty.region = Region::cube(2, 3);
    {
        std::ofstream("cli_empty.json") << patch_to_json(empty);
    }
    RunConfig c = cfg("render");
    c.input = "cli_empty.json";
    Out r = run_cfg(c);
    REQUIRE(r.rc == kExitOk);
    CHECK(count_of(r.out, "<circle") == 0);
    CHECK(count_of(r.out, "<line") >= 1);

    auto fcc = make_packing(Lattice::Fcc, Point(0, 0, 1), 0.25, 0.5);
    PatchFile p = generate_patch(fcc, Region::cube(3, 2.5));
    REQUIRE(!p.centers.empty());
    {
        std::ofstream("cli_fcc.json") << patch_to_json(p);
    }
    c.input = "cli_fcc.json";
    r = run_cfg(c);
    REQUIRE(r.rc == kExitOk);
    CHECK(count_prefix(r.out, "v ") == p.centers.size() * icosphere_vertices());
    CHECK(count_prefix(r.out, "f ") == p.centers.size() * icosphere_faces());
    CHECK(icosphere_vertices() == 42);
    CHECK(icosphere_faces() == 80);

    c.input = "cli_missing.json";
    CHECK(run_cfg(c).rc == kExitUsage);
}
