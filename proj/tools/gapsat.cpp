// gapsat: command-line front end.
#include <iostream>

#include <CLI11.hpp>

#include "gapsat/cli.hpp"

int main(int argc, char** argv) {
    using namespace gapsat;
    RunConfig c;
    std::string lattice = "honeycomb";
    CLI::App app{"Gap defects in lattice packings: widening, witnesses, checking."};
    app.require_subcommand(1);

    auto gap_flags = [&](CLI::App* s) {
        s->add_option("--lattice", lattice, "honeycomb or fcc")->check(CLI::IsMember({"honeycomb", "fcc"}));
        s->add_option("--gap-normal", c.normal, "gap normal x,y[,z]; normalized")->delimiter(',');
        s->add_option("--gap-offset", c.offset, "offset of the gap hyperplane");
        s->add_option("--gap-width", c.width, "gap width d")->check(CLI::NonNegativeNumber);
        s->add_option("--seed", c.seed, "seed (recorded, nothing is randomized)");
    };

    auto* gen = app.add_subcommand("generate", "write a window of the defective packing");
    gap_flags(gen);
    gen->add_option("--window", c.window, "half-size of the window")->check(CLI::PositiveNumber);
    gen->add_option("--out", c.output, "output patch file (stdout if omitted)");

    auto* widen = app.add_subcommand("widen", "optimize one widening iteration");
    gap_flags(widen);
    widen->add_option("--n", c.n, "family size")->check(CLI::Range(3, 1000));
    widen->add_option("--out", c.output, "output schedule file");

    auto* wit = app.add_subcommand("witness", "build and check a witness");
    gap_flags(wit);
    wit->add_option("--n", c.n, "block size for reductions")->check(CLI::Range(2, 1000));
    wit->add_option("--max-centers", c.max_centers, "size budget of the working patch");
    wit->add_flag("--strict", c.strict, "check with conservative error bounds");
    wit->add_option("--out", c.output, "output witness file");

    auto* chk = app.add_subcommand("check", "verify a witness file");
    chk->add_option("witness", c.input, "witness file")->required();
    chk->add_flag("--strict", c.strict, "conservative error bounds");

    auto* curve = app.add_subcommand("delta-curve", "sweep delta(d) to CSV");
    gap_flags(curve);
    curve->add_option("--n", c.n, "family size")->check(CLI::Range(3, 1000));
    curve->add_option("--d-min", c.d_min, "first width");
    curve->add_option("--d-max", c.d_max, "last width");
    curve->add_option("--steps", c.steps, "grid points")->check(CLI::PositiveNumber);
    curve->add_option("--threads", c.threads, "worker threads (0: all cores)");
    curve->add_option("--out", c.output, "CSV file (stdout if omitted)");

    auto* render = app.add_subcommand("render", "SVG (2D) or OBJ (3D) of a witness or patch");
    render->add_option("input", c.input, "witness or patch file")->required();
    render->add_option("--out", c.output, "output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    c.subcommand = app.get_subcommands().front()->get_name();
    c.lattice = parse_lattice(lattice);
    return run(c, std::cout, std::cerr);
}
