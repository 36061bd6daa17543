#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gapsat/lattice.hpp"

namespace gapsat {

// Exit codes shared by every subcommand.
enum Exit : int { kExitOk = 0, kExitRejected = 1, kExitUsage = 2 };

struct RunConfig {
    std::string subcommand;
    Lattice lattice = Lattice::Honeycomb;
    std::vector<double> normal;  // empty: the first lattice-line / square-layer direction
    double offset = 0.5;
    double width = 0.5;
    int n = 6;
    double d_min = 0.1, d_max = 1.0;
    int steps = 10;
    double window = 10.0;  // half-size of the generate window
    std::string input;
    std::string output;
    bool strict = false;
    std::uint64_t seed = 1;  // nothing is randomized today; recorded for reproducibility
    int threads = 0;          // 0: hardware concurrency
    std::size_t max_centers = 400000;
};

// Builds the defective packing named by the config; throws std::invalid_argument.
DefectivePacking config_packing(const RunConfig& c);

int run_generate(const RunConfig& c, std::ostream& out, std::ostream& err);
int run_widen(const RunConfig& c, std::ostream& out, std::ostream& err);
int run_witness(const RunConfig& c, std::ostream& out, std::ostream& err);
int run_check(const RunConfig& c, std::ostream& out, std::ostream& err);
int run_delta_curve(const RunConfig& c, std::ostream& out, std::ostream& err);
int run_render(const RunConfig& c, std::ostream& out, std::ostream& err);

int run(const RunConfig& c, std::ostream& out, std::ostream& err);

}  // namespace gapsat
