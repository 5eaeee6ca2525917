#pragma once

// Command-line front end: detect / simulate / fit / bench / density.
// Exit codes: 0 completed without alarm, 2 alarm raised (detect), 1 error.

#include <ostream>
#include <string>
#include <vector>

#include "maxcorr/bench.hpp"

namespace maxcorr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

/// `args` excludes the program name. Standard input is read when --input is "-".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Detector groups and threshold grids behind `bench --preset`.
struct BenchPreset {
    std::string name;
    double post_J = 2.0;
    std::int64_t trials = 1000;
    std::int64_t horizon = 0;  // 0: 20 * exp(A)
    std::vector<std::pair<DetectorSpec, std::vector<double>>> curves;
};

/// Known names: fig6, fig6-desk, fig7, fig7-desk.
BenchPreset bench_preset(const std::string& name, int n = 10, int p = 100);

}  // namespace maxcorr
