#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cstab {

// Parsed command line. One JSON config file per invocation; flags win over
// config fields. Exit codes: 0 success, 2 no faithful circuit, 1 error.
struct CliOptions {
    std::string command;  // train | discover | stability | replay | report
    std::string config_path;
    std::string dir;  // replay/report input directory
    std::optional<std::string> out;
    std::optional<uint64_t> seed;
    std::optional<std::string> method;
    std::optional<std::string> aggregation;
    std::optional<std::string> intervention;
    std::optional<std::string> suite;
    std::optional<int> runs;
    std::optional<int> jobs;
    std::vector<double> noise_amplitudes;
    bool all_edges = false;  // discover: evaluate the full-graph circuit
};

int run_cli(const CliOptions& opts);

}  // namespace cstab
