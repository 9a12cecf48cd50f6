#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdm/model.hpp"

namespace mdm::cli {

enum class Command { Exact, Pressure, Critical, Branches, Exponent, Scaled, Gauss, Convergence };
enum class OutputFormat { Csv, Json };

const char* to_string(Command c);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    int steps = 1;
};

struct RunConfig {
    Command command = Command::Exact;
    ModelParams params;                 // h_AB and J_AB^AB double as the reduced (h, J)
    std::vector<int> sizes;             // N grid
    std::vector<double> offsets;        // exponent: J - J_c
    std::vector<double> alphas;         // scaled: alpha grid
    double jprime = 160000.0;
    std::optional<Range> h_range;       // branches
    std::optional<Range> J_range;
    int grid = 64;
    int max_n = 2000;
    std::string method = "quadrature";  // gauss: quadrature | monte-carlo
    std::uint64_t samples = 1'000'000;
    std::string output;                 // empty: stdout
    OutputFormat format = OutputFormat::Csv;
    std::optional<std::uint64_t> seed;
    bool deterministic = true;
    unsigned threads = 1;

    // Throws ValidationError on out-of-domain values or empty/non-finite ranges.
    void validate() const;
};

// Applies one key=value setting; the same keys are accepted on the command line
// (as --key value) and in a config file. Throws ValidationError on unknown keys.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Reads key=value lines ('#' comments and blank lines skipped).
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

// Runs one command, writing the table to `out`. Exit codes: 0 ok, 2 validation, 3 numerical.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full entry point: parse argv, apply the config file, run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mdm::cli
