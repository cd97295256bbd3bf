#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptwell/dynamics.hpp"

namespace ptwell {

inline constexpr const char* kVersion = "0.1.0";

/// Column order of timeseries.csv.
inline constexpr std::array<const char*, 16> kCsvColumns = {
    "t",   "n1",  "n2",  "n3",   "n4",   "jt12", "jt23", "jt34",
    "c23", "J12", "J34", "eps1", "eps4", "P2",   "P4",   "norm"};

using CsvRow = std::array<double, 16>;

/// Parse a flat key=value config file. Unknown keys are rejected; missing
/// keys take the built-in defaults. `g` may be given instead of `u`.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

/// Full-precision echo of a resolved configuration, same key=value format.
std::string format_config(const RunConfig& config);

std::string format_timeseries_csv(const RunRecord& record);
std::vector<CsvRow> read_timeseries_csv(std::istream& in);
std::vector<CsvRow> read_timeseries_csv(const std::filesystem::path& path);

std::string format_summary_json(const RunRecord& record);

/// Matplotlib script reproducing the six-panel run figure from the CSV.
std::string plot_script();

/// run <config> -o <dir>: executes the experiment and writes timeseries.csv,
/// summary.json and resolved.config. Returns the process exit status.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed_override = std::nullopt);

/// plot <dir>: emits plot.py next to an existing timeseries.csv.
int cmd_plot(const std::filesystem::path& out_dir);

struct SweepResult {
    double value;
    std::uint64_t seed;
    std::string termination;
    double t_collapse;       // NaN unless collapsed
    double max_residual;     // of the prepared initial state
    double initial_purity4;
};

/// sweep <config> --param <name> --values <list> --seeds <count>: runs the
/// cross product in a worker pool, one output directory per run, plus an
/// aggregate sweep.csv.
int cmd_sweep(const std::filesystem::path& config_path, const std::string& param,
              const std::vector<double>& values, int seeds,
              const std::filesystem::path& out_dir);

}  // namespace ptwell
