#include "ptwell/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Human-facing labels (directory names, sweep keys); full precision is kept
// in the per-run resolved.config.
std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string, std::less<>> parse_key_values(const std::string& text) {
    std::map<std::string, std::string, std::less<>> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (kv.count(key))
            throw ConfigError("duplicate config key '" + key + "'");
        kv.emplace(key, value);
    }
    return kv;
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has non-numeric value '" + value + "'");
    }
    if (pos != value.size())
        throw ConfigError("config key '" + key + "' has trailing garbage in '" + value + "'");
    return v;
}

bool set_config_field(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "n_total") c.n_total = static_cast<int>(to_double(key, value));
    else if (key == "gamma") c.gamma = to_double(key, value);
    else if (key == "j") c.j = to_double(key, value);
    else if (key == "u") c.u = to_double(key, value);
    else if (key == "d") c.d = to_double(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_double(key, value));
    else if (key == "n") c.n = to_double(key, value);
    else if (key == "n1_0") c.n1_0 = to_double(key, value);
    else if (key == "n4_0") c.n4_0 = to_double(key, value);
    else if (key == "dt_initial") c.dt_initial = to_double(key, value);
    else if (key == "t_max") c.t_max = to_double(key, value);
    else if (key == "sample_interval") c.sample_interval = to_double(key, value);
    else if (key == "collapse_current_factor") c.collapse_current_factor = to_double(key, value);
    else if (key == "collapse_control_factor") c.collapse_control_factor = to_double(key, value);
    else if (key == "degeneracy_factor") c.degeneracy_factor = to_double(key, value);
    else if (key == "integrator_tol") c.integrator_tol = to_double(key, value);
    else if (key == "complex_perturbation")
        c.complex_perturbation = (value == "1" || value == "true");
    else return false;
    return true;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    const auto kv = parse_key_values(text);
    if (kv.count("u") && kv.count("g"))
        throw ConfigError("give either 'u' or 'g', not both");
    RunConfig config;
    for (const auto& [key, value] : kv) {
        if (key == "g") continue;
        if (!set_config_field(config, key, value))
            throw ConfigError("unknown config key '" + key + "'");
    }
    if (auto it = kv.find("g"); it != kv.end()) {
        if (config.n_total < 2)
            throw ConfigError("'g' requires n_total >= 2");
        config.u = to_double("g", it->second) / (config.n_total - 1);
    }
    config.validate();
    return config;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string format_config(const RunConfig& c) {
    std::ostringstream os;
    os << "n_total = " << c.n_total << '\n'
       << "gamma = " << fmt(c.gamma) << '\n'
       << "j = " << fmt(c.j) << '\n'
       << "u = " << fmt(c.u) << '\n'
       << "d = " << fmt(c.d) << '\n'
       << "seed = " << c.seed << '\n'
       << "n = " << fmt(c.n) << '\n'
       << "n1_0 = " << fmt(c.n1_0) << '\n'
       << "n4_0 = " << fmt(c.n4_0) << '\n'
       << "dt_initial = " << fmt(c.dt_initial) << '\n'
       << "t_max = " << fmt(c.t_max) << '\n'
       << "sample_interval = " << fmt(c.sample_interval) << '\n'
       << "collapse_current_factor = " << fmt(c.collapse_current_factor) << '\n'
       << "collapse_control_factor = " << fmt(c.collapse_control_factor) << '\n'
       << "degeneracy_factor = " << fmt(c.degeneracy_factor) << '\n'
       << "integrator_tol = " << fmt(c.integrator_tol) << '\n'
       << "complex_perturbation = " << (c.complex_perturbation ? 1 : 0) << '\n';
    return os.str();
}

std::string format_timeseries_csv(const RunRecord& record) {
    std::ostringstream os;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) os << ',';
        os << kCsvColumns[i];
    }
    os << '\n';
    for (const Sample& s : record.samples) {
        const auto& fo = s.first_order;
        const double row[16] = {
            s.t,
            fo.occupations[0], fo.occupations[1], fo.occupations[2], fo.occupations[3],
            fo.currents(0, 1), fo.currents(1, 2), fo.currents(2, 3),
            fo.correlations(1, 2),
            s.controls.j12, s.controls.j34, s.controls.eps1, s.controls.eps4,
            fo.purity2, fo.purity4,
            s.norm};
        for (int i = 0; i < 16; ++i) {
            if (i) os << ',';
            os << fmt(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

std::vector<CsvRow> read_timeseries_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("timeseries CSV is empty");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::string expected;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) expected += ',';
        expected += kCsvColumns[i];
    }
    if (header != expected)
        throw std::runtime_error("timeseries CSV has unexpected header: " + header);
    std::vector<CsvRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        CsvRow row{};
        std::istringstream ls(line);
        std::string cell;
        for (int i = 0; i < 16; ++i) {
            if (!std::getline(ls, cell, ','))
                throw std::runtime_error("timeseries CSV row has too few columns");
            row[static_cast<std::size_t>(i)] = std::stod(cell);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<CsvRow> read_timeseries_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_timeseries_csv(in);
}

std::string format_summary_json(const RunRecord& record) {
    const TwoModeTarget target{record.config.gamma, record.config.j, record.config.n,
                               record.config.u * (record.config.n_total - 1)};
    json j;
    j["version"] = kVersion;
    j["termination"] = to_string(record.termination);
    j["termination_time"] = record.termination_time;
    if (record.termination == Termination::Collapsed)
        j["t_collapse"] = record.termination_time;
    else
        j["t_collapse"] = nullptr;
    if (!record.error_message.empty()) j["message"] = record.error_message;
    j["constraint_residuals"] = record.initial_residuals.r;
    j["initial_purity2"] = record.initial_purity2;
    j["initial_purity4"] = record.initial_purity4;
    j["max_norm_drift"] = record.max_norm_drift;
    j["samples"] = record.samples.size();
    j["target"] = {{"n", target.n},
                   {"jt23", target.current()},
                   {"c23", target.correlation()},
                   {"phi", target.phi()}};
    return j.dump(2) + "\n";
}

std::string plot_script() {
    return R"PY(#!/usr/bin/env python3
"""Six-panel run figure from timeseries.csv (occupations, inner-well
current/correlation vs the two-mode targets, controls, reservoir currents,
onsite energies, purity)."""
import csv
import json
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

base = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
with open(base / "timeseries.csv", newline="") as f:
    rows = [dict((k, float(v)) for k, v in r.items()) for r in csv.DictReader(f)]
if not rows:
    sys.exit("timeseries.csv has no samples")
summary = json.loads((base / "summary.json").read_text())
col = lambda name: [r[name] for r in rows]
t = col("t")
t_c = summary.get("t_collapse")

fig, axes = plt.subplots(3, 2, figsize=(10, 10), sharex=True)
(a, b), (c, d), (e, f) = axes

for i in range(1, 5):
    a.plot(t, col(f"n{i}"), label=f"$n_{i}$")
a.set_ylabel("occupation")

b.plot(t, col("jt23"), label=r"$\tilde{j}_{23}$")
b.plot(t, col("c23"), label="$c_{23}$")
b.axhline(summary["target"]["jt23"], ls="--", c="gray", lw=0.8)
b.axhline(summary["target"]["c23"], ls="--", c="gray", lw=0.8)

c.plot(t, col("J12"), label="$J_{12}$")
c.plot(t, col("J34"), label="$J_{34}$")
c.set_ylabel("tunnelling rate")

d.plot(t, col("jt12"), label=r"$\tilde{j}_{12}$")
d.plot(t, col("jt34"), label=r"$\tilde{j}_{34}$")

e.plot(t, col("eps1"), label=r"$\epsilon_1$")
e.plot(t, col("eps4"), label=r"$\epsilon_4$")
e.set_ylabel("onsite energy")
e.set_xlabel("t")

f.plot(t, col("P2"), label="$P_2$")
f.plot(t, col("P4"), label="$P_4$")
f.set_xlabel("t")

for ax in axes.flat:
    if t_c is not None:
        ax.axvline(t_c, color="red", ls=":", lw=0.8)
    ax.legend(loc="best", fontsize=8)

fig.tight_layout()
out = base / "figure.png"
fig.savefig(out, dpi=150)
print(f"wrote {out}")
)PY";
}

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed_override) {
    RunConfig config;
    try {
        config = parse_config_file(config_path);
        if (seed_override) config.seed = *seed_override;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const RunRecord record = run(config);

    std::ofstream(out_dir / "resolved.config") << format_config(config);
    std::ofstream(out_dir / "timeseries.csv") << format_timeseries_csv(record);
    std::ofstream(out_dir / "summary.json") << format_summary_json(record);

    std::cout << "termination: " << to_string(record.termination);
    if (record.termination == Termination::Collapsed)
        std::cout << " at t_c = " << record.termination_time;
    std::cout << " (" << record.samples.size() << " samples)\n";
    if (record.termination == Termination::Error) {
        std::cerr << "error: " << record.error_message << '\n';
        return 1;
    }
    return 0;
}

int cmd_plot(const std::filesystem::path& out_dir) {
    const auto csv_path = out_dir / "timeseries.csv";
    try {
        const auto rows = read_timeseries_csv(csv_path);
        if (rows.empty())
            throw std::runtime_error(csv_path.string() + " contains no samples");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::ofstream(out_dir / "plot.py") << plot_script();
    std::cout << "wrote " << (out_dir / "plot.py").string() << '\n';
    return 0;
}

int cmd_sweep(const std::filesystem::path& config_path, const std::string& param,
              const std::vector<double>& values, int seeds,
              const std::filesystem::path& out_dir) {
    RunConfig base;
    try {
        base = parse_config_file(config_path);
        if (values.empty()) throw ConfigError("sweep value list is empty");
        if (seeds < 1) throw ConfigError("sweep needs at least one seed");
        RunConfig probe = base;
        if (!set_config_field(probe, param, fmt(values.front())))
            throw ConfigError("unknown sweep parameter '" + param + "'");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    struct Job {
        RunConfig config;
        double value;
        std::filesystem::path dir;
    };
    std::vector<Job> jobs;
    for (double value : values) {
        for (int s = 0; s < seeds; ++s) {
            RunConfig config = base;
            set_config_field(config, param, fmt(value));
            config.seed = base.seed + static_cast<std::uint64_t>(s);
            std::ostringstream dir;
            dir << param << "=" << fmt_short(value) << "/seed=" << config.seed;
            jobs.push_back({config, value, out_dir / dir.str()});
        }
    }

    std::vector<std::future<SweepResult>> futures;
    futures.reserve(jobs.size());
    for (const Job& job : jobs) {
        futures.push_back(std::async(std::launch::async, [job]() {
            SweepResult res;
            res.value = job.value;
            res.seed = job.config.seed;
            try {
                job.config.validate();
                const RunRecord record = run(job.config);
                std::filesystem::create_directories(job.dir);
                std::ofstream(job.dir / "resolved.config") << format_config(job.config);
                std::ofstream(job.dir / "timeseries.csv") << format_timeseries_csv(record);
                std::ofstream(job.dir / "summary.json") << format_summary_json(record);
                res.termination = to_string(record.termination);
                res.t_collapse = record.collapse_time().value_or(
                    std::numeric_limits<double>::quiet_NaN());
                res.max_residual = record.initial_residuals.max_abs();
                res.initial_purity4 = record.initial_purity4;
            } catch (const std::exception& e) {
                res.termination = std::string("error: ") + e.what();
                res.t_collapse = std::numeric_limits<double>::quiet_NaN();
                res.max_residual = std::numeric_limits<double>::quiet_NaN();
                res.initial_purity4 = std::numeric_limits<double>::quiet_NaN();
            }
            return res;
        }));
    }

    std::filesystem::create_directories(out_dir);
    std::ofstream agg(out_dir / "sweep.csv");
    agg << param << ",seed,termination,t_collapse,max_residual,initial_P4\n";
    for (auto& f : futures) {
        const SweepResult r = f.get();
        agg << fmt_short(r.value) << ',' << r.seed << ',' << r.termination << ','
            << fmt(r.t_collapse) << ',' << fmt(r.max_residual) << ','
            << fmt(r.initial_purity4) << '\n';
    }
    std::cout << "wrote " << (out_dir / "sweep.csv").string() << " (" << jobs.size()
              << " runs)\n";
    return 0;
}

}  // namespace ptwell
